"""Lattices, symplectic reductions, fiber operators, growth rules and Gram certificates for Gabor systems."""

from .lattice import Lattice, covolume, dual_lattice, lagrange_reduce, member, reduce_mod
from .symplectic import (
    PhasePoint,
    SymplecticMap,
    apply_to_atoms,
    is_symplectic,
    product_basis_search,
    reduce_to_product_d1,
    symplectic_form,
)
from .fiber import (
    Box,
    FiberOperator,
    FourierSymbol,
    RectTruncation,
    SymbolSet,
    TabulatedSymbol,
    certify_nonvanishing,
    check_conjugation,
    fiberize,
    kernel_dim,
    propagate_recurrence_d1,
    truncate_rect,
    window_solution_mass_profile,
)
from .propagation import (
    PropagationRule,
    StripConstruction,
    build_strip,
    build_strip_sets,
    extreme_point,
    growth_exponents,
    propagate_set,
)
from .mathieu import AMParams, BandList, bloch_bands, build_truncation, butterfly, dependence_residual, spectrum
from .gabor import GramResult, Window, atom_inner, dependence_search, gram_matrix

__version__ = "0.1.0"
