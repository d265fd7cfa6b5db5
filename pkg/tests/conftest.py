import os

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("ci", max_examples=50, deadline=None)
settings.register_profile("thorough", max_examples=500, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "ci"))


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def random_unimodular(rng, n, steps=6):
    """Product of random elementary integer matrices."""
    U = np.eye(n, dtype=np.int64)
    for _ in range(steps):
        i, j = rng.choice(n, size=2, replace=False)
        E = np.eye(n, dtype=np.int64)
        E[i, j] = rng.integers(-2, 3)
        U = U @ E
    return U


def random_basis(rng, n, max_cond=1e3):
    while True:
        B = rng.normal(size=(n, n))
        if np.linalg.cond(B) <= max_cond:
            return B


def write_cli_inputs(root):
    """Input files for every ``gll`` subcommand; returns ``{name: argv}``."""
    import json
    from gaborlattice.fiber import FourierSymbol, SymbolSet
    from gaborlattice.lattice import Lattice

    S1 = SymbolSet(Lattice.standard(1), Lattice([[1.7]]), [[-1], [0], [2]],
                   (FourierSymbol([[0], [1]], [1.0, 0.3]), FourierSymbol.constant(3.0),
                    FourierSymbol([[0], [-1]], [1.0, 0.2j])))
    (root / "sym1.json").write_text(S1.to_json())
    (root / "rule2d.json").write_text(json.dumps({"C0": [[0, 0], [1, 0], [0, 1]], "gamma0": [1, 0]}))
    (root / "lat4.json").write_text(Lattice.standard(4).to_json())
    (root / "atoms.json").write_text(json.dumps([{"x": [0], "y": [0]}, {"x": [1], "y": [0]}, {"x": [0], "y": [1]}]))
    p = str(root)
    return {
        "reduce-lattice": ["reduce-lattice", "--basis", "[[1,1],[0,1]]"],
        "product-search": ["product-search", "--lattice", f"{p}/lat4.json", "--coeff-bound", "1"],
        "fiber-kernel": ["fiber-kernel", "--symbols", f"{p}/sym1.json", "--R", "10,20", "--samples", "3", "--seed", "7"],
        "recurrence": ["recurrence", "--symbols", f"{p}/sym1.json", "--x", "0.3", "--R", "8", "--window", "[1, [0, 1], 0.5]"],
        "conjugation-check": ["conjugation-check", "--symbols", f"{p}/sym1.json", "--samples", "4", "--seed", "3"],
        "propagate": ["propagate", "--rule", f"{p}/rule2d.json", "--set", "[[0,0],[0,1],[0,2]]", "--region=-5:5"],
        "growth": ["growth", "--rule", f"{p}/rule2d.json", "--n", "4:16:4"],
        "mathieu-bands": ["mathieu-bands", "--p", "1", "--q", "3", "--k", "64"],
        "butterfly": ["butterfly", "--q-max", "5", "--k", "32"],
        "gram-cert": ["gram-cert", "--atoms", f"{p}/atoms.json"],
    }
