"""Fibered difference operators ``S_x u(g) = sum_k psi_k(x + g) u(g + g_k)`` on Z^d.

The operator ``S f(x) = sum_k psi_k(x) f(x + gamma_k)`` with Lambda-periodic
symbols is restricted to the orbit ``x + Gamma``.  Orbit points are labelled
by their integer coordinates in the Gamma basis, so every object here is a
finite-difference operator on Z^d with coefficients sampled along the orbit.

Only finite windows are computed.  A *rectangular truncation* keeps every
equation whose stencil fits inside a box, which makes the kernel dimension
an exact finite quantity (``m_N - m_1`` in one dimension).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .lattice import Lattice, dual_lattice, reduce_mod

SVD_TOL = 1e-10


class VanishingSymbolError(ValueError):
    """A symbol coefficient needed for a recurrence step is (numerically) zero."""


# ---------------------------------------------------------------- symbols

@dataclass(frozen=True, eq=False)
class FourierSymbol:
    """Trigonometric polynomial ``sum_m c_m exp(2 pi i <mu_m, t>)`` with ``mu_m`` in the dual of Lambda.

    ``freqs`` are integer coordinates of ``mu_m`` in the dual basis, so the
    phase is ``<freq, Lambda-coordinates of t>`` and periodicity is exact.
    """

    freqs: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        f = np.atleast_2d(np.asarray(self.freqs, dtype=np.int64))
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=complex))
        if f.shape[0] != c.shape[0]:
            raise ValueError("one coefficient per frequency expected")
        object.__setattr__(self, "freqs", f)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def constant(cls, value, d: int = 1) -> "FourierSymbol":
        return cls(np.zeros((1, d), dtype=np.int64), [value])

    @classmethod
    def character(cls, freq, coeff=1.0) -> "FourierSymbol":
        return cls(np.atleast_2d(freq), [coeff])

    def eval_coords(self, coords: np.ndarray) -> np.ndarray:
        """Evaluate at points given by Lambda-coordinates, shape (m, d)."""
        frac = coords - np.floor(coords)
        return np.exp(2j * np.pi * (frac @ self.freqs.T)) @ self.coeffs

    def to_dict(self) -> dict:
        return {"fourier": [{"freq": [int(v) for v in f], "re": float(c.real), "im": float(c.imag)}
                            for f, c in zip(self.freqs, self.coeffs)]}


@dataclass(frozen=True, eq=False)
class TabulatedSymbol:
    """Samples on the regular grid of ``[0, 1)^d`` (Lambda-coordinates), periodic multilinear interpolation."""

    samples: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=complex))

    def eval_coords(self, coords: np.ndarray) -> np.ndarray:
        shape = np.array(self.samples.shape)
        d = len(shape)
        frac = coords - np.floor(coords)
        pos = frac * shape
        lo = np.floor(pos).astype(np.int64)
        w = pos - lo
        out = np.zeros(coords.shape[0], dtype=complex)
        for corner in itertools.product((0, 1), repeat=d):
            corner = np.array(corner)
            idx = (lo + corner) % shape
            weight = np.prod(np.where(corner == 1, w, 1.0 - w), axis=1)
            out += weight * self.samples[tuple(idx.T)]
        return out

    def to_dict(self) -> dict:
        return {"tabulated": {"shape": list(self.samples.shape),
                              "re": self.samples.real.ravel().tolist(),
                              "im": self.samples.imag.ravel().tolist()}}


def _symbol_from_dict(data: dict, d: int):
    if "fourier" in data:
        terms = data["fourier"]
        freqs = np.array([t["freq"] for t in terms], dtype=np.int64).reshape(len(terms), d)
        coeffs = np.array([complex(t.get("re", 0.0), t.get("im", 0.0)) for t in terms])
        return FourierSymbol(freqs, coeffs)
    if "tabulated" in data:
        tab = data["tabulated"]
        vals = np.array(tab["re"], dtype=float) + 1j * np.array(tab.get("im", [0.0] * len(tab["re"])))
        return TabulatedSymbol(vals.reshape(tab["shape"]))
    raise ValueError("symbol must have a 'fourier' or 'tabulated' entry")


@dataclass(frozen=True, eq=False)
class SymbolSet:
    """The data ``(Gamma, Lambda, gamma_1..gamma_N, psi_1..psi_N)`` of a translation-multiplication operator.

    ``shifts`` are integer coordinates in the Gamma basis.
    """

    gamma_lattice: Lattice
    period_lattice: Lattice
    shifts: np.ndarray
    symbols: tuple

    def __post_init__(self):
        sh = np.atleast_2d(np.asarray(self.shifts, dtype=np.int64))
        if sh.shape[0] == 1 and self.gamma_lattice.dim == 1 and sh.shape[1] > 1:
            sh = sh.T
        d = self.gamma_lattice.dim
        if self.period_lattice.dim != d or sh.shape[1] != d:
            raise ValueError("Gamma, Lambda and the shifts must share one dimension")
        if len({tuple(s) for s in sh}) != len(sh):
            raise ValueError("shifts must be pairwise distinct")
        if len(self.symbols) != len(sh):
            raise ValueError("one symbol per shift expected")
        object.__setattr__(self, "shifts", sh)
        object.__setattr__(self, "symbols", tuple(self.symbols))

    @property
    def d(self) -> int:
        return self.gamma_lattice.dim

    @property
    def N(self) -> int:
        return len(self.symbols)

    def evaluate(self, k: int, t) -> np.ndarray:
        """``psi_k`` at ambient points ``t`` of shape (m, d)."""
        t = np.atleast_2d(np.asarray(t, dtype=float))
        return self.symbols[k].eval_coords(self.period_lattice.coordinates(t))

    def to_dict(self) -> dict:
        return {"gamma_basis": self.gamma_lattice.basis.T.tolist(),
                "lambda_basis": self.period_lattice.basis.T.tolist(),
                "shifts": self.shifts.tolist(),
                "symbols": [s.to_dict() for s in self.symbols]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "SymbolSet":
        gamma = Lattice(np.atleast_2d(np.asarray(data["gamma_basis"], dtype=float)).T)
        lam = Lattice(np.atleast_2d(np.asarray(data["lambda_basis"], dtype=float)).T)
        d = gamma.dim
        shifts = np.asarray(data["shifts"], dtype=np.int64).reshape(-1, d)
        symbols = [_symbol_from_dict(s, d) for s in data["symbols"]]
        return cls(gamma, lam, shifts, tuple(symbols))

    @classmethod
    def from_json(cls, text: str) -> "SymbolSet":
        return cls.from_dict(json.loads(text))


def character_symbols(gamma: Lattice, period: Lattice, terms) -> SymbolSet:
    """SymbolSet from ``(shift, [(freq, coeff), ...])`` pairs, grouping characters by shift."""
    d = gamma.dim
    shifts, symbols = [], []
    for shift, chars in terms:
        shifts.append(np.atleast_1d(shift))
        freqs = np.array([np.atleast_1d(f) for f, _ in chars], dtype=np.int64).reshape(-1, d)
        symbols.append(FourierSymbol(freqs, [c for _, c in chars]))
    return SymbolSet(gamma, period, np.array(shifts), tuple(symbols))


def random_symbolset(rng: np.random.Generator, shifts, *, gamma: Lattice | None = None,
                     period: Lattice | None = None, n_freq: int = 3, max_freq: int = 2,
                     dominant: float = 2.0) -> SymbolSet:
    """Random trigonometric-polynomial symbols on the given shift set.

    Each symbol gets a constant term of modulus about ``dominant`` plus
    ``n_freq`` random unit-scale characters, so most draws are bounded away
    from zero.  Callers still certify.
    """
    shifts = np.atleast_2d(np.asarray(shifts, dtype=np.int64))
    if shifts.shape[0] == 1 and shifts.shape[1] > 1 and (gamma is None or gamma.dim == 1):
        shifts = shifts.T
    d = shifts.shape[1]
    gamma = gamma or Lattice.standard(d)
    period = period or Lattice.standard(d)
    symbols = []
    for _ in shifts:
        freqs = rng.integers(-max_freq, max_freq + 1, size=(n_freq, d))
        freqs = np.vstack([np.zeros((1, d), dtype=np.int64), freqs])
        coeffs = rng.normal(size=n_freq + 1) + 1j * rng.normal(size=n_freq + 1)
        coeffs[1:] *= 0.5 / np.sqrt(n_freq)
        coeffs[0] = dominant * np.exp(2j * np.pi * rng.random())
        symbols.append(FourierSymbol(freqs, coeffs))
    return SymbolSet(gamma, period, shifts, tuple(symbols))


# ---------------------------------------------------------------- boxes

@dataclass(frozen=True)
class Box:
    """Integer box ``prod_i [lo_i, hi_i]`` (inclusive); points are listed in C order."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(int(v) for v in np.atleast_1d(self.lo))
        hi = tuple(int(v) for v in np.atleast_1d(self.hi))
        if len(lo) != len(hi):
            raise ValueError("lo and hi differ in length")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def centered(cls, R: int, d: int = 1) -> "Box":
        return cls((-R,) * d, (R,) * d)

    @property
    def d(self) -> int:
        return len(self.lo)

    @property
    def shape(self) -> tuple:
        return tuple(max(h - l + 1, 0) for l, h in zip(self.lo, self.hi))

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def is_empty(self) -> bool:
        return self.size == 0

    def points(self) -> np.ndarray:
        if self.is_empty():
            return np.zeros((0, self.d), dtype=np.int64)
        axes = [np.arange(l, h + 1) for l, h in zip(self.lo, self.hi)]
        grid = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in grid], axis=1).astype(np.int64)

    def index(self, pts) -> np.ndarray:
        """Flat C-order index of integer points inside the box."""
        pts = np.atleast_2d(pts) - np.array(self.lo)
        return np.ravel_multi_index(tuple(pts.T), self.shape)

    def contains(self, pts) -> np.ndarray:
        pts = np.atleast_2d(pts)
        return np.all((pts >= np.array(self.lo)) & (pts <= np.array(self.hi)), axis=1)

    def shifted(self, t) -> "Box":
        t = np.atleast_1d(t)
        return Box(tuple(np.array(self.lo) + t), tuple(np.array(self.hi) + t))


def _as_box(box, d: int) -> Box:
    if isinstance(box, Box):
        return box
    if isinstance(box, (int, np.integer)):
        return Box.centered(int(box), d)
    lo, hi = box
    return Box(lo, hi)


# ---------------------------------------------------------------- fibers

@dataclass(frozen=True, eq=False)
class FiberOperator:
    """``S_x`` on the Gamma-orbit of ``base_point``; ``coefficients(k, g) = psi_k(x + Gamma g)``."""

    symbolset: SymbolSet
    base_point: np.ndarray

    def coefficients(self, k: int, gammas) -> np.ndarray:
        g = np.atleast_2d(np.asarray(gammas, dtype=float))
        pts = self.base_point[None, :] + self.symbolset.gamma_lattice.embed(g)
        return self.symbolset.evaluate(k, pts)

    def table(self, gammas) -> np.ndarray:
        """Coefficient table of shape (N, m) on the orbit sample ``gammas``."""
        return np.stack([self.coefficients(k, gammas) for k in range(self.symbolset.N)])


def fiberize(S: SymbolSet, x) -> FiberOperator:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (S.d,):
        raise ValueError(f"base point must have length {S.d}")
    return FiberOperator(S, reduce_mod(x, S.period_lattice))


def certify_nonvanishing(S: SymbolSet, x, box, floor: float) -> bool:
    """True iff ``min_k min_{g in box} |psi_k(x + g)| >= floor``."""
    if floor <= 0:
        raise ValueError("floor must be positive")
    F = fiberize(S, x)
    pts = _as_box(box, S.d).points()
    if len(pts) == 0:
        return True
    return bool(np.min(np.abs(F.table(pts))) >= floor)


@dataclass(frozen=True, eq=False)
class RectTruncation:
    """Fully supported equations of ``S_x`` over a box of unknowns."""

    box: Box
    rows: Box
    matrix: np.ndarray


def row_box(S: SymbolSet, box: Box) -> Box:
    """Sub-box of ``g`` with ``g + g_k`` in ``box`` for every shift."""
    lo = np.array(box.lo) - S.shifts.min(axis=0)
    hi = np.array(box.hi) - S.shifts.max(axis=0)
    return Box(tuple(lo), tuple(hi))


def truncate_rect(F: FiberOperator, box) -> RectTruncation:
    S = F.symbolset
    box = _as_box(box, S.d)
    if box.is_empty():
        raise ValueError("empty box")
    rows = row_box(S, box)
    if rows.is_empty():
        raise ValueError(f"box {box.lo}..{box.hi} too small for the shift spread; no fully supported rows")
    r_pts = rows.points()
    M = np.zeros((rows.size, box.size), dtype=complex)
    r_idx = np.arange(rows.size)
    for k in range(S.N):
        cols = box.index(r_pts + S.shifts[k])
        M[r_idx, cols] = F.coefficients(k, r_pts)
    return RectTruncation(box, rows, M)


def singular_values(T: RectTruncation) -> np.ndarray:
    return scipy.linalg.svd(T.matrix, compute_uv=False)


def kernel_dim(T: RectTruncation, tol: float = SVD_TOL) -> int:
    """``|box| - numerical rank``, rank counted against ``tol * s_max`` from a full SVD."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    s = singular_values(T)
    rank = int(np.sum(s >= tol * s[0])) if s.size and s[0] > 0 else 0
    return T.box.size - rank


def kernel_basis(T: RectTruncation, tol: float = SVD_TOL) -> np.ndarray:
    """Orthonormal kernel basis (columns) from the full SVD."""
    _, s, vh = scipy.linalg.svd(T.matrix, full_matrices=True)
    rank = int(np.sum(s >= tol * s[0])) if s.size and s[0] > 0 else 0
    return vh[rank:].conj().T


def _sorted_d1(S: SymbolSet):
    if S.d != 1:
        raise ValueError("one-dimensional symbol set required")
    order = np.argsort(S.shifts[:, 0])
    return S.shifts[order, 0], order


def propagate_recurrence_d1(F: FiberOperator, window, box, floor: float = 1e-12) -> np.ndarray:
    """Extend window values on ``[m_1, m_N - 1]`` to the unique kernel sequence on ``[-R, R]``.

    Forward steps solve the equation at ``n`` for ``u(n + m_N)``; backward
    steps solve it for ``u(n + m_1)``.  Only fully supported equations are
    used, so the result is exactly annihilated by ``truncate_rect``.
    """
    S = F.symbolset
    m, order = _sorted_d1(S)
    b = _as_box(box, 1)
    lo, hi = b.lo[0], b.hi[0]
    m1, mN = int(m[0]), int(m[-1])
    window = np.asarray(window, dtype=complex)
    if window.shape != (mN - m1,):
        raise ValueError(f"window must hold {mN - m1} values on [{m1}, {mN - 1}]")
    if m1 < lo or mN - 1 > hi:
        raise ValueError("window does not fit inside the box")

    u = np.zeros(hi - lo + 1, dtype=complex)
    u[m1 - lo:mN - lo] = window
    ks = list(order)

    def coeffs(n):
        c = np.array([F.coefficients(k, [n])[0] for k in ks])
        return c

    for n in range(0, hi - mN + 1):
        c = coeffs(n)
        if abs(c[-1]) < floor:
            raise VanishingSymbolError(f"leading coefficient vanishes at orbit point n={n} (|psi|={abs(c[-1]):.3g})")
        u[n + mN - lo] = -np.dot(c[:-1], u[n + m[:-1] - lo]) / c[-1]
    for n in range(-1, lo - m1 - 1, -1):
        c = coeffs(n)
        if abs(c[0]) < floor:
            raise VanishingSymbolError(f"trailing coefficient vanishes at orbit point n={n} (|psi|={abs(c[0]):.3g})")
        u[n + m1 - lo] = -np.dot(c[1:], u[n + m[1:] - lo]) / c[0]
    return u


def recurrence_basis_d1(F: FiberOperator, box, floor: float = 1e-12) -> np.ndarray:
    """Columns: the propagated sequences of each standard-basis window."""
    m, _ = _sorted_d1(F.symbolset)
    w = int(m[-1] - m[0])
    return np.column_stack([propagate_recurrence_d1(F, np.eye(w)[j], box, floor) for j in range(w)])


def check_conjugation(S: SymbolSet, x, gamma0, box) -> float:
    """Max entry deviation between the truncations of ``T S_x T^*`` and ``S_{x - gamma0}``.

    ``(T S_x T^*)[g, g'] = S_x[g - gamma0, g' - gamma0]``, so the truncation
    of ``S_x`` on ``box`` is compared entrywise with that of
    ``S_{x - gamma0}`` on ``box + gamma0``.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    g0 = np.atleast_1d(np.asarray(gamma0, dtype=np.int64))
    box = _as_box(box, S.d)
    left = truncate_rect(fiberize(S, x), box).matrix
    x_shift = x - S.gamma_lattice.embed(g0)
    right = truncate_rect(fiberize(S, x_shift), box.shifted(g0)).matrix
    return float(np.max(np.abs(left - right))) if left.size else 0.0


def window_solution_mass_profile(F: FiberOperator, box, inner_fraction: float, tol: float = SVD_TOL) -> float:
    """Largest fraction of l2 mass a unit kernel vector can put on the inner sub-box.

    The inner sub-box is ``|n| <= floor(inner_fraction * R)``.  Near 1 means
    some kernel vector of the window looks decaying; ``inner_fraction == 0``
    returns 0.
    """
    if F.symbolset.d != 1:
        raise ValueError("mass profile is implemented for d = 1")
    if not 0 <= inner_fraction < 1:
        raise ValueError("inner_fraction must lie in [0, 1)")
    b = _as_box(box, 1)
    if inner_fraction == 0:
        return 0.0
    T = truncate_rect(F, b)
    Q = kernel_basis(T, tol)
    if Q.shape[1] == 0:
        raise ValueError("trivial kernel: nothing to normalize")
    R = (b.hi[0] - b.lo[0]) // 2
    center = (b.hi[0] + b.lo[0]) // 2
    half = int(np.floor(inner_fraction * R))
    n = np.arange(b.lo[0], b.hi[0] + 1)
    inner = np.abs(n - center) <= half
    Qi = Q[inner]
    # Q is orthonormal, so the full-window Gram is the identity
    G_inner = Qi.conj().T @ Qi
    return float(np.clip(scipy.linalg.eigvalsh(G_inner)[-1], 0.0, 1.0))


def lp_norm(u, p: float) -> float:
    """``(sum |u|^p)^(1/p)`` for ``0 < p``; a quasi-norm below 1."""
    if p <= 0:
        raise ValueError("p must be positive")
    a = np.abs(np.asarray(u))
    return float(np.sum(a ** p) ** (1.0 / p))


def kernel_sweep(S: SymbolSet, xs: Sequence, Rs: Sequence[int], tol: float = SVD_TOL):
    """Rows ``(x..., R, kernel_dim, smin, smax)``; ``smin`` is the smallest retained singular value."""
    rows = []
    for x in xs:
        F = fiberize(S, x)
        for R in Rs:
            T = truncate_rect(F, Box.centered(int(R), S.d))
            s = singular_values(T)
            kept = s[s >= tol * s[0]]
            rows.append((*np.atleast_1d(x).tolist(), int(R), T.box.size - kept.size,
                         float(kept[-1]) if kept.size else 0.0, float(s[0])))
    return rows


def dual_frequencies(S: SymbolSet, k: int) -> np.ndarray:
    """Ambient frequencies of a Fourier symbol (rows), via the dual of Lambda."""
    sym = S.symbols[k]
    if not isinstance(sym, FourierSymbol):
        raise TypeError("only Fourier symbols have frequencies")
    return dual_lattice(S.period_lattice).embed(sym.freqs)
