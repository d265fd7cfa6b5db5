"""Lattice algebra in R^n.

A lattice is stored through a real basis matrix whose *columns* are the
generators.  Integer bases get exact membership tests through rational
arithmetic; everything else goes through double precision with the
tolerances below.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

DEFAULT_MEMBER_TOL = 1e-9
MAX_CONDITION = 1e8


@dataclass(frozen=True, eq=False)
class Lattice:
    """Full-rank lattice ``basis @ Z^n``.

    Parameters
    ----------
    basis : array_like, shape (n, n)
        Generators as columns.
    """

    basis: np.ndarray
    _inv: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        b = np.array(self.basis, dtype=float)
        if b.ndim == 0:
            b = b.reshape(1, 1)
        if b.ndim != 2 or b.shape[0] != b.shape[1]:
            raise ValueError(f"basis must be square, got shape {b.shape}")
        if not np.all(np.isfinite(b)):
            raise ValueError("basis has non-finite entries")
        if abs(np.linalg.det(b)) == 0.0:
            raise ValueError("singular basis")
        cond = np.linalg.cond(b)
        if not np.isfinite(cond) or cond > MAX_CONDITION:
            raise ValueError(f"basis condition number {cond:.3g} exceeds {MAX_CONDITION:g}")
        b.setflags(write=False)
        inv = np.linalg.inv(b)
        inv.setflags(write=False)
        object.__setattr__(self, "basis", b)
        object.__setattr__(self, "_inv", inv)

    @classmethod
    def from_generators(cls, *generators) -> "Lattice":
        """Build from generator vectors, e.g. ``Lattice.from_generators((2, 0), (1, 3))``."""
        return cls(np.column_stack([np.atleast_1d(np.asarray(g, dtype=float)) for g in generators]))

    @classmethod
    def standard(cls, n: int, scale: float = 1.0) -> "Lattice":
        return cls(scale * np.eye(n))

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def is_integral(self) -> bool:
        return bool(np.all(self.basis == np.round(self.basis)))

    def embed(self, coords) -> np.ndarray:
        """Map integer coordinates (shape (n,) or (m, n)) into R^n."""
        c = np.asarray(coords, dtype=float)
        return c @ self.basis.T

    def coordinates(self, x) -> np.ndarray:
        """Real coordinates of ``x`` (shape (n,) or (m, n)) in this basis."""
        return np.asarray(x, dtype=float) @ self._inv.T

    def generators(self) -> list[np.ndarray]:
        return [self.basis[:, j].copy() for j in range(self.dim)]

    def to_json(self) -> str:
        return json.dumps({"dim": self.dim, "basis": [list(map(float, col)) for col in self.basis.T]})

    @classmethod
    def from_json(cls, text: str) -> "Lattice":
        return cls.from_dict(json.loads(text))

    @classmethod
    def from_dict(cls, data: dict) -> "Lattice":
        cols = np.asarray(data["basis"], dtype=float)
        if cols.ndim == 1:
            cols = cols.reshape(1, 1)
        lat = cls(cols.T)
        if "dim" in data and int(data["dim"]) != lat.dim:
            raise ValueError(f"dim {data['dim']} does not match basis of size {lat.dim}")
        return lat

    def __repr__(self):
        return f"Lattice(basis={self.basis.tolist()})"


def covolume(L: Lattice) -> float:
    return float(abs(np.linalg.det(L.basis)))


def dual_lattice(L: Lattice) -> Lattice:
    """Annihilator lattice: vectors pairing integrally with every vector of ``L``."""
    return Lattice(np.linalg.inv(L.basis).T)


def reduce_mod(x, L: Lattice) -> np.ndarray:
    """Representative of ``x`` in the half-open fundamental cell ``basis @ [0,1)^n``."""
    c = L.coordinates(np.atleast_1d(np.asarray(x, dtype=float)))
    frac = c - np.floor(c)
    # floor of a tiny negative number gives frac == 1.0 in floating point
    frac[frac >= 1.0] = 0.0
    return L.embed(frac)


def _exact_solve(basis, x):
    """Solve ``basis @ c = x`` over the rationals by Gauss-Jordan elimination."""
    n = len(x)
    m = [[Fraction(int(basis[i][j])) for j in range(n)] + [Fraction(x[i])] for i in range(n)]
    for col in range(n):
        piv = next(r for r in range(col, n) if m[r][col] != 0)
        m[col], m[piv] = m[piv], m[col]
        p = m[col][col]
        m[col] = [v / p for v in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [a - f * b for a, b in zip(m[r], m[col])]
    return [m[i][n] for i in range(n)]


def member(x, L: Lattice, tol: float = DEFAULT_MEMBER_TOL) -> bool:
    """True iff the basis coordinates of ``x`` are within ``tol`` (sup norm) of an integer vector."""
    if tol < 0:
        raise ValueError("tol must be non-negative")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (L.dim,):
        raise ValueError(f"point of shape {x.shape} for a lattice of dim {L.dim}")
    if L.is_integral and np.all(x == np.round(x)):
        coords = _exact_solve(L.basis.astype(int).tolist(), [int(v) for v in x])
        return all(c.denominator == 1 for c in coords)
    c = L.coordinates(x)
    return bool(np.max(np.abs(c - np.round(c))) <= tol)


def gauss_reduce_pair(b1, b2, max_iter: int = 10_000):
    """Lagrange-Gauss reduction of two independent vectors (any ambient dimension).

    Returns ``(b1, b2)`` with ``|b1| <= |b2|`` and ``|<b1, b2>| <= |b1|^2 / 2``.
    """
    b1 = np.asarray(b1, dtype=float)
    b2 = np.asarray(b2, dtype=float)
    if b1 @ b1 > b2 @ b2:
        b1, b2 = b2, b1
    for _ in range(max_iter):
        mu = round(float(b1 @ b2) / float(b1 @ b1))
        b2 = b2 - mu * b1
        if b2 @ b2 >= b1 @ b1:
            return b1, b2
        b1, b2 = b2, b1
    raise RuntimeError(f"Gauss reduction did not terminate after {max_iter} steps")


def lagrange_reduce(L: Lattice) -> Lattice:
    if L.dim != 2:
        raise ValueError("lagrange_reduce needs a 2-dimensional lattice")
    b1, b2 = gauss_reduce_pair(L.basis[:, 0], L.basis[:, 1])
    return Lattice(np.column_stack([b1, b2]))


def same_lattice(L1: Lattice, L2: Lattice, tol: float = DEFAULT_MEMBER_TOL) -> bool:
    """Two-way generator membership."""
    return (all(member(g, L2, tol) for g in L1.generators())
            and all(member(g, L1, tol) for g in L2.generators()))
