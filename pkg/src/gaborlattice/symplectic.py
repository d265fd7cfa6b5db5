"""Phase-space symmetries: the symplectic form, Sp(2d) checks, product reduction."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np

from .lattice import Lattice, covolume, gauss_reduce_pair

ISOTROPY_TOL = 1e-9


@dataclass(frozen=True)
class PhasePoint:
    """A point ``(x, y)`` of R^d x R^d: translation ``x``, modulation ``y``."""

    x: tuple
    y: tuple

    def __post_init__(self):
        x = tuple(float(v) for v in np.atleast_1d(self.x))
        y = tuple(float(v) for v in np.atleast_1d(self.y))
        if len(x) != len(y):
            raise ValueError("x and y must have the same length")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def d(self) -> int:
        return len(self.x)

    def vector(self) -> np.ndarray:
        return np.array(self.x + self.y)

    @classmethod
    def from_vector(cls, v) -> "PhasePoint":
        v = np.asarray(v, dtype=float)
        d = v.shape[0] // 2
        return cls(tuple(v[:d]), tuple(v[d:]))


def standard_form(d: int) -> np.ndarray:
    """The matrix ``J = [[0, I], [-I, 0]]``."""
    J = np.zeros((2 * d, 2 * d))
    J[:d, d:] = np.eye(d)
    J[d:, :d] = -np.eye(d)
    return J


def symplectic_form(v, w) -> float:
    """``[v, w] = x_v . y_w - x_w . y_v``."""
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    if v.shape != w.shape or v.ndim != 1:
        raise ValueError("symplectic_form needs two vectors of the same length")
    if v.shape[0] % 2:
        raise ValueError(f"odd dimension {v.shape[0]} has no symplectic form")
    d = v.shape[0] // 2
    return float(v[:d] @ w[d:] - w[:d] @ v[d:])


def is_symplectic(sigma, tol: float = 1e-9) -> bool:
    s = np.asarray(sigma, dtype=float)
    if s.ndim != 2 or s.shape[0] != s.shape[1] or s.shape[0] % 2:
        raise ValueError(f"expected a square matrix of even size, got {s.shape}")
    J = standard_form(s.shape[0] // 2)
    return bool(np.max(np.abs(s.T @ J @ s - J)) <= tol)


@dataclass(frozen=True, eq=False)
class SymplecticMap:
    """Linear part of an affine-symplectic map; translations travel separately."""

    matrix: np.ndarray
    tol: float = 1e-9

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if not is_symplectic(m, self.tol):
            raise ValueError("matrix is not symplectic")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def d(self) -> int:
        return self.matrix.shape[0] // 2

    def __call__(self, v) -> np.ndarray:
        return self.matrix @ np.asarray(v, dtype=float)


def reduce_to_product_d1(L: Lattice):
    """Find ``sigma`` in SL(2, R) and ``alpha, beta > 0`` with ``sigma L = alpha Z x beta Z``.

    The shortest lattice vector fixes ``alpha``; ``beta = covolume / alpha``.
    ``sigma`` sends the input basis (second generator negated when the basis
    is negatively oriented) onto ``(alpha, 0), (0, beta)``.  A diagonal input
    basis is already a product and gets the identity.

    Returns
    -------
    sigma : SymplecticMap
    alpha, beta : float
    """
    if L.dim != 2:
        raise ValueError("reduce_to_product_d1 needs a lattice in R^2")
    B = L.basis.copy()
    if B[0, 1] == 0.0 and B[1, 0] == 0.0:
        return SymplecticMap(np.eye(2)), float(abs(B[0, 0])), float(abs(B[1, 1]))

    vol = covolume(L)
    b1, _ = gauss_reduce_pair(B[:, 0], B[:, 1])
    alpha = float(np.hypot(*b1))
    beta = vol / alpha
    if np.linalg.det(B) < 0:
        B[:, 1] *= -1
    sigma = np.diag([alpha, beta]) @ np.linalg.inv(B)
    return SymplecticMap(sigma), alpha, beta


def _box_vectors(n: int, bound: int) -> np.ndarray:
    """All nonzero integer vectors of the box ``[-bound, bound]^n`` in lexicographic order."""
    rng = range(-bound, bound + 1)
    vecs = np.array(list(itertools.product(rng, repeat=n)), dtype=np.int64)
    return vecs[np.any(vecs != 0, axis=1)]


_PLUCKER_IDX = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
# det[u1 u2 u3 u4] = p(u1,u2)^T H p(u3,u4) for Plucker coordinates p
_HODGE = np.zeros((6, 6), dtype=np.int64)
for (a, b), (c, e), sign in [((0, 1), (2, 3), 1), ((0, 2), (1, 3), -1), ((0, 3), (1, 2), 1),
                             ((1, 2), (0, 3), 1), ((1, 3), (0, 2), -1), ((2, 3), (0, 1), 1)]:
    _HODGE[_PLUCKER_IDX.index((a, b)), _PLUCKER_IDX.index((c, e))] = sign


def _plucker(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.stack([u[..., i] * v[..., j] - u[..., j] * v[..., i] for i, j in _PLUCKER_IDX], axis=-1)


def product_basis_search(L: Lattice, coeff_bound: int = 3, tol: float = ISOTROPY_TOL):
    """Bounded search for a Z-basis ``v1..v4`` of ``L`` with ``[v1,v2] = [v3,v4] = 0``.

    Candidate unimodular matrices have integer entries in
    ``[-coeff_bound, coeff_bound]``; columns are enumerated lexicographically
    and the lexicographically first qualifying ``(u1, u2, u3, u4)`` is kept.
    The input basis is tried first.  ``None`` only means nothing was found in
    the box.

    Returns
    -------
    ndarray of shape (4, 4) with the new generators as columns, or None.
    """
    if coeff_bound <= 0:
        raise ValueError("coeff_bound must be a positive integer")
    if L.dim != 4:
        raise ValueError("product_basis_search needs a lattice in R^4")
    B = L.basis
    W = B.T @ standard_form(2) @ B
    if abs(W[0, 1]) <= tol and abs(W[2, 3]) <= tol:
        return B.copy()

    vecs = _box_vectors(4, coeff_bound)
    forms = vecs.astype(float) @ W @ vecs.T.astype(float)
    ii, jj = np.nonzero(np.abs(forms) <= tol)
    # (ii, jj) come out row-major, i.e. already in lexicographic pair order
    pl = _plucker(vecs[ii], vecs[jj])
    keep = np.any(pl != 0, axis=1)
    ii, jj, pl = ii[keep], jj[keep], pl[keep]
    if len(ii) == 0:
        return None
    paired = pl @ _HODGE
    for a in range(len(ii)):
        dets = pl @ paired[a]
        hits = np.flatnonzero(np.abs(dets) == 1)
        if hits.size:
            b = hits[0]
            U = np.column_stack([vecs[ii[a]], vecs[jj[a]], vecs[ii[b]], vecs[jj[b]]])
            return B @ U
    return None


def apply_to_atoms(sigma, shift, atoms):
    """``[sigma a + shift for a in atoms]``, order and multiplicity preserved."""
    if not isinstance(sigma, SymplecticMap):
        sigma = SymplecticMap(sigma)
    s = np.zeros(2 * sigma.d) if shift is None else np.asarray(shift, dtype=float)
    out = []
    for a in atoms:
        if a.d != sigma.d:
            raise ValueError("atom dimension does not match the map")
        out.append(PhasePoint.from_vector(sigma(a.vector()) + s))
    return out


def atoms_to_json(atoms) -> str:
    return json.dumps([{"x": list(a.x), "y": list(a.y)} for a in atoms])


def atoms_from_json(text: str):
    return [PhasePoint(tuple(item["x"]), tuple(item["y"])) for item in json.loads(text)]


def map_to_json(sigma: SymplecticMap) -> str:
    return json.dumps(sigma.matrix.tolist())
