"""Almost Mathieu operator ``u(n+1) + u(n-1) + 2 lam cos 2pi(theta + n alpha) u(n)``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

BAND_MERGE_TOL = 1e-9
K_RESOLUTION = 512


@dataclass(frozen=True)
class AMParams:
    lam: float
    alpha: float
    theta: float = 0.0

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("coupling lam must be positive")


@dataclass(frozen=True)
class BandList:
    bands: tuple  # sorted, disjoint ((lower, upper), ...)

    def __iter__(self):
        return iter(self.bands)

    def __len__(self):
        return len(self.bands)

    def distance(self, E: float) -> float:
        """Distance from ``E`` to the union of bands."""
        return min(max(lo - E, E - hi, 0.0) for lo, hi in self.bands)

    @property
    def lower(self) -> float:
        return self.bands[0][0]

    @property
    def upper(self) -> float:
        return self.bands[-1][1]


def merge_intervals(intervals, tol: float = BAND_MERGE_TOL) -> BandList:
    merged = []
    for lo, hi in sorted((float(a), float(b)) for a, b in intervals):
        if merged and lo <= merged[-1][1] + tol:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return BandList(tuple(merged))


def potential(p: AMParams, n) -> np.ndarray:
    return 2 * p.lam * np.cos(2 * np.pi * (p.theta + np.asarray(n) * p.alpha))


def build_truncation(p: AMParams, R: int) -> np.ndarray:
    """Dirichlet restriction of the operator to ``[-R, R]``; row ``i`` is site ``n = i - R``."""
    if R < 1:
        raise ValueError("R must be at least 1")
    n = np.arange(-R, R + 1)
    size = 2 * R + 1
    M = np.diag(potential(p, n))
    M[np.arange(size - 1), np.arange(1, size)] = 1.0
    M[np.arange(1, size), np.arange(size - 1)] = 1.0
    return M


def spectrum(M, sym_tol: float = 1e-12) -> np.ndarray:
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("square matrix expected")
    if np.max(np.abs(M - M.conj().T), initial=0.0) > sym_tol:
        raise ValueError("matrix is not symmetric")
    return scipy.linalg.eigvalsh(M)


def bloch_matrix(p: AMParams, q: int, k: float) -> np.ndarray:
    """``q x q`` Bloch matrix for ``u(n + q) = exp(ik) u(n)``."""
    H = np.diag(potential(p, np.arange(q))).astype(complex)
    for n in range(q):
        m = (n + 1) % q
        phase = np.exp(1j * k) if n + 1 == q else 1.0
        H[n, m] += phase          # u(n+1) term
        H[m, n] += np.conj(phase)  # u(m-1) term
    return H


def bloch_bands(lam: float, p: int, q: int, theta: float = 0.0, k_resolution: int = K_RESOLUTION) -> BandList:
    """Spectrum of the ``alpha = p/q`` operator as a union of at most ``q`` bands."""
    if q < 1:
        raise ValueError("q must be positive")
    if math.gcd(p, q) != 1:
        raise ValueError(f"p={p} and q={q} are not coprime")
    params = AMParams(lam, p / q, theta)
    ks = 2 * np.pi * np.arange(k_resolution) / k_resolution
    evs = np.array([scipy.linalg.eigvalsh(bloch_matrix(params, q, k)) for k in ks])
    return merge_intervals(zip(evs.min(axis=0), evs.max(axis=0)))


def butterfly(lam: float, q_max: int, k_resolution: int = K_RESOLUTION, workers: int = 1):
    """``[(p, q, BandList)]`` for coprime ``1 <= p < q <= q_max`` at ``theta = 0``."""
    if q_max < 2:
        raise ValueError("q_max must be at least 2")
    pairs = [(p, q) for q in range(2, q_max + 1) for p in range(1, q) if math.gcd(p, q) == 1]
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(workers) as ex:
            bands = list(ex.map(lambda pq: bloch_bands(lam, pq[0], pq[1], 0.0, k_resolution), pairs))
    else:
        bands = [bloch_bands(lam, p, q, 0.0, k_resolution) for p, q in pairs]
    return [(p, q, b) for (p, q), b in zip(pairs, bands)]


# atoms of the Z-Gabor system carried by the eigenvalue equation: (translation, modulation)
def mathieu_atoms(alpha: float):
    return [(-1, 0.0), (1, 0.0), (0, alpha), (0, -alpha), (0, 0.0)]


def zgabor_apply(u: np.ndarray, n: np.ndarray, atoms, coeffs, rows: np.ndarray) -> np.ndarray:
    """``sum_a c_a M_{y_a} T_{x_a} u`` on the sites ``rows``; ``(M_y T_x u)(n) = e^{2 pi i y n} u(n - x)``."""
    pos = {int(v): i for i, v in enumerate(n)}
    out = np.zeros(len(rows), dtype=complex)
    for (x, y), c in zip(atoms, coeffs):
        idx = np.array([pos[int(r - x)] for r in rows])
        out += c * np.exp(2j * np.pi * y * rows) * u[idx]
    return out


def dependence_residual(u, p: AMParams, E: float, norm_tol: float = 1e-8) -> float:
    """Norm of the five-atom combination from ``H u = E u`` on the interior ``[-R+1, R-1]``."""
    u = np.asarray(u, dtype=complex)
    if u.ndim != 1 or u.size % 2 == 0:
        raise ValueError("u must live on a symmetric window [-R, R]")
    R = (u.size - 1) // 2
    if R < 2:
        raise ValueError("window radius must be at least 2")
    if abs(np.linalg.norm(u) - 1.0) > norm_tol:
        raise ValueError("u must have unit norm")
    n = np.arange(-R, R + 1)
    rows = np.arange(-R + 1, R)
    z = p.lam * np.exp(2j * np.pi * p.theta)
    coeffs = [1.0, 1.0, z, np.conj(z), -E]
    return float(np.linalg.norm(zgabor_apply(u, n, mathieu_atoms(p.alpha), coeffs, rows)))


def edge_mass(v: np.ndarray, fraction: float = 0.05) -> float:
    """Share of ``|v|^2`` in the outer ``fraction`` of the window (both ends together)."""
    size = len(v)
    w = max(1, int(round(fraction * size / 2)))
    a = np.abs(v) ** 2
    return float((a[:w].sum() + a[-w:].sum()) / a.sum())


def ipr(v: np.ndarray) -> float:
    a = np.abs(v) ** 2
    a = a / a.sum()
    return float(np.sum(a * a))


def eigen_sweep(p: AMParams, Rs):
    """Rows ``(R, index, eigenvalue, ipr, residual)``; ``ipr`` is an exploratory localization column."""
    rows = []
    for R in Rs:
        M = build_truncation(p, int(R))
        w, V = scipy.linalg.eigh(M)
        for i, (E, v) in enumerate(zip(w, V.T)):
            rows.append((int(R), i, float(E), ipr(v), dependence_residual(v, p, float(E))))
    return rows
