"""Monotone set growth on Z^d and the strip construction that makes it fill volume.

The growth map: whenever a set contains ``g + (C0 minus {g0})`` it also gets
``g + g0``.  From a codimension-one strip of width ``m`` this fills a
half-space, so strip pieces of size ~ n^(d-1) grow into sets of size ~ n^d.
"""

from __future__ import annotations

import itertools
import json
import math
from collections import deque
from dataclasses import dataclass
from functools import reduce

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .lattice import gauss_reduce_pair

MAX_POINTS = 10**8


class RegionOverflowError(RuntimeError):
    pass


def _pts(points) -> list[tuple]:
    return [tuple(int(v) for v in np.atleast_1d(p)) for p in points]


@dataclass(frozen=True)
class PropagationRule:
    C0: tuple
    gamma0: tuple

    def __post_init__(self):
        C0 = tuple(sorted(set(_pts(self.C0))))
        g0 = tuple(int(v) for v in np.atleast_1d(self.gamma0))
        if len(C0) < 2:
            raise ValueError("C0 needs at least two points")
        if len({len(c) for c in C0}) != 1:
            raise ValueError("C0 points differ in dimension")
        if g0 not in C0:
            raise ValueError("gamma0 must belong to C0")
        object.__setattr__(self, "C0", C0)
        object.__setattr__(self, "gamma0", g0)

    @property
    def d(self) -> int:
        return len(self.gamma0)

    def offsets(self) -> list[tuple]:
        """``C0 - gamma0`` without the origin: a point fires when all these offsets are present."""
        return [tuple(c - g for c, g in zip(p, self.gamma0)) for p in self.C0 if p != self.gamma0]

    @property
    def delta(self) -> float:
        pts = np.array(self.C0, dtype=float)
        return float(max(np.linalg.norm(a - b) for a in pts for b in pts))

    def to_json(self) -> str:
        return json.dumps({"C0": [list(c) for c in self.C0], "gamma0": list(self.gamma0)})

    @classmethod
    def from_dict(cls, data: dict) -> "PropagationRule":
        return cls(tuple(tuple(c) for c in data["C0"]), tuple(np.atleast_1d(data["gamma0"])))

    @classmethod
    def from_json(cls, text: str) -> "PropagationRule":
        return cls.from_dict(json.loads(text))


def _in_region(p, lo, hi) -> bool:
    return all(l <= v <= h for v, l, h in zip(p, lo, hi))


def propagate_set(rule: PropagationRule, C, region, max_points: int = MAX_POINTS) -> set:
    """Least fixpoint of the growth rule inside ``region = (lo, hi)`` (inclusive box), seeded by ``C``.

    Worklist version: a new point ``p`` can only enable targets ``t`` with
    ``p = t + o`` for some offset ``o``, so only those are re-examined.
    """
    lo, hi = (tuple(int(v) for v in np.atleast_1d(b)) for b in region)
    offs = rule.offsets()
    P = {p for p in _pts(C) if _in_region(p, lo, hi)}
    work = deque(P)
    while work:
        p = work.popleft()
        for o in offs:
            t = tuple(a - b for a, b in zip(p, o))
            if t in P or not _in_region(t, lo, hi):
                continue
            if all(tuple(a + b for a, b in zip(t, q)) in P for q in offs):
                P.add(t)
                if len(P) > max_points:
                    raise RegionOverflowError(f"propagation set exceeded {max_points} points")
                work.append(t)
    return P


def _primitive(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.int64)
    g = reduce(math.gcd, (abs(int(a)) for a in v), 0)
    return v // g if g else v


def _separates(phi, g0, pts) -> bool:
    val = int(np.dot(phi, g0))
    return all(int(np.dot(phi, c)) > val for c in pts if tuple(c) != tuple(g0))


def _outward_direction(pts: np.ndarray, g0: np.ndarray) -> np.ndarray:
    """Average unit outward normal of the hull facets at vertex ``g0``, computed in the affine hull."""
    centered = pts - pts.mean(axis=0)
    _, s, vt = np.linalg.svd(centered)
    rank = int(np.sum(s > 1e-9 * max(s[0], 1.0)))
    frame = vt[:rank]
    local = centered @ frame.T
    v_local = (g0 - pts.mean(axis=0)) @ frame.T
    if rank == 1:
        normal = np.sign(v_local)
    else:
        hull = ConvexHull(local)
        i0 = int(np.flatnonzero(np.all(pts == g0, axis=1))[0])
        normals = [eq[:-1] for simplex, eq in zip(hull.simplices, hull.equations) if i0 in simplex]
        normal = np.mean([n / np.linalg.norm(n) for n in normals], axis=0)
    return normal @ frame


def extreme_point(C0):
    """Lexicographically largest point ``g0`` of ``C0`` and a primitive integer ``phi`` minimized strictly there.

    Returns
    -------
    gamma0 : tuple of int
    phi : ndarray of int
    """
    pts = sorted(set(_pts(C0)))
    if len(pts) < 2:
        raise ValueError("C0 needs at least two points")
    g0 = pts[-1]
    return g0, separating_functional(pts, g0)


def separating_functional(C0, gamma0) -> np.ndarray:
    pts = np.array(sorted(set(_pts(C0))), dtype=np.int64)
    g0 = np.array(gamma0, dtype=np.int64)
    d = pts.shape[1]
    try:
        direction = _outward_direction(pts.astype(float), g0.astype(float))
        cand = _primitive(np.round(-direction / np.max(np.abs(direction))))
        if np.any(cand != 0) and _separates(cand, g0, pts):
            return cand
    except (QhullError, ValueError, IndexError):
        pass
    for radius in range(1, 64):
        found = []
        for v in itertools.product(range(-radius, radius + 1), repeat=d):
            if max(abs(a) for a in v) != radius:
                continue
            v = _primitive(v)
            if _separates(v, g0, pts):
                found.append(v)
        if found:
            return min(found, key=lambda v: (int(v @ v), tuple(-v)))
    raise ValueError(f"{tuple(gamma0)} is not an extreme point of C0")


def _complete_unimodular(phi) -> np.ndarray:
    """Unimodular ``U`` with ``phi @ U = e_1``: column 0 has ``phi = 1``, the rest span ``ker phi``."""
    phi = np.asarray(phi, dtype=object)
    d = len(phi)
    U = np.eye(d, dtype=object)
    row = phi.copy()
    # column operations driving row to (1, 0, ..., 0) by a Euclid cascade
    while True:
        nz = [i for i in range(d) if row[i] != 0]
        if len(nz) == 1:
            break
        piv = min(nz, key=lambda i: abs(row[i]))
        for j in nz:
            if j != piv:
                q = row[j] // row[piv]
                row[j] -= q * row[piv]
                U[:, j] -= q * U[:, piv]
    piv = nz[0]
    if row[piv] < 0:
        row[piv] = -row[piv]
        U[:, piv] = -U[:, piv]
    if row[piv] != 1:
        raise ValueError("phi is not primitive")
    order = [piv] + [j for j in range(d) if j != piv]
    return np.array(U[:, order], dtype=np.int64)


@dataclass(frozen=True, eq=False)
class StripConstruction:
    phi: np.ndarray
    K_basis: np.ndarray   # rows
    x: np.ndarray
    m: int
    delta: float

    def layer(self, p) -> int:
        return int(np.dot(self.phi, p))


def build_strip(rule: PropagationRule) -> StripConstruction:
    """Strip data for ``rule``; ``rule.gamma0`` must be an extreme point of ``C0``."""
    phi = separating_functional(rule.C0, rule.gamma0)
    offs = np.array(rule.offsets(), dtype=np.int64)
    vals = offs @ phi
    if np.any(vals <= 0):
        raise ValueError("functional does not separate gamma0")
    U = _complete_unimodular(phi)
    x = U[:, 0]
    K = U[:, 1:].T.astype(float)
    if K.shape[0] == 2:
        K = np.array(gauss_reduce_pair(K[0], K[1]))
    K = np.round(K).astype(np.int64)
    if K.shape[0]:
        # shorten x modulo K
        coef, *_ = np.linalg.lstsq(K.T.astype(float), x.astype(float), rcond=None)
        x = x - np.round(coef).astype(np.int64) @ K
    return StripConstruction(phi, K, x, int(vals.max()), rule.delta)


def _kernel_ball(strip: StripConstruction, radius: float) -> np.ndarray:
    """Points of ``K`` with Euclidean norm at most ``radius``."""
    K = strip.K_basis
    r = K.shape[0]
    if r == 0:
        return np.zeros((1, len(strip.phi)), dtype=np.int64)
    smin = np.linalg.svd(K.astype(float), compute_uv=False)[-1]
    bound = int(np.floor(radius / smin)) + 1
    axes = [np.arange(-bound, bound + 1)] * r
    coefs = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
    pts = coefs @ K
    keep = np.einsum("ij,ij->i", pts, pts) <= radius * radius + 1e-9
    return pts[keep]


def build_strip_sets(rule: PropagationRule, strip: StripConstruction, n: float) -> set:
    """``C_n = union_{j=1..m} (j x + (ball_n in K))``, translated so ``gamma0`` sits at the origin frame.

    The rule only sees ``C0 - gamma0``, so the set is returned in the same
    coordinates as the offsets: layers ``1..m`` of ``phi``.
    """
    if n <= 0:
        raise ValueError("n must be positive")
    if np.any(strip.K_basis @ strip.phi != 0) or int(strip.x @ strip.phi) != 1:
        raise ValueError("inconsistent strip construction")
    offs = np.array(rule.offsets(), dtype=np.int64)
    vals = offs @ strip.phi
    if np.any(vals < 1) or np.any(vals > strip.m):
        raise ValueError("C0 offsets do not sit in strip layers 1..m")
    disk = _kernel_ball(strip, n)
    out = set()
    for j in range(1, strip.m + 1):
        out.update(_pts(disk + j * strip.x))
    return out


@dataclass
class GrowthResult:
    n: list
    card_C: list
    card_P: list
    clipped: list
    slope_C: float
    slope_P: float


def _fit_slope(n, y) -> float:
    n = np.asarray(n, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.all(y == y[0]):
        return 0.0
    return float(np.polyfit(np.log(n), np.log(y), 1)[0])


def growth_run(rule: PropagationRule, n: float, strip: StripConstruction, region_margin: float = 10.0):
    """One point of a growth sweep: ``(|C_n|, |P(C_n)|, clipped)``."""
    C = build_strip_sets(rule, strip, n)
    half = int(math.ceil(4 * n + region_margin * strip.delta))
    lo, hi = (-half,) * rule.d, (half,) * rule.d
    P = propagate_set(rule, C, (lo, hi))
    clipped = any(v == -half or v == half for p in P for v in p)
    return len(C), len(P), clipped


def growth_exponents(rule: PropagationRule, n_list, region_margin: float = 10.0, workers: int = 1) -> GrowthResult:
    """Least-squares log-log slopes of ``|C_n|`` and ``|P(C_n)|`` against ``n``.

    Regions are boxes of half-width ``4n + region_margin * diam(C0)``.  A
    run whose fixpoint touches the region boundary is flagged as clipped.
    """
    n_list = list(n_list)
    if len(n_list) < 4:
        raise ValueError("need at least four n values")
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ValueError("n_list must be increasing")
    strip = build_strip(rule)
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(workers) as ex:
            runs = list(ex.map(lambda n: growth_run(rule, n, strip, region_margin), n_list))
    else:
        runs = [growth_run(rule, n, strip, region_margin) for n in n_list]
    cC, cP, clip = (list(t) for t in zip(*runs))
    return GrowthResult(n_list, cC, cP, clip, _fit_slope(n_list, cC), _fit_slope(n_list, cP))
