"""Gram-matrix certificates of finite linear independence for Gabor systems ``{M_y T_x f}``.

Inner products are ``<g, h> = int g conj(h)``.  Windows are tensor products
of one 1-D profile, so every d-dimensional inner product factors into d
one-dimensional ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.integrate
import scipy.linalg
from scipy.special import eval_hermite

from .symplectic import PhasePoint

QUAD_TOL = 1e-10
TAIL_MASS = 1e-14


class QuadratureError(RuntimeError):
    pass


class DuplicateAtomError(ValueError):
    pass


@dataclass(frozen=True)
class Window:
    """Unit-norm window: ``gaussian`` (width ``s``), ``box`` (indicator of width ``s``) or ``hermite`` (degree ``n``)."""

    kind: str = "gaussian"
    width: float = 1.0
    degree: int = 0
    d: int = 1

    def __post_init__(self):
        kind = {"indicator-box": "box", "indicator": "box", "hermite-n": "hermite"}.get(self.kind, self.kind)
        if kind not in ("gaussian", "box", "hermite"):
            raise ValueError(f"unknown window kind {self.kind!r}")
        if self.width <= 0:
            raise ValueError("width must be positive")
        if self.degree < 0:
            raise ValueError("degree must be non-negative")
        object.__setattr__(self, "kind", kind)

    def profile(self, t):
        """The 1-D factor, normalized in L2(R)."""
        t = np.asarray(t, dtype=float)
        s = self.width
        if self.kind == "gaussian":
            return (2.0 / s**2) ** 0.25 * np.exp(-np.pi * t**2 / s**2)
        if self.kind == "box":
            return np.where(np.abs(t) <= s / 2, s**-0.5, 0.0)
        n = self.degree
        c = (2.0 ** 0.25) / math.sqrt(2.0**n * math.factorial(n)) / math.sqrt(s)
        u = t / s
        return c * eval_hermite(n, np.sqrt(2 * np.pi) * u) * np.exp(-np.pi * u**2)

    def __call__(self, t):
        t = np.atleast_2d(np.asarray(t, dtype=float))
        return np.prod(self.profile(t), axis=-1)

    def support(self) -> tuple:
        """Interval outside which the 1-D profile carries less than ``TAIL_MASS`` of its mass."""
        s = self.width
        if self.kind == "box":
            return (-s / 2, s / 2)
        # exp(-2 pi L^2) < TAIL_MASS, widened for the polynomial factor
        L = s * (math.sqrt(-math.log(TAIL_MASS) / (2 * math.pi)) + math.sqrt((2 * self.degree + 1) / (2 * math.pi)))
        return (-L, L)


def _gaussian_inner_1d(s, xa, ya, xb, yb) -> complex:
    eta = ya - yb
    return (math.exp(-math.pi * (xa - xb) ** 2 / (2 * s**2) - math.pi * eta**2 * s**2 / 2)
            * complex(math.cos(math.pi * eta * (xa + xb)), math.sin(math.pi * eta * (xa + xb))))


def _quad_inner_1d(f: Window, xa, ya, xb, yb) -> complex:
    lo, hi = f.support()
    a, b = max(lo + xa, lo + xb), min(hi + xa, hi + xb)
    if a >= b:
        return 0.0j
    eta = ya - yb

    def env(t):
        return f.profile(t - xa) * f.profile(t - xb)

    # for box windows the limits already sit on the jumps
    re, err_re = scipy.integrate.quad(lambda t: env(t) * math.cos(2 * math.pi * eta * t), a, b,
                                      epsabs=QUAD_TOL / 10, epsrel=0, limit=400)
    im, err_im = scipy.integrate.quad(lambda t: env(t) * math.sin(2 * math.pi * eta * t), a, b,
                                      epsabs=QUAD_TOL / 10, epsrel=0, limit=400)
    err = max(err_re, err_im)
    if err > QUAD_TOL:
        raise QuadratureError(f"quadrature reached only {err:.3g} (target {QUAD_TOL:g})")
    return complex(re, im)


def atom_inner(f: Window, a: PhasePoint, b: PhasePoint, method: str = "auto") -> complex:
    """``<M_{a.y} T_{a.x} f, M_{b.y} T_{b.x} f>``; closed form for gaussians unless ``method='quad'``."""
    if a.d != f.d or b.d != f.d:
        raise ValueError("atom dimension does not match the window")
    closed = f.kind == "gaussian" and method != "quad"
    out = 1.0 + 0.0j
    for xa, ya, xb, yb in zip(a.x, a.y, b.x, b.y):
        if closed:
            out *= _gaussian_inner_1d(f.width, xa, ya, xb, yb)
        else:
            out *= _quad_inner_1d(f, xa, ya, xb, yb)
    return out


@dataclass(frozen=True, eq=False)
class GramResult:
    matrix: np.ndarray
    min_eigenvalue: float
    verdict: str


def _gram(f: Window, atoms, workers: int = 1) -> np.ndarray:
    n = len(atoms)
    G = np.zeros((n, n), dtype=complex)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]

    def entry(ij):
        return atom_inner(f, atoms[ij[0]], atoms[ij[1]])

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(workers) as ex:
            vals = list(ex.map(entry, pairs))
    else:
        vals = [entry(ij) for ij in pairs]
    for (i, j), v in zip(pairs, vals):
        G[i, j] = v
        G[j, i] = np.conj(v)
    G[np.diag_indices(n)] = 1.0
    return G


def gram_matrix(f: Window, atoms, workers: int = 1) -> GramResult:
    """Gram matrix of the Gabor system and its independence verdict.

    Positivity of the smallest eigenvalue beyond ``10 * QUAD_TOL * |A|``
    certifies independence; anything below is ``inconclusive``, never
    ``dependent``.
    """
    atoms = list(atoms)
    if not atoms:
        raise ValueError("need at least one atom")
    if len({(a.x, a.y) for a in atoms}) != len(atoms):
        raise DuplicateAtomError("duplicate phase points: the system is trivially dependent")
    G = _gram(f, atoms, workers)
    lam = float(scipy.linalg.eigvalsh(G)[0])
    verdict = "independent" if lam > 10 * QUAD_TOL * len(atoms) else "inconclusive"
    return GramResult(G, lam, verdict)


def dependence_search(f: Window, atoms):
    """Best approximate dependence ``sum c_k M T f``: the Gram eigenvector of the smallest eigenvalue.

    Returns ``(coefficients, eigenvalue)``.  The duplicate guard is not
    applied, so exactly dependent inputs report eigenvalue 0.
    """
    atoms = list(atoms)
    if len(atoms) < 2:
        raise ValueError("need at least two atoms")
    w, V = scipy.linalg.eigh(_gram(f, atoms))
    c = V[:, 0]
    # fix the phase so the largest coefficient is real positive
    j = int(np.argmax(np.abs(c)))
    c = c * np.exp(-1j * np.angle(c[j]))
    return c, float(w[0])


def grid_atoms(radius: int = 1, spacing=(1.0, 1.0)) -> list:
    """``(2 radius + 1)^2`` atoms of ``aZ x bZ`` centered at the origin (d = 1)."""
    a, b = spacing
    r = range(-radius, radius + 1)
    return [PhasePoint((a * i,), (b * j,)) for i in r for j in r]


def validate_gaussian_closed_form(rng: np.random.Generator, n_pairs: int = 20, width: float = 1.0) -> float:
    """Max deviation between the gaussian closed form and quadrature on random atom pairs."""
    f = Window("gaussian", width)
    worst = 0.0
    for _ in range(n_pairs):
        a = PhasePoint(tuple(rng.uniform(-2, 2, 1)), tuple(rng.uniform(-2, 2, 1)))
        b = PhasePoint(tuple(rng.uniform(-2, 2, 1)), tuple(rng.uniform(-2, 2, 1)))
        worst = max(worst, abs(atom_inner(f, a, b) - atom_inner(f, a, b, method="quad")))
    return worst
