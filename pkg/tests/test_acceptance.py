"""Acceptance gate: one test per criterion, each printing a single PASS/FAIL line."""

import hashlib
import itertools
import subprocess
import sys
import time

import numpy as np
import pytest
import scipy.integrate
import scipy.linalg

from conftest import random_basis, write_cli_inputs
from gaborlattice.cli import run
from gaborlattice.fiber import (
    Box, certify_nonvanishing, check_conjugation, fiberize, kernel_basis, kernel_dim, random_symbolset,
    recurrence_basis_d1, truncate_rect,
)
from gaborlattice.gabor import Window, gram_matrix
from gaborlattice.lattice import Lattice, covolume, member
from gaborlattice.mathieu import AMParams, bloch_bands, build_truncation, dependence_residual, edge_mass
from gaborlattice.propagation import PropagationRule, build_strip, build_strip_sets, growth_exponents
from gaborlattice.symplectic import PhasePoint, reduce_to_product_d1, standard_form


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n[acceptance {number}] {'PASS' if ok else 'FAIL'}: {detail}")
    return emit


def test_criterion_1_kernel_dimension_law(report):
    rng = np.random.default_rng(1)
    Rs = (10, 50, 200)
    t0 = time.perf_counter()
    bad, done = [], 0
    while done < 100:
        k = int(rng.integers(2, 5))
        shifts = rng.choice(np.arange(-3, 4), size=k, replace=False)
        S = random_symbolset(rng, shifts)
        x = float(rng.random())
        if not certify_nonvanishing(S, [x], max(Rs), 1e-3):
            continue
        F = fiberize(S, [x])
        expected = int(shifts.max() - shifts.min())
        for R in Rs:
            got = kernel_dim(truncate_rect(F, R), tol=1e-10)
            if got != expected:
                bad.append((done, R, got, expected))
        done += 1
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 30
    report(1, ok, f"{done} symbol sets x R in {Rs}: {len(bad)} mismatches, {elapsed:.1f} s (limit 30 s)")
    assert not bad
    assert elapsed < 30


def _covariance_worst(rng, d, gamma, period, shifts):
    S = random_symbolset(rng, shifts, gamma=gamma, period=period)
    box = Box.centered(5, d)
    worst = 0.0
    for _ in range(10):
        x = rng.normal(size=d) * 3
        for g0 in itertools.product((-1, 0, 1), repeat=d):
            worst = max(worst, check_conjugation(S, x, g0, box))
    return worst


def test_criterion_2_conjugation_covariance(report):
    rng = np.random.default_rng(2)
    w1 = _covariance_worst(rng, 1, Lattice([[1.0]]), Lattice([[np.sqrt(2)]]), [-2, 0, 1, 3])
    w2 = _covariance_worst(rng, 2, Lattice.from_generators((1.0, 0.25), (-0.3, 1.2)),
                           Lattice.from_generators((np.sqrt(3), 0.1), (0.4, np.sqrt(5))),
                           [(0, 0), (1, 0), (0, 1), (-1, 2)])
    worst = max(w1, w2)
    report(2, worst <= 1e-12, f"max deviation d=1 {w1:.2e}, d=2 {w2:.2e} (tol 1e-12)")
    assert worst <= 1e-12


def _brute_fixpoint(offs, C, half):
    """Full scans of the box [-half, half]^2 until nothing changes (no worklist)."""
    P = set(C)
    changed = True
    while changed:
        changed = False
        for a in range(-half, half + 1):
            for b in range(-half, half + 1):
                t = (a, b)
                if t not in P and all((a + o[0], b + o[1]) in P for o in offs):
                    P.add(t)
                    changed = True
    return P


def test_criterion_3_growth_rates(report):
    rule = PropagationRule(((0, 0), (1, 0), (0, 1)), (1, 0))
    ns = list(range(20, 201, 20))
    t0 = time.perf_counter()
    res = growth_exponents(rule, ns)
    exact_C = res.card_C == [2 * n + 1 for n in ns]
    exact_P = res.card_P == [(2 * n + 1) * (2 * n + 2) // 2 for n in ns]
    strip = build_strip(rule)
    oracle_ok = True
    for i, n in enumerate(ns):
        if n > 40:
            break
        half = int(np.ceil(4 * n + 10.0 * rule.delta))
        P = _brute_fixpoint(rule.offsets(), build_strip_sets(rule, strip, n), half)
        oracle_ok &= len(P) == res.card_P[i]
    elapsed = time.perf_counter() - t0
    slopes_ok = abs(res.slope_C - 1) <= 0.15 and abs(res.slope_P - 2) <= 0.15
    ok = slopes_ok and exact_C and exact_P and oracle_ok and elapsed < 60
    report(3, ok, f"slope_C {res.slope_C:.4f} (1 +- 0.15), slope_P {res.slope_P:.4f} (2 +- 0.15), "
                  f"exact |C_n| {exact_C}, exact |P| {exact_P}, brute-force n<=40 {oracle_ok}, {elapsed:.1f} s")
    assert slopes_ok and exact_C and exact_P and oracle_ok
    assert elapsed < 60


def test_criterion_4_symplectic_reduction(report):
    rng = np.random.default_rng(4)
    J = standard_form(1)
    worst_form = worst_vol = 0.0
    membership_ok = True
    for _ in range(100):
        L = Lattice(random_basis(rng, 2, 1e3))
        sigma, alpha, beta = reduce_to_product_d1(L)
        S = sigma.matrix
        worst_form = max(worst_form, float(np.max(np.abs(S.T @ J @ S - J))))
        worst_vol = max(worst_vol, abs(alpha * beta - covolume(L)) / covolume(L))
        prod = Lattice(np.diag([alpha, beta]))
        pts = L.embed(rng.integers(-20, 21, size=(50, 2)))
        membership_ok &= all(member(S @ p, prod, tol=1e-8) for p in pts)
        back = prod.embed(rng.integers(-20, 21, size=(50, 2)))
        membership_ok &= all(member(np.linalg.solve(S, q), L, tol=1e-8) for q in back)
    ok = worst_form <= 1e-9 and membership_ok and worst_vol <= 1e-9
    report(4, ok, f"max |s^T J s - J| {worst_form:.2e} (1e-9), two-way membership {membership_ok}, "
                  f"max rel |alpha beta - covol| {worst_vol:.2e} (1e-9)")
    assert worst_form <= 1e-9 and membership_ok and worst_vol <= 1e-9


def test_criterion_5_almost_mathieu(report):
    bands = bloch_bands(1.0, 1, 2)
    # closed form: +-sqrt(6 + 2 cos k) sweeps [2, 2 sqrt 2]
    expected = np.array([[-2 * np.sqrt(2), -2.0], [2.0, 2 * np.sqrt(2)]])
    band_err = float(np.max(np.abs(np.array(bands.bands) - expected))) if len(bands) == 2 else np.inf

    p = AMParams(1.0, 0.5)
    w, V = scipy.linalg.eigh(build_truncation(p, 500))
    interior = [i for i in range(len(w)) if edge_mass(V[:, i], 0.05) <= 0.5]
    dist = max(bands.distance(w[i]) for i in interior)
    resid = max(dependence_residual(V[:, i], p, float(w[i])) for i in interior)
    ok = band_err <= 1e-6 and dist <= 1e-2 and resid <= 1e-8
    report(5, ok, f"band error {band_err:.2e} (1e-6), {len(interior)}/{len(w)} interior eigenvalues within "
                  f"{dist:.2e} of bands (1e-2), max dependence residual {resid:.2e} (1e-8)")
    assert band_err <= 1e-6 and dist <= 1e-2 and resid <= 1e-8


def test_criterion_6_gram_positivity(report):
    rng = np.random.default_rng(6)
    f = Window("gaussian")
    grid = [(i, j) for i in range(-2, 3) for j in range(-2, 3)]
    worst = np.inf
    for _ in range(50):
        k = int(rng.integers(1, 10))
        A = [PhasePoint((float(grid[i][0]),), (float(grid[i][1]),)) for i in rng.choice(len(grid), k, replace=False)]
        worst = min(worst, gram_matrix(f, A).min_eigenvalue)
    g = scipy.integrate.quad(lambda t: np.sqrt(2) * np.exp(-np.pi * ((t - 1) ** 2 + t**2)), -12, 12,
                             epsabs=1e-14, limit=200)[0]
    two = gram_matrix(f, [PhasePoint((0.0,), (0.0,)), PhasePoint((1.0,), (0.0,))]).min_eigenvalue
    err = abs(two - (1 - g))
    ok = worst > 1e-8 and err <= 1e-9
    report(6, ok, f"min eigenvalue over 50 subsets {worst:.4e} (> 1e-8), 2-atom value {two:.12f} "
                  f"vs quadrature {1 - g:.12f}, error {err:.1e} (1e-9)")
    assert worst > 1e-8 and err <= 1e-9


def test_criterion_7_recurrence_vs_svd(report):
    rng = np.random.default_rng(7)
    worst, done = 0.0, 0
    while done < 20:
        k = int(rng.integers(2, 5))
        S = random_symbolset(rng, rng.choice(np.arange(-3, 4), size=k, replace=False))
        x = float(rng.random())
        R = 30
        if not certify_nonvanishing(S, [x], R, 1e-3):
            continue
        F = fiberize(S, [x])
        V = recurrence_basis_d1(F, R)
        Q = kernel_basis(truncate_rect(F, R))
        angle = np.inf if V.shape[1] != Q.shape[1] else float(np.max(scipy.linalg.subspace_angles(V, Q)))
        worst = max(worst, angle)
        done += 1
    report(7, worst < 1e-6, f"max principal angle over {done} instances {worst:.2e} (< 1e-6)")
    assert worst < 1e-6


def test_criterion_8_cli_determinism(report, tmp_path, capsys):
    cases = write_cli_inputs(tmp_path)
    differing = []
    for name, argv in cases.items():
        code = run(argv)
        first = capsys.readouterr().out
        proc = subprocess.run([sys.executable, "-m", "gaborlattice.cli"] + argv, capture_output=True, text=True)
        h1 = hashlib.sha256(first.encode()).hexdigest()
        h2 = hashlib.sha256(proc.stdout.encode()).hexdigest()
        if code != 0 or proc.returncode != 0 or h1 != h2:
            differing.append(name)
    report(8, not differing, f"{len(cases)} subcommands double-run, hash mismatches: {differing or 'none'}")
    assert not differing
