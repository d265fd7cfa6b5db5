import itertools
import json

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st
from hypothesis.extra.numpy import arrays

from gaborlattice.lattice import (
    Lattice, covolume, dual_lattice, gauss_reduce_pair, lagrange_reduce, member, reduce_mod, same_lattice,
)
from conftest import random_basis, random_unimodular


@pytest.mark.parametrize("gens, expected", [
    ([(1, 0), (0, 1)], 1.0),
    ([(2, 0), (1, 3)], 6.0),
    ([(1, 1), (0, 1)], 1.0),
])
def test_covolume_examples(gens, expected):
    assert covolume(Lattice.from_generators(*gens)) == pytest.approx(expected, rel=1e-15)


def test_singular_and_ill_conditioned_bases_rejected():
    with pytest.raises(ValueError):
        Lattice.from_generators((1, 2), (2, 4))
    with pytest.raises(ValueError, match="condition"):
        Lattice.from_generators((1, 0), (1, 1e-9))


def test_covolume_unimodular_invariance(rng):
    for _ in range(50):
        n = int(rng.integers(1, 5))
        B = random_basis(rng, n)
        U = random_unimodular(rng, n) if n > 1 else np.array([[-1]])
        if np.linalg.cond(B @ U) > 1e8:
            continue
        a, b = covolume(Lattice(B)), covolume(Lattice(B @ U))
        assert abs(a - b) <= 1e-9 * a


def test_dual_examples():
    alpha = np.sqrt(2)
    assert dual_lattice(Lattice([[alpha]])).basis[0, 0] == pytest.approx(1 / alpha)
    assert np.allclose(dual_lattice(Lattice.standard(2)).basis, np.eye(2))
    L = Lattice.from_generators((2, 0), (0, 3))
    D = dual_lattice(L)
    assert covolume(D) == pytest.approx(1 / 6)
    # annihilator check by direct evaluation of the characters on generator pairs
    for lam in L.generators():
        for mu in D.generators():
            assert abs(np.exp(2j * np.pi * lam @ mu) - 1) < 1e-12


def test_dual_of_dual_has_same_points(rng):
    for _ in range(10):
        L = Lattice(random_basis(rng, 3))
        DD = dual_lattice(dual_lattice(L))
        for _ in range(100):
            c = rng.integers(-20, 21, size=3)
            assert member(L.embed(c), DD)
            assert member(DD.embed(c), L)


def test_reduce_mod_examples():
    assert np.allclose(reduce_mod([2.5, -0.25], Lattice.standard(2)), [0.5, 0.75])
    L = Lattice.from_generators((2, 0), (1, 3))
    assert np.allclose(reduce_mod(L.embed([3, -2]), L), 0.0)
    assert reduce_mod([1.2], Lattice([[1 / 3]]))[0] == pytest.approx(0.2, abs=1e-12)


def test_reduce_mod_against_brute_force_translates(rng):
    # the representative is the unique translate x + v (v in L) with coordinates in [0,1)
    for _ in range(30):
        L = Lattice(random_basis(rng, 2))
        x = rng.normal(scale=5, size=2)
        c0 = np.floor(L.coordinates(x))
        hits = []
        for k in itertools.product(range(-2, 3), repeat=2):
            cand = x - L.embed(c0 + np.array(k))
            cc = L.coordinates(cand)
            if np.all((cc > -1e-12) & (cc < 1 - 1e-12)):
                hits.append(cand)
        assert len(hits) == 1
        assert np.allclose(reduce_mod(x, L), hits[0], atol=1e-12)


def test_reduce_mod_periodic_and_idempotent(rng):
    L = Lattice(random_basis(rng, 3))
    for _ in range(1000):
        x = rng.normal(scale=10, size=3)
        lam = L.embed(rng.integers(-5, 6, size=3))
        r = reduce_mod(x, L)
        assert np.allclose(reduce_mod(r, L), r, atol=1e-12)
        diff = reduce_mod(x + lam, L) - r
        # agreement up to a lattice vector when a coordinate sits on the cell boundary
        assert np.allclose(diff, 0, atol=1e-12) or member(diff, L, 1e-9)


def test_reduce_mod_exact_for_integer_translates():
    # dyadic data: x + lambda is computed without rounding, so the result must be bit-identical
    L = Lattice.standard(2, 0.5)
    x = np.array([0.375, 0.125])
    assert np.array_equal(reduce_mod(x + L.embed([4, -7]), L), reduce_mod(x, L))


def test_member_examples():
    Z2 = Lattice.standard(2)
    assert member([3, -4], Z2, 1e-10)
    assert not member([0.5, 0], Z2, 1e-10)
    shear = Lattice.from_generators((1, 1), (0, 1))
    assert member([1, 1], shear, 1e-10)
    # 2x2 integer system: (1,1) = 1*(1,1) + 0*(0,1)
    assert not member([1, 0.5], shear, 1e-10)


def test_member_exact_integer_path():
    L = Lattice.from_generators((2, 0), (1, 3))
    assert member([3, 3], L)       # (2,0) + (1,3)
    assert not member([1, 0], L)
    # exact path ignores tol entirely
    assert not member([1, 0], L, tol=0.6)


@pytest.mark.parametrize("gens", [[(1, 0), (5, 1)], [(2, 0), (2, 1)], [(1, 0), (0, 1)], [(3, 1), (7, 2)]])
def test_lagrange_reduce_against_shortest_vector_oracle(gens):
    L = Lattice.from_generators(*gens)
    R = lagrange_reduce(L)
    b1, b2 = R.basis[:, 0], R.basis[:, 1]
    # brute-force shortest nonzero vector over the coefficient box [-10, 10]^2
    shortest = min(np.linalg.norm(L.embed(c)) for c in itertools.product(range(-10, 11), repeat=2) if any(c))
    assert np.linalg.norm(b1) == pytest.approx(shortest)
    assert np.linalg.norm(b1) <= np.linalg.norm(b2) + 1e-12
    assert abs(b1 @ b2) <= b1 @ b1 / 2 + 1e-12
    assert covolume(R) == pytest.approx(covolume(L))
    assert same_lattice(R, L)


def test_lagrange_reduce_examples():
    R = lagrange_reduce(Lattice.from_generators((1, 0), (5, 1)))
    assert sorted(np.abs(R.basis).ravel().tolist()) == [0, 0, 1, 1]
    assert np.linalg.norm(lagrange_reduce(Lattice.from_generators((2, 0), (2, 1))).basis[:, 0]) == pytest.approx(1)
    with pytest.raises(ValueError):
        lagrange_reduce(Lattice.standard(3))


@given(arrays(np.float64, (2, 2), elements=st.floats(-10, 10)),
       st.integers(-3, 3), st.integers(-3, 3))
def test_lagrange_reduce_generates_same_lattice(B, s, t):
    assume(np.linalg.matrix_rank(B) == 2)
    assume(abs(np.linalg.det(B)) >= 1e-2 and np.linalg.cond(B) <= 1e4)
    U = np.array([[1, s], [0, 1]]) @ np.array([[1, 0], [t, 1]])
    L = Lattice(B @ U)
    R = lagrange_reduce(L)
    assert same_lattice(R, L, 1e-7)


def test_gauss_reduce_pair_in_r3():
    b1, b2 = gauss_reduce_pair([1, 0, 0], [7, 1, 0])
    assert np.allclose(sorted([b1 @ b1, b2 @ b2]), [1, 1])


def test_json_round_trip(rng):
    L = Lattice(random_basis(rng, 3))
    text = L.to_json()
    data = json.loads(text)
    assert data["dim"] == 3
    # basis is a list of generators (columns)
    assert np.array_equal(np.array(data["basis"]).T, L.basis)
    assert np.array_equal(Lattice.from_json(text).basis, L.basis)
