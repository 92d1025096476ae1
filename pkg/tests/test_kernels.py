"""Compiled and pure-Python kernels agree; exact linear algebra matches Fraction elimination."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wickgen import _pykernels, kernels
from wickgen.linalg import (
    certified_pivots,
    exact_pivots,
    exact_rref,
    frac_rank,
    frac_rref,
    frac_solve,
    greedy_independent,
    modular_pivots,
    prime,
)

try:
    from wickgen import _ckernels
except ImportError:  # extension not built
    _ckernels = None

needs_ext = pytest.mark.skipif(_ckernels is None, reason="compiled extension not built")

P = 2**31 - 1

matrices = st.integers(1, 7).flatmap(
    lambda r: st.integers(1, 7).flatmap(
        lambda c: st.lists(st.lists(st.integers(-6, 6), min_size=c, max_size=c), min_size=r, max_size=r)))


def test_backend_reported():
    assert kernels.BACKEND in ("cython", "python")
    if _ckernels is not None:
        assert kernels.BACKEND == "cython"


@needs_ext
@settings(max_examples=60, deadline=None)
@given(matrices)
def test_rref_modp_backends_agree(rows):
    a = np.array(rows, dtype=np.int64) % P
    r1, p1 = _pykernels.rref_modp(a, P)
    r2, p2 = _ckernels.rref_modp(a, P)
    assert list(p1) == list(p2)
    assert np.array_equal(np.asarray(r1), np.asarray(r2))


@needs_ext
@pytest.mark.parametrize("sizes,anti", [
    ([2, 2, 2], [False] * 3),
    ([4, 2], [False, False]),
    ([3, 3, 2], [False, True, False]),
    ([1, 1, 1, 1, 2], [False] * 5),
])
def test_multigraph_backends_agree(sizes, anti):
    v = len(sizes)
    ident = tuple(range(v))
    autos = [ident]
    # exchange of equal-size, equal-kind neighbours as a symmetry
    for i in range(v - 1):
        if sizes[i] == sizes[i + 1] and anti[i] == anti[i + 1]:
            p = list(ident)
            p[i], p[i + 1] = p[i + 1], p[i]
            autos.append(tuple(p))
    py = _pykernels.enumerate_multigraphs(sizes, anti, [list(a) for a in autos])
    cy = _ckernels.enumerate_multigraphs(sizes, anti, [list(a) for a in autos])
    assert [tuple(x) for x in py] == [tuple(x) for x in cy]


def _count_matchings(n):
    return 1 if n == 0 else (n - 1) * _count_matchings(n - 2)


@pytest.mark.parametrize("n", [2, 4, 6])
def test_multigraphs_on_single_slots_are_perfect_matchings(n):
    graphs = kernels.enumerate_multigraphs([1] * n, [False] * n, [list(range(n))])
    assert len(graphs) == _count_matchings(n)


@settings(max_examples=60, deadline=None)
@given(matrices)
def test_exact_rref_matches_fractions(rows):
    red = exact_rref(np.array(rows, dtype=np.int64))
    fr, piv = frac_rref(rows)
    assert red.pivots == piv
    for k in range(len(piv)):
        for c in range(len(rows[0])):
            assert red.entry(k, c) == fr[k][c]
    for v in red.nullspace():
        assert all(sum(a * b for a, b in zip(row, v)) == 0 for row in rows)


@settings(max_examples=60, deadline=None)
@given(matrices)
def test_pivots_and_modular_lower_bound(rows):
    a = np.array(rows, dtype=np.int64)
    piv, certified = certified_pivots(a)
    assert certified
    assert len(piv) == frac_rank(rows) == len(exact_pivots(a))
    assert len(modular_pivots(a)) <= len(piv)


def test_large_entries_use_exact_reconstruction():
    # entries near 2**70 force the object-dtype path
    big = 2**70 + 1
    rows = [[big, 1, 0], [2 * big, 2, 1], [3 * big, 3, 1]]
    a = np.array(rows, dtype=object)
    assert exact_pivots(a) == frac_rref(rows)[1]


def test_frac_solve_and_greedy():
    assert frac_solve([[2, 1], [1, 3]], [3, 5]) == [Fraction(4, 5), Fraction(7, 5)]
    assert greedy_independent([[1, 0], [2, 0], [0, 1], [1, 1]]) == [0, 2]
    assert prime(0) != prime(1)


def test_modp_rank_of_pairing_matrix():
    eta = np.diag([-1, 1, 1, 1])
    specs = ["ab,cd->abcd", "ac,bd->abcd", "ad,bc->abcd", "ab,cd->abcd"]
    a = np.array([np.einsum(s, eta, eta).reshape(-1) for s in specs], dtype=np.int64)
    assert len(modular_pivots(a.T)) == frac_rank(a.tolist()) == 3
