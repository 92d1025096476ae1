import itertools
from collections import Counter
from fractions import Fraction

from conftest import make_model
from hypothesis import given, settings
from hypothesis import strategies as st

from wickgen.generators import Block, Monomial, catalog_blocks, enumerate_monomials
from wickgen.scaling import max_derivative_order, target_weight


def names(blocks):
    return sorted(b.name for b in blocks)


def test_catalog_vector_kg(vector_kg):
    cat = catalog_blocks(vector_kg, 2)
    assert names(cat) == sorted(["S0", "m²", "∇ξ", "∇∇ξ"])
    # the scalar marginal ξ never appears undifferentiated
    assert not any(b.marginal for b in cat)


def test_catalog_zero_weight_has_no_positive_blocks(vector_kg):
    assert [b for b in catalog_blocks(vector_kg, 0) if not b.marginal] == []


def test_catalog_tensor_coupling_adds_marginal_block(tensor_xi):
    cat = catalog_blocks(tensor_xi, 2)
    weights = {b.name: b.coord_weight for b in cat}
    assert weights["ξ"] == 0 and weights["∇ξ"] == 1 and weights["∇∇ξ"] == 2
    assert [b.name for b in cat if b.marginal] == ["ξ"]


def test_monomials_vector_kg(vector_kg):
    monos = enumerate_monomials(vector_kg, (2,))
    got = sorted(tuple(names(m.blocks)) for m in monos)
    assert got == sorted([("S0",), ("m²",), ("∇∇ξ",), ("∇ξ", "∇ξ")])


def test_negative_weight_gives_nothing():
    m = make_model([("u", 0, -2)], [("m2", 0, 2)])
    assert enumerate_monomials(m, (1,)) == []


def test_zero_weight_gives_constant_only(vector_kg):
    assert enumerate_monomials(vector_kg, (0,)) == [Monomial()]


def test_monotone_in_marginal_cap(tensor_xi):
    previous = []
    for cap in range(4):
        monos = enumerate_monomials(tensor_xi, (2,), cap)
        assert monos[: len(previous)] == previous
        assert all(len(m.marginal_blocks) <= cap for m in monos)
        previous = monos
    assert len(previous) > len(enumerate_monomials(tensor_xi, (2,), 0))


def brute_force(cat, w):
    """All exponent vectors over the positive-weight blocks with total weight w."""
    pos = [b for b in cat if b.coord_weight > 0]
    ranges = [range(int(w // b.coord_weight) + 1) for b in pos]
    out = set()
    for exps in itertools.product(*ranges):
        if sum(e * b.coord_weight for e, b in zip(exps, pos)) == w:
            out.add(tuple(sorted(Counter({b: e for b, e in zip(pos, exps) if e}).items(), key=lambda x: x[0].sort_key())))
    return out


background_lists = st.lists(
    st.tuples(st.integers(0, 2), st.sampled_from([Fraction(x, 2) for x in range(-4, 5)])),
    max_size=3)


@settings(max_examples=40, deadline=None)
@given(background_lists, st.integers(0, 2), st.sampled_from([Fraction(x, 2) for x in range(-2, 5)]),
       st.integers(0, 4))
def test_monomials_complete_against_brute_force(bgs, frank, fdeg, k):
    backgrounds = [("b%d" % i, r, d) for i, (r, d) in enumerate(bgs) if r + d >= 0]
    m = make_model([("f", frank, fdeg)], backgrounds)
    w = target_weight(m, (k,))
    if w < 0 or w > 4:
        return
    cat = catalog_blocks(m, w)
    if len({b for b in cat if not b.marginal}) > 8:
        return
    monos = enumerate_monomials(m, (k,))
    got = {tuple(sorted(Counter(mono.blocks).items(), key=lambda x: x[0].sort_key())) for mono in monos}
    assert got == brute_force(cat, w)
    assert len(monos) == len(got)
    bound = max_derivative_order(m, w)
    for mono in monos:
        assert mono.total_weight == w
        assert sum((b.coord_weight for b in mono.blocks), Fraction(0)) == mono.total_weight
        assert all(b.nderiv <= bound for b in mono.all_blocks)


def test_block_symmetry_and_rank():
    m = make_model([("A", 1, 0)], [("h", 2, 0, "symmetric")])
    h = m.background("h")
    blk = Block("background", 2, h)
    assert blk.rank == 4
    assert blk.symmetry.groups == ((0, 1), (2, 3))
    s = Block("curvature", 1)
    assert s.rank == 5 and s.coord_weight == 3
