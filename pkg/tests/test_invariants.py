from fractions import Fraction

import numpy as np
import pytest
import sympy
from conftest import make_model

from wickgen.invariants import (
    EndoValue,
    InvariantError,
    charpoly,
    cayley_lorentz,
    discriminant,
    is_lorentz,
    orbit_region,
    power_trace,
    random_lorentz,
    random_self_adjoint,
    reduce_trace,
    scalar_invariant_basis,
    trace_invariants,
)
from wickgen.scaling import ScalingError


def diag(*xs):
    n = len(xs)
    return EndoValue(tuple(tuple(Fraction(xs[i]) if i == j else Fraction(0) for j in range(n)) for i in range(n)))


def naive_traces(x, top):
    m = sympy.Matrix(x.sympy())
    return [m**p for p in range(1, top + 1)]


def test_trace_invariants_trivial():
    assert trace_invariants(diag(1, 1, 1, 1)) == (4, 4, 4, 4)
    assert trace_invariants(diag(0, 0, 0, 0)) == (0, 0, 0, 0)


def test_trace_invariants_match_repeated_multiplication():
    rng = np.random.default_rng(1)
    for _ in range(10):
        x = random_self_adjoint(4, rng)
        want = tuple(Fraction(str(p.trace())) for p in naive_traces(x, 4))
        assert trace_invariants(x) == want


def test_self_adjointness_enforced():
    with pytest.raises(InvariantError):
        EndoValue(((0, 1), (1, 0)))
    with pytest.raises(InvariantError):
        EndoValue.from_lower(((0, 1), (2, 0)))
    assert EndoValue(((0, -1), (1, 0))).lower() == ((0, 1), (1, 0))


def test_reduce_trace_one_dimension():
    x = diag(Fraction(3, 2))
    assert reduce_trace(2, trace_invariants(x)) == Fraction(9, 4)


def test_reduce_trace_two_dimensions_formula():
    rng = np.random.default_rng(2)
    for _ in range(20):
        x = random_self_adjoint(2, rng)
        t1, t2 = trace_invariants(x)
        formula = Fraction(3, 2) * t1 * t2 - Fraction(1, 2) * t1**3
        assert reduce_trace(3, (t1, t2)) == formula == power_trace(x, 3)


def test_reduce_trace_four_dimensions():
    rng = np.random.default_rng(3)
    for _ in range(100):
        x = random_self_adjoint(4, rng)
        inv = trace_invariants(x)
        for p in (5, 6, 7, 8):
            assert reduce_trace(p, inv) == power_trace(x, p)


def test_reduce_trace_range():
    inv = trace_invariants(diag(1, 2))
    with pytest.raises(InvariantError):
        reduce_trace(2, inv)
    with pytest.raises(InvariantError):
        reduce_trace(5, inv)


def test_discriminant_examples():
    assert discriminant(diag(1, 1, 2, 3)) == 0
    assert discriminant(diag(0, 1)) == 1


def test_discriminant_product_formula_four_dimensions():
    lam = (1, 2, 3, 4)
    want = 1
    for i in range(4):
        for j in range(i + 1, 4):
            want *= (lam[i] - lam[j]) ** 2
    assert discriminant(diag(*lam)) == want


def _has_repeated_root(x):
    f = charpoly(x)
    return sympy.degree(sympy.gcd(f, f.diff(f.gen))) > 0


def test_discriminant_vanishes_exactly_on_repeated_roots():
    rng = np.random.default_rng(4)
    cases = [random_self_adjoint(4, rng, spread=2) for _ in range(100)]
    for i in range(20):
        a, b, c = (int(v) for v in rng.integers(-3, 4, size=3))
        base = diag(a, a, b, c) if i % 2 else diag(a, b, c, a)
        cases.append(base.conjugate(random_lorentz(4, rng)))
    for x in cases:
        assert (discriminant(x) == 0) == _has_repeated_root(x)
    assert sum(discriminant(x) == 0 for x in cases) >= 20


def test_cayley_transform_is_lorentz():
    rng = np.random.default_rng(5)
    for _ in range(10):
        assert is_lorentz(random_lorentz(4, rng))
        assert is_lorentz(random_lorentz(4, rng, improper=True))
    with pytest.raises(InvariantError):
        cayley_lorentz([[0, 1], [1, 0]])


def test_lorentz_invariance_of_traces_and_discriminant():
    rng = np.random.default_rng(6)
    for _ in range(50):
        x = random_self_adjoint(4, rng)
        y = x.conjugate(random_lorentz(4, rng))
        assert trace_invariants(x) == trace_invariants(y)
        assert discriminant(x) == discriminant(y)


# -- orbit regions ------------------------------------------------------------


def test_orbit_region_separates_swapped_timelike_eigenvalue():
    a = EndoValue.from_lower([[-1 if i == j == 0 else 0 for j in range(4)] for i in range(4)])
    lam = (1, 2, 3, 5)
    xa = EndoValue.from_lower([[(-lam[0] if i == 0 else lam[i]) if i == j else 0 for j in range(4)] for i in range(4)])
    swapped = (lam[1], lam[0], lam[2], lam[3])
    xb = EndoValue.from_lower([[(-swapped[0] if i == 0 else swapped[i]) if i == j else 0 for j in range(4)]
                               for i in range(4)])
    assert trace_invariants(xa) == trace_invariants(xb)
    ra, rb = orbit_region(xa), orbit_region(xb)
    assert ra.kind == rb.kind == "regular"
    assert ra.label != rb.label
    assert ra.pattern == ("t", "s", "s", "s") and rb.pattern == ("s", "t", "s", "s")
    assert orbit_region(a).label == "Z0"


def test_orbit_region_repeated_and_complex():
    assert orbit_region(diag(2, 2, 1, 3)).label == "Z0"
    rotation = EndoValue(((0, -1), (1, 0)))
    assert sympy.Poly(charpoly(rotation)).count_roots() == 0
    region = orbit_region(rotation)
    assert region.kind == "indeterminate" and region.label.startswith("Indeterminate")


def test_orbit_region_constant_on_lorentz_orbits():
    rng = np.random.default_rng(7)
    x = EndoValue.from_lower([[-3, 0, 0, 0], [0, 1, 0, 0], [0, 0, 2, 0], [0, 0, 0, 5]])
    random_point = random_self_adjoint(4, rng)
    for point in (x, random_point):
        label = orbit_region(point).label
        for _ in range(50):
            assert orbit_region(point.conjugate(random_lorentz(4, rng))).label == label


# -- invariant bases ----------------------------------------------------------


@pytest.fixture
def xi_model():
    return make_model([("A", 1, 0)], [("xi", 2, -2, "symmetric", "ξ"), ("s", 0, 0, "general", "σ"),
                                      ("m2", 0, 2)])


def test_invariant_basis_degree_two(xi_model):
    b = scalar_invariant_basis(xi_model, ["xi"], 2)
    assert [t.display for t in b.generators] == ["ξ_{aa}", "ξ_{ab} ξ_{ab}"]
    assert [t.display for t in b.decomposable] == ["ξ_{aa} ξ_{bb}"]
    assert len(b.terms) == 4


def test_invariant_basis_degree_zero(xi_model):
    assert [t.display for t in scalar_invariant_basis(xi_model, ["xi"], 0).terms] == ["1"]


def test_invariant_basis_stops_at_cayley_hamilton(xi_model):
    gens = scalar_invariant_basis(xi_model, ["xi"], 5).generators
    # tr ξ .. tr ξ⁴ only; the connected degree-5 chain is dependent
    assert [len(t.monomial.all_blocks) for t in gens] == [1, 2, 3, 4]
    x = random_self_adjoint(4, np.random.default_rng(8))
    assert reduce_trace(5, trace_invariants(x)) == power_trace(x, 5)


def test_invariant_basis_scalar_field(xi_model):
    b = scalar_invariant_basis(xi_model, ["s"], 3)
    assert [t.display for t in b.generators] == ["σ"]


def test_invariant_basis_rejects_non_marginal(xi_model):
    with pytest.raises(ScalingError):
        scalar_invariant_basis(xi_model, ["m2"], 2)
