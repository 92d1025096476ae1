from fractions import Fraction

import pytest
from conftest import make_model
from hypothesis import given, settings
from hypothesis import strategies as st

from wickgen.scaling import (
    BackgroundField,
    Classification,
    ScalingError,
    as_fraction,
    block_weight,
    check_homogeneity,
    classify,
    exact_lambdas,
    lambda_exponent,
    max_derivative_order,
    physical_degree,
    scale_factor,
    target_weight,
)
from wickgen.tensor import DenseTensor


def bg(rank, degree, name="t"):
    return BackgroundField(name, rank, degree)


def test_classify_examples():
    assert classify(bg(0, 2)) is Classification.ADMISSIBLE
    assert classify(bg(0, 0)) is Classification.MARGINAL
    assert classify(bg(2, -2)) is Classification.MARGINAL
    assert classify(bg(0, -1)) is Classification.INADMISSIBLE
    assert bg(1, Fraction(-1, 2)).classification is Classification.ADMISSIBLE


def test_physical_degree_examples(scalar_grad, vector_kg):
    assert physical_degree(scalar_grad, (0, 2)) == 2
    assert physical_degree(scalar_grad, (0, 0)) == 0
    assert physical_degree(vector_kg, (2,)) == 0


def test_target_weight_examples(vector_kg, scalar_grad):
    assert target_weight(vector_kg, (2,)) == 2
    assert target_weight(scalar_grad, (1, 1)) == 3
    synthetic = make_model([("u", 0, -2)])
    assert target_weight(synthetic, (1,)) == -2


def test_component_length_checked(vector_kg):
    with pytest.raises(ScalingError):
        target_weight(vector_kg, (1, 1))


def test_block_weight_examples():
    xi = bg(0, 0, "xi")
    m2 = bg(0, 2, "m2")
    assert block_weight("curvature", 0) == 2
    assert block_weight("background", 1, xi) == 1
    assert block_weight("background", 0, m2) == 2
    with pytest.raises(ScalingError):
        block_weight("background", 0)
    with pytest.raises(ScalingError):
        block_weight("curvature", -1)


def test_max_derivative_order_examples(vector_kg):
    assert max_derivative_order(vector_kg, 2) == 2
    assert max_derivative_order(vector_kg, 0) == 0
    assert max_derivative_order(vector_kg, -1) == -1


def test_floats_refused():
    with pytest.raises(ScalingError):
        as_fraction(0.5)
    assert as_fraction("3/4") == Fraction(3, 4)
    with pytest.raises(ScalingError):
        as_fraction("x/2")


# -- homogeneity ---------------------------------------------------------------

ETA = (-1, 1, 1, 1)


def inverse_metric(lam, seed):
    # g -> λ^-2 η, so g^{ab} = λ^2 η^{ab}
    g = [Fraction(e) * lam ** -2 for e in ETA]
    return DenseTensor.from_values([[1 / g[i] if i == j else 0 for j in range(4)] for i in range(4)])


def constant(lam, seed):
    return DenseTensor.scalar(seed + 7, 4)


def mass_times_inverse_metric(lam, seed):
    m2 = Fraction(seed + 3) * lam**2
    return inverse_metric(lam, seed).scale(m2)


def test_homogeneity_examples():
    lams = exact_lambdas([2])
    assert check_homogeneity(inverse_metric, 2, lams)
    assert check_homogeneity(constant, 0, lams)
    assert check_homogeneity(mass_times_inverse_metric, 4, lams)


def test_homogeneity_rejects_wrong_degree():
    lams = exact_lambdas([2])
    assert not check_homogeneity(inverse_metric, 0, lams)
    assert not check_homogeneity(mass_times_inverse_metric, 2, lams)


def test_fractional_degrees_use_exact_lambdas():
    assert lambda_exponent([Fraction(1, 2), Fraction(2, 3)]) == 6
    for lam in exact_lambdas([Fraction(1, 2), Fraction(2, 3)]):
        assert scale_factor(lam, Fraction(1, 2)) is not None
        assert scale_factor(lam, Fraction(2, 3)) ** 3 == lam**2
    with pytest.raises(ScalingError):
        scale_factor(2, Fraction(1, 2))


@settings(max_examples=30, deadline=None)
@given(st.integers(-3, 3), st.integers(-3, 3))
def test_homogeneity_composes_under_products(a, b):
    def e1(lam, seed):
        return DenseTensor.from_values([seed + 1, 2]).scale(lam**a)

    def e2(lam, seed):
        return DenseTensor.from_values([3, seed - 5]).scale(lam**b)

    def prod(lam, seed):
        return e1(lam, seed).tensor(e2(lam, seed))

    lams = exact_lambdas([a, b])
    assert check_homogeneity(e1, a, lams) and check_homogeneity(e2, b, lams)
    assert check_homogeneity(prod, a + b, lams)


# -- properties ----------------------------------------------------------------


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 4), st.fractions(min_value=-4, max_value=4, max_denominator=4), st.integers(0, 5))
def test_admissible_blocks_have_nonnegative_weight(rank, degree, nderiv):
    b = bg(rank, degree)
    if rank + degree >= 0:
        assert block_weight("background", nderiv, b) >= 0


field_lists = st.lists(
    st.tuples(st.integers(0, 2), st.fractions(min_value=-2, max_value=2, max_denominator=3)),
    min_size=1, max_size=3)


@settings(max_examples=60, deadline=None)
@given(field_lists, st.data())
def test_target_weight_is_linear(fields, data):
    m = make_model([("f%d" % i, r, d) for i, (r, d) in enumerate(fields)])
    n = len(fields)
    q1 = data.draw(st.lists(st.integers(0, 3), min_size=n, max_size=n))
    q2 = data.draw(st.lists(st.integers(0, 3), min_size=n, max_size=n))
    both = [a + b for a, b in zip(q1, q2)]
    assert target_weight(m, both) == target_weight(m, q1) + target_weight(m, q2)
    assert physical_degree(m, both) == physical_degree(m, q1) + physical_degree(m, q2)
