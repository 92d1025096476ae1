import pytest

from wickgen.contraction import OutputSignature, enumerate_schemes, in_span, reduce_basis_mixed
from wickgen.generators import Block, Monomial
from wickgen.notation import Expression, NotationError

SYM2 = OutputSignature.symmetric(2)


def expr(text, model, letters="ab", sig=SYM2):
    return Expression(text, model, letters, sig)


def test_expression_matches_enumerated_term(vector_kg):
    m2 = Block("background", 0, vector_kg.background("m2"))
    (term,) = enumerate_schemes(Monomial((m2,)), SYM2, False, 4)
    e = expr("g[ab] m2[]", vector_kg)
    assert e.monomial == term.monomial
    assert in_span([term], [e]) == [True]
    assert in_span([term], [expr("3/2 g[ab] m2[]", vector_kg)]) == [True]


def test_curvature_traces(vector_kg):
    s0 = Block("curvature", 0)
    terms = enumerate_schemes(Monomial((s0,)), SYM2, False, 4)
    ric, gr = terms[0], terms[1]
    assert in_span([ric], [expr("S[ccab]", vector_kg)]) == [True]
    assert in_span([gr], [expr("g[ab] S[ccdd]", vector_kg)]) == [True]
    assert in_span([ric], [expr("g[ab] S[ccdd]", vector_kg)]) == [False]


def test_sums_with_coefficients(vector_kg):
    a = expr("S[ccab]", vector_kg)
    b = expr("g[ab] S[ccdd]", vector_kg)
    both = expr("S[ccab] - 1/2 g[ab] S[ccdd]", vector_kg)
    assert len(reduce_basis_mixed([a, b, both])) == 2


def test_derivative_slots(vector_kg):
    e = expr("xi[;a] xi[;b]", vector_kg)
    assert [b.nderiv for b in e.monomial.blocks] == [1, 1]
    assert expr("g[ab] xi[;cc]", vector_kg).monomial.blocks[0].nderiv == 2


@pytest.mark.parametrize("text", [
    "g[ab] nope[]",           # unknown factor
    "g[ab] xi[;cc] xi[;c]",   # index used three times
    "g[ac]",                  # free indices do not match the output
    "g[ab] m2[] + S[ccab]",   # summands with different blocks
    "S[abc]",                 # wrong slot count
])
def test_malformed_expressions(vector_kg, text):
    with pytest.raises(NotationError):
        expr(text, vector_kg)


def test_output_rank_must_match(vector_kg):
    with pytest.raises(NotationError):
        Expression("g[ab]", vector_kg, "ab", OutputSignature.symmetric(4))
