"""Seeded property suites shared by ``wickgen check`` and the test-suite.

Each identity check takes a seed and returns True/False; a suite runs a
check over a range of seeds and reports the failing ones.
"""

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

import numpy as np

from .tensor import (
    CONTRA,
    CO,
    DenseTensor,
    SymmetryType,
    contract_l,
    project_symmetry,
    random_in_symmetry,
    sym_power,
    sym_product,
    transform,
)


@dataclass
class SuiteResult:
    name: str
    passed: int = 0
    failed: list = field(default_factory=list)

    @property
    def total(self):
        return self.passed + len(self.failed)

    @property
    def ok(self):
        return not self.failed

    def record(self, label, ok):
        if ok:
            self.passed += 1
        else:
            self.failed.append(label)


def run_seeded(name, check, seeds):
    res = SuiteResult(name)
    for s in seeds:
        res.record("seed %d" % s, check(s))
    return res


# ---------------------------------------------------------------------------
# contraction-product identities


def _vector(dim, rng, variance=CONTRA, spread=4, support=None):
    v = rng.integers(-spread, spread + 1, size=dim)
    if support is not None:
        mask = np.zeros(dim, dtype=np.int64)
        mask[support] = 1
        v = v * mask
    return DenseTensor(v.astype(np.int64), 1, variance=(variance,))


def _random_symmetric(rank, dim, rng, variance):
    t = random_in_symmetry(SymmetryType.symmetric(rank), dim, int(rng.integers(0, 2**32)), spread=3)
    if rank == 0:
        return t
    return DenseTensor(t.num, t.den, dim, (variance,) * rank)


def _scalar_value(t):
    return Fraction(int(t.num), t.den)


def check_commutation(seed):
    """h ·_s (g ·_l f) == g ·_l (h ·_s f) on random symmetric tensors."""
    rng = np.random.default_rng([seed, 1])
    dim = int(rng.integers(1, 4))
    k = int(rng.integers(2, 5))
    l = int(rng.integers(1, k))
    s = int(rng.integers(1, k - l + 1))
    h = _random_symmetric(s, dim, rng, CO)
    g = _random_symmetric(l, dim, rng, CO)
    f = _random_symmetric(k, dim, rng, CONTRA)
    return contract_l(h, contract_l(g, f, l), s) == contract_l(g, contract_l(h, f, s), l)


def _powers(fs, ps):
    return [sym_power(f, p) for f, p in zip(fs, ps)]


def _product(factors, dim):
    out = None
    for t in factors:
        if out is None:
            out = t
        elif t.rank == 0:
            out = out.scale(_scalar_value(t))
        elif out.rank == 0:
            out = t.scale(_scalar_value(out))
        else:
            out = sym_product(out, t)
    return out if out is not None else DenseTensor.scalar(1, dim)


def check_derivation(seed):
    """g ·_1 (f_1^{p_1} ⊙ ... ⊙ f_N^{p_N}) is the sum of single-factor contractions."""
    rng = np.random.default_rng([seed, 2])
    dim = int(rng.integers(1, 4))
    nf = int(rng.integers(1, 4))
    ps = [int(rng.integers(1, 3)) for _ in range(nf)]
    fs = [_vector(dim, rng) for _ in range(nf)]
    g = _vector(dim, rng, CO)
    lhs = contract_l(g, _product(_powers(fs, ps), dim), 1)
    rhs = None
    for i in range(nf):
        factors = _powers(fs, ps)
        factors[i] = contract_l(g, factors[i], 1)
        term = _product(factors, dim)
        rhs = term if rhs is None else rhs + term
    return lhs == rhs


def check_multinomial(seed):
    """g^l ·_l f^P expands with coefficients prod binom(p_i, q_i)."""
    rng = np.random.default_rng([seed, 3])
    dim = int(rng.integers(1, 4))
    nf = int(rng.integers(1, 4))
    ps = [int(rng.integers(1, 3)) for _ in range(nf)]
    l = int(rng.integers(1, sum(ps) + 1))
    fs = [_vector(dim, rng) for _ in range(nf)]
    g = _vector(dim, rng, CO)
    gl = sym_power(g, l)
    lhs = contract_l(gl, _product(_powers(fs, ps), dim), l)
    rhs = None
    for q in itertools.product(*(range(p + 1) for p in ps)):
        if sum(q) != l:
            continue
        c = 1
        for p, qi in zip(ps, q):
            c *= comb(p, qi)
        inner = contract_l(gl, _product(_powers(fs, q), dim), l)
        rest = _product(_powers(fs, [p - qi for p, qi in zip(ps, q)]), dim)
        term = rest.scale(c * _scalar_value(inner))
        rhs = term if rhs is None else rhs + term
    return lhs == rhs


def check_orthogonality(seed):
    """h^Q ·_l f^P vanishes for P != Q when factors live in complementary summands.

    Also requires the P = Q contraction to be nonzero for at least one draw,
    so a contraction that is identically zero does not pass.
    """
    rng = np.random.default_rng([seed, 4])
    sizes = [int(rng.integers(1, 3)) for _ in range(int(rng.integers(2, 4)))]
    dim = sum(sizes)
    offs = np.cumsum([0] + sizes)
    supports = [list(range(offs[i], offs[i + 1])) for i in range(len(sizes))]
    l = int(rng.integers(1, 4))
    qs = [q for q in itertools.product(range(l + 1), repeat=len(sizes)) if sum(q) == l]
    q = qs[int(rng.integers(0, len(qs)))]
    # h^Q: symmetric product of covectors, q_i of them supported on summand i
    h = _product([_vector(dim, rng, CO, support=supports[i]) for i, qi in enumerate(q) for _ in range(qi)], dim)
    fs = [_vector(dim, rng, support=supports[i]) for i in range(len(sizes))]
    zero = DenseTensor.scalar(0, dim)
    for p in qs:
        val = contract_l(h, _product(_powers(fs, p), dim), l)
        if tuple(p) != tuple(q) and val != zero:
            return False
    diag = contract_l(h, _product(_powers(fs, q), dim), l)
    if diag == zero:
        # degenerate draw (a zero pairing); retry deterministically
        return check_orthogonality(seed + 10**6)
    return True


def check_projection(seed):
    """project_symmetry is idempotent and fixes in-subspace samples."""
    rng = np.random.default_rng([seed, 5])
    dim = int(rng.integers(2, 4))
    sym = [SymmetryType.symmetric(2), SymmetryType.curvature(0), SymmetryType.antisymmetric(2),
           SymmetryType.background(2, 1, "symmetric")][seed % 4]
    t = DenseTensor(rng.integers(-5, 6, size=(dim,) * sym.rank).astype(np.int64))
    p = project_symmetry(t, sym)
    x = random_in_symmetry(sym, dim, seed)
    return project_symmetry(p, sym) == p and project_symmetry(x, sym) == x


def check_group_action(seed):
    """transform(transform(t, u), v) == transform(t, v u) for unimodular u, v."""
    from .contraction import random_unimodular

    rng = np.random.default_rng([seed, 6])
    dim = int(rng.integers(2, 4))
    rank = int(rng.integers(1, 4))
    var = tuple(CO if rng.integers(0, 2) else CONTRA for _ in range(rank))
    t = DenseTensor(rng.integers(-4, 5, size=(dim,) * rank).astype(np.int64), 1, dim, var)
    u = random_unimodular(dim, rng)
    v = random_unimodular(dim, rng)
    return transform(transform(t, u), v) == transform(t, v.dot(u))


# ---------------------------------------------------------------------------
# invariant-theory checks


def check_lorentz_invariance(seed, dim=4):
    """Trace invariants and discriminant are unchanged by a rational Lorentz conjugation."""
    from .invariants import discriminant, random_lorentz, random_self_adjoint, trace_invariants

    rng = np.random.default_rng([seed, 7])
    x = random_self_adjoint(dim, rng)
    u = random_lorentz(dim, rng, improper=bool(seed % 2))
    y = x.conjugate(u)
    return trace_invariants(x) == trace_invariants(y) and discriminant(x) == discriminant(y)


def check_trace_reduction(seed, dim=4):
    """tr ξ^5 and tr ξ^6 from the first n traces match direct traces."""
    from .invariants import power_trace, random_self_adjoint, reduce_trace, trace_invariants

    rng = np.random.default_rng([seed, 8])
    x = random_self_adjoint(dim, rng)
    inv = trace_invariants(x)
    return all(reduce_trace(p, inv) == power_trace(x, p) for p in (dim + 1, dim + 2))


def check_discriminant_product(seed, dim=4):
    """On conjugated diagonal matrices the discriminant is prod_{i<j} (λ_i - λ_j)^2."""
    from .invariants import EndoValue, discriminant, random_lorentz

    rng = np.random.default_rng([seed, 9])
    lam = [Fraction(int(rng.integers(-6, 7)), int(rng.integers(1, 4))) for _ in range(dim)]
    x = EndoValue(tuple(tuple(lam[i] if i == j else Fraction(0) for j in range(dim)) for i in range(dim)))
    x = x.conjugate(random_lorentz(dim, rng))
    want = Fraction(1)
    for i in range(dim):
        for j in range(i + 1, dim):
            want *= (lam[i] - lam[j]) ** 2
    return discriminant(x) == want


def check_expansion(seed):
    """Component expansion with binomial weights equals the direct contraction (|P| <= 4)."""
    from .expansion import verify_expansion_consistency

    rng = np.random.default_rng([seed, 10])
    nf = int(rng.integers(1, 3))
    total = int(rng.integers(1, 5))
    cuts = sorted(int(c) for c in rng.integers(0, total + 1, size=nf - 1))
    p = [b - a for a, b in zip([0] + cuts, cuts + [total])]
    ranks = tuple(int(rng.integers(0, 2)) for _ in range(nf))
    dim = int(rng.integers(1, 3))
    return verify_expansion_consistency(tuple(p), seed, ranks=ranks, dim=dim)


# ---------------------------------------------------------------------------
# suites


def core_suite(seed=0, count=100, expansion_count=25):
    base = range(seed, seed + count)
    out = [
        run_seeded("commutation", check_commutation, base),
        run_seeded("derivation", check_derivation, base),
        run_seeded("multinomial", check_multinomial, base),
        run_seeded("orthogonality", check_orthogonality, base),
        run_seeded("projection", check_projection, base),
        run_seeded("group action", check_group_action, base),
        run_seeded("expansion consistency", check_expansion, range(seed, seed + expansion_count)),
        run_seeded("trace reduction", check_trace_reduction, base),
        run_seeded("discriminant product", check_discriminant_product, range(seed, seed + 20)),
    ]
    return out


def fixture_bases(samples=5, seed=0, names=None):
    """Enumerated bases of every fixture component, as ``{(name, Q): (model, result)}``."""
    from .bundled import FIXTURES, expected_terms, fixture_model
    from .pipeline import enumerate_component

    out = {}
    for name in names or FIXTURES:
        m = fixture_model(name)
        for comp in expected_terms(name)["components"]:
            q = tuple(comp["Q"])
            out[(name, q)] = (m, enumerate_component(m, q, comp.get("marginal_cap", "auto"), samples, seed))
    return out


def equivariance_suite(seed=0, trials=50, lorentz_count=50, bases=None):
    from .contraction import equivariance_check

    res = SuiteResult("equivariance")
    for (name, q), (_, r) in sorted((bases or fixture_bases(seed=seed)).items()):
        for i, t in enumerate(r.terms):
            res.record("%s Q=%s term %d %s" % (name, q, i + 1, t.display), equivariance_check(t, trials, seed + i))
    return [res, run_seeded("Lorentz invariance", check_lorentz_invariance, range(seed, seed + lorentz_count))]


def scaling_suite(seed=0, bases=None):
    from .contraction import homogeneity_evaluator
    from .scaling import check_homogeneity, exact_lambdas, physical_degree

    res = SuiteResult("homogeneity")
    for (name, q), (m, r) in sorted((bases or fixture_bases(seed=seed)).items()):
        deg = physical_degree(m, q)
        lams = exact_lambdas([b.phys_weight for t in r.terms for b in t.monomial.all_blocks] + [deg])
        for i, t in enumerate(r.terms):
            ok = check_homogeneity(homogeneity_evaluator(t), deg, lams, seeds=(seed, seed + 1))
            res.record("%s Q=%s term %d %s" % (name, q, i + 1, t.display), ok)
    return [res]


def fixtures_suite(samples=5, seed=0):
    from .bundled import FIXTURES, check_fixture

    res = SuiteResult("fixtures")
    for name in FIXTURES:
        for c in check_fixture(name, samples, seed):
            res.record("%s (%s)" % (c.name, c.detail), c.passed)
    return [res]


SUITES = ("core", "scaling", "equivariance", "fixtures")


def run_suite(name, seed=0, samples=5):
    if name == "core":
        return core_suite(seed)
    if name == "fixtures":
        return fixtures_suite(samples, seed)
    if name in ("scaling", "equivariance"):
        bases = fixture_bases(samples, seed)
        return scaling_suite(seed, bases) if name == "scaling" else equivariance_suite(seed, bases=bases)
    if name == "all":
        bases = fixture_bases(samples, seed)
        return (core_suite(seed) + scaling_suite(seed, bases) + equivariance_suite(seed, bases=bases)
                + fixtures_suite(samples, seed))
    raise ValueError("unknown suite %r (choose from %s, all)" % (name, ", ".join(SUITES)))
