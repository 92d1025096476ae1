"""Polynomial invariants of marginal backgrounds.

A symmetric 2-tensor ``ξ_ab`` with one index raised by ``η^-1`` is an
endomorphism that is self-adjoint for ``η``. Its conjugation invariants are
generated by the traces ``tr ξ^p`` for ``p = 1..n``; higher traces follow
from Newton's identities and Cayley-Hamilton. Region labels away from the
discriminant locus are computed exactly: rational factorization, Sturm
counts and isolating intervals, never floating eigen-solvers.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import sympy

from .contraction import OutputSignature, enumerate_schemes, reduce_basis
from .generators import BACKGROUND, Block, Monomial
from .scaling import ScalingError, as_fraction


class InvariantError(ValueError):
    pass


def _frac_matrix(rows):
    return tuple(tuple(as_fraction(x) if not isinstance(x, (int, np.integer)) else Fraction(int(x))
                       for x in row) for row in rows)


def _matmul(a, b):
    n, k = len(a), len(b[0])
    return tuple(tuple(sum((a[i][j] * b[j][c] for j in range(len(b))), Fraction(0)) for c in range(k))
                 for i in range(n))


def _identity(n):
    return tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))


def minkowski_signs(n):
    return (-1,) + (1,) * (n - 1)


@dataclass(frozen=True)
class EndoValue:
    """``ξ^a_b`` as an exact n×n matrix, self-adjoint for ``η = diag(-1, 1, ..., 1)``."""

    matrix: tuple

    def __post_init__(self):
        m = _frac_matrix(self.matrix)
        n = len(m)
        if n == 0 or any(len(r) != n for r in m):
            raise InvariantError("endomorphism must be a non-empty square matrix")
        eta = minkowski_signs(n)
        for i in range(n):
            for j in range(i + 1, n):
                if eta[i] * m[i][j] != eta[j] * m[j][i]:
                    raise InvariantError("η·ξ is not symmetric")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_lower(cls, xi):
        """Raise the first index of a symmetric ``ξ_ab`` with ``η^-1``."""
        low = _frac_matrix(xi)
        n = len(low)
        if any(low[i][j] != low[j][i] for i in range(n) for j in range(n)):
            raise InvariantError("ξ_ab must be symmetric")
        eta = minkowski_signs(n)
        return cls(tuple(tuple(eta[i] * x for x in row) for i, row in enumerate(low)))

    @property
    def dim(self):
        return len(self.matrix)

    def lower(self):
        eta = minkowski_signs(self.dim)
        return tuple(tuple(eta[i] * x for x in row) for i, row in enumerate(self.matrix))

    def conjugate(self, u):
        """``u^-1 ξ u``."""
        u = _frac_matrix(u)
        ui = sympy.Matrix(u).inv()
        ui = tuple(tuple(Fraction(int(x.p), int(x.q)) for x in ui.row(i)) for i in range(self.dim))
        return EndoValue(_matmul(_matmul(ui, self.matrix), u))

    def sympy(self):
        return sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) for x in row] for row in self.matrix])


def _power_traces(x, top):
    # tr x^p for p = 0..top by repeated multiplication
    n = x.dim
    out = [Fraction(n)]
    p = _identity(n)
    for _ in range(top):
        p = _matmul(p, x.matrix)
        out.append(sum((p[i][i] for i in range(n)), Fraction(0)))
    return out


def power_trace(x, p):
    """``tr ξ^p`` by direct matrix multiplication."""
    return _power_traces(x, p)[p]


def trace_invariants(x):
    """``(tr ξ, tr ξ², ..., tr ξⁿ)``."""
    return tuple(_power_traces(x, x.dim)[1:])


def elementary_from_traces(inv):
    """Characteristic coefficients ``e_1..e_n`` from power sums (Newton's identities)."""
    inv = [as_fraction(v) if not isinstance(v, Fraction) else v for v in inv]
    e = [Fraction(1)]
    for k in range(1, len(inv) + 1):
        s = sum(((-1) ** (i - 1) * e[k - i] * inv[i - 1] for i in range(1, k + 1)), Fraction(0))
        e.append(s / k)
    return e


def reduce_trace(p, inv):
    """``tr ξ^p`` for ``n < p <= 2n`` from the first ``n`` traces.

    Uses ``ξⁿ = Σ (-1)^{i-1} e_i ξ^{n-i}`` (Cayley-Hamilton), traced and
    iterated, with ``tr ξ⁰ = n``.
    """
    n = len(inv)
    if p <= n:
        raise InvariantError("tr ξ^%d needs no reduction for n=%d" % (p, n))
    if p > 2 * n:
        raise InvariantError("reduction implemented for p <= 2n")
    e = elementary_from_traces(inv)
    t = [Fraction(n)] + [v if isinstance(v, Fraction) else as_fraction(v) for v in inv]
    for m in range(n + 1, p + 1):
        t.append(sum(((-1) ** (i - 1) * e[i] * t[m - i] for i in range(1, n + 1)), Fraction(0)))
    return t[p]


def trace_relation(p, n):
    """``tr ξ^p`` as a sympy polynomial in ``t1..tn`` (the lower traces)."""
    ts = sympy.symbols("t1:%d" % (n + 1))
    e = [sympy.Integer(1)]
    for k in range(1, n + 1):
        e.append(sympy.expand(sum((-1) ** (i - 1) * e[k - i] * ts[i - 1] for i in range(1, k + 1)) / k))
    t = [sympy.Integer(n)] + list(ts)
    for m in range(n + 1, p + 1):
        t.append(sympy.expand(sum((-1) ** (i - 1) * e[i] * t[m - i] for i in range(1, n + 1))))
    return t[p], ts


def discriminant(x):
    """``det(tr ξ^{i+j-2})``, the product of squared eigenvalue differences."""
    n = x.dim
    t = _power_traces(x, 2 * n - 2)
    h = sympy.Matrix(n, n, lambda i, j: sympy.Rational(t[i + j].numerator, t[i + j].denominator))
    d = h.det(method="bareiss")
    return Fraction(int(d.p), int(d.q))


def charpoly(x):
    lam = sympy.Symbol("lam")
    return sympy.Poly(x.sympy().charpoly(lam).as_expr(), lam)


# ---------------------------------------------------------------------------
# orbit regions


@dataclass(frozen=True)
class OrbitRegion:
    """``kind`` is ``Z0``, ``regular`` or ``indeterminate``.

    For regular points ``pattern`` lists the causal character of the
    eigenvectors (``t`` timelike, ``s`` spacelike) in increasing eigenvalue
    order; it labels the connected piece of the complement of ``disc = 0``.
    """

    kind: str
    pattern: tuple = ()
    reason: str = ""

    @property
    def label(self):
        if self.kind == "Z0":
            return "Z0"
        if self.kind == "regular":
            return "Z[%s]" % ",".join(self.pattern)
        return "Indeterminate(%s)" % self.reason

    def __str__(self):
        return self.label


def _sign_at_root(q, f, interval):
    """Sign of ``q`` at the unique root of ``f`` in the isolating interval."""
    a, b = interval
    if q.is_zero:
        return 0
    while True:
        # once q has no root on [a, b] it has constant sign there
        if q.count_roots(a, b) == 0:
            s = q.eval(a)
            return 1 if s > 0 else -1
        a, b = f.refine_root(a, b, eps=(b - a) / 4)


def orbit_region(x):
    if discriminant(x) == 0:
        return OrbitRegion("Z0")
    f = charpoly(x)
    n = x.dim
    if f.count_roots() != n:
        return OrbitRegion("indeterminate", reason="complex")
    lam = f.gen
    # spectral projector onto the λ-eigenline: (f(ξ)/(ξ-λ)) / f'(λ). Its
    # η-trace is |η v|² / η(v, v), so its sign is the causal sign of v.
    y = sympy.Symbol("y")
    quot = sympy.Poly(sympy.cancel((f.as_expr() - f.as_expr().subs(lam, y)) / (lam - y)), lam)
    eta = minkowski_signs(n)
    traces = []
    p = sympy.eye(n)
    xs = x.sympy()
    for _ in range(n):
        traces.append(sum(eta[i] * p[i, i] for i in range(n)))
        p = p * xs
    # coefficient of lam^k in quot is a polynomial in y
    coeffs = quot.all_coeffs()[::-1]
    tq = sympy.Poly(sympy.expand(sum(c * traces[k] for k, c in enumerate(coeffs))), y)
    tq = sympy.Poly(tq.as_expr().subs(y, lam), lam)
    weight = tq * f.diff(lam)
    pattern = []
    for interval, _ in f.intervals():
        s = _sign_at_root(weight, f, interval)
        if s == 0:
            raise InvariantError("null eigenvector at a regular point")
        # η(v, v) < 0 is timelike in signature (-, +, ..., +)
        pattern.append("t" if s < 0 else "s")
    return OrbitRegion("regular", tuple(pattern))


# ---------------------------------------------------------------------------
# Lorentz samples


def cayley_lorentz(a):
    """``u = (I - X)^-1 (I + X)`` with ``X = η A`` for antisymmetric ``A``.

    ``X`` is η-antisymmetric, so ``u^T η u = η``.
    """
    a = sympy.Matrix(a)
    n = a.rows
    if a.T != -a:
        raise InvariantError("Cayley generator needs an antisymmetric matrix")
    eta = sympy.diag(*minkowski_signs(n))
    xm = eta * a
    i = sympy.eye(n)
    if (i - xm).det() == 0:
        raise InvariantError("I - ηA is singular")
    u = (i - xm).inv() * (i + xm)
    return tuple(tuple(Fraction(int(v.p), int(v.q)) for v in u.row(r)) for r in range(n))


def random_lorentz(n, rng, spread=3, improper=False):
    """Exact rational element of O(1, n-1) from a random Cayley generator."""
    while True:
        a = sympy.zeros(n, n)
        for i in range(n):
            for j in range(i + 1, n):
                v = sympy.Rational(int(rng.integers(-spread, spread + 1)), int(rng.integers(1, 3)))
                a[i, j], a[j, i] = v, -v
        try:
            u = cayley_lorentz(a)
        except InvariantError:
            continue
        if improper:
            u = tuple(tuple(-v if c == n - 1 else v for c, v in enumerate(row)) for row in u)
        return u


def is_lorentz(u):
    n = len(u)
    eta = minkowski_signs(n)
    for i in range(n):
        for j in range(n):
            if sum(u[k][i] * eta[k] * u[k][j] for k in range(n)) != (eta[i] if i == j else 0):
                return False
    return True


def random_self_adjoint(n, rng, spread=5):
    """Random ``ξ^a_b`` with small integer entries in ``ξ_ab``."""
    low = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            low[i][j] = low[j][i] = int(rng.integers(-spread, spread + 1))
    return EndoValue.from_lower(low)


# ---------------------------------------------------------------------------
# invariant bases


@dataclass
class InvariantBasis:
    terms: list
    generators: list
    decomposable: list
    witness: dict


def _components(term):
    """Number of connected pieces of the pairing graph of blocks (and ε)."""
    owners = [i for i, o in enumerate(term.scheme.owners) if o[0] != "o"]
    parent = {i: i for i in owners}

    def find(v):
        while parent[v] != v:
            v = parent[v]
        return v

    for a, b in term.scheme.pairs:
        if a[0] in parent and b[0] in parent:
            parent[find(a[0])] = find(b[0])
    return len({find(i) for i in owners})


def _connected(term):
    return _components(term) <= 1


def _degree_multisets(fields, d, start=0):
    if d == 0:
        yield ()
        return
    for i in range(start, len(fields)):
        for rest in _degree_multisets(fields, d - 1, i):
            yield (fields[i],) + rest


def scalar_invariant_basis(m, fields, max_degree, samples=5, seed=0):
    """Independent complete contractions of marginal fields up to ``max_degree``.

    Terms are reduced linearly (each is a polynomial in the field values);
    connected contractions are algebra generator candidates and products of
    several connected pieces are reported separately as decomposable.
    """
    fields = [m.background(f) if isinstance(f, str) else f for f in fields]
    for f in fields:
        if not f.marginal:
            raise ScalingError("background %s is not marginal" % f.name)
    if max_degree < 0:
        raise InvariantError("max_degree must be non-negative")
    blocks = [Block(BACKGROUND, 0, f) for f in fields]
    sig = OutputSignature()
    terms = []
    for d in range(max_degree + 1):
        found = []
        for combo in _degree_multisets(blocks, d):
            found.extend(enumerate_schemes(Monomial(combo), sig, m.oriented, m.dim))
        # products of lower invariants first, so a dependent connected
        # contraction (tr ξ^{n+1}) is the one rejected
        found.sort(key=lambda t: -_components(t))
        terms.extend(found)
    const = [t for t in terms if not t.monomial.blocks]
    rest = [t for t in terms if t.monomial.blocks]
    basis = reduce_basis(rest, samples=samples, seed=seed) if rest else None
    kept = const[:1] + (basis.terms if basis else [])
    gens = [t for t in kept if t.monomial.blocks and _connected(t)]
    dec = [t for t in kept if t.monomial.blocks and not _connected(t)]
    return InvariantBasis(kept, gens, dec, basis.witness if basis else {"seed": seed, "groups": []})


def discriminant_shape(n):
    """Size and trace degrees of the Hankel matrix defining the discriminant."""
    return {"matrix": [n, n], "max_trace_power": 2 * n - 2,
            "polynomial_degree": n * (n - 1)}
