"""Component-wise mixing of Wick powers under a change of renormalization.

The multiplet space ``V = ⊕ W_i`` with ``W_i = T^{k_i}`` is flattened into
one vector space of dimension ``Σ n^{k_i}``; a field ``f_i`` is a vector
supported on block ``i`` and a coefficient ``C_l`` is a symmetric covariant
rank-``l`` tensor over ``V``. Its component ``C_l^R`` is the restriction to
index tuples that hit block ``i`` exactly ``r_i`` times.

For ``|P| = k`` the new Wick component is

    Ã^P(f^P) = A^P(f^P)
        + Σ_{l<k} Σ_{|Q|=l, Q<=P} Π binom(p_i, q_i)
              (C_{k-l}^{P-Q} ·_{k-l} f^{P-Q}) A^Q(f^Q)

and :func:`expand_component` returns the exact numbers in that sum.
"""

from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial, prod

import numpy as np

from .tensor import CO, CONTRA, DenseTensor, MultiIndex, contract_l, sym_product


class ExpansionError(ValueError):
    pass


@dataclass(frozen=True)
class MultipletSpace:
    """Flattened ``V = ⊕ T^{k_i}`` in spacetime dimension ``dim``."""

    ranks: tuple
    dim: int

    def __post_init__(self):
        object.__setattr__(self, "ranks", tuple(int(k) for k in self.ranks))
        if not self.ranks:
            raise ExpansionError("empty multiplet")

    @property
    def sizes(self):
        return tuple(self.dim ** k for k in self.ranks)

    @property
    def offsets(self):
        out, acc = [], 0
        for s in self.sizes:
            out.append(acc)
            acc += s
        return tuple(out)

    @property
    def total(self):
        return sum(self.sizes)

    def block_of(self):
        return np.repeat(np.arange(len(self.ranks)), self.sizes)

    def embed_field(self, i, f):
        """``f_i`` (contravariant rank ``k_i``) as a vector in ``V``."""
        if f.dim != self.dim or f.rank != self.ranks[i]:
            raise ExpansionError("field %d: expected rank %d in dim %d, got rank %d in dim %d"
                                 % (i, self.ranks[i], self.dim, f.rank, f.dim))
        num = np.zeros(self.total, dtype=object)
        off = self.offsets[i]
        num[off:off + self.sizes[i]] = np.asarray(f.num, dtype=object).reshape(-1)
        return DenseTensor(num, f.den, variance=(CONTRA,))

    def pattern_mask(self, r):
        """Boolean mask of rank-``|R|`` index tuples hitting block ``i`` exactly ``r_i`` times."""
        r = MultiIndex(r)
        l = r.norm
        if l == 0:
            return np.array(True)
        blocks = self.block_of()
        mask = np.ones((self.total,) * l, dtype=bool)
        for i, ri in enumerate(r):
            hit = (blocks == i).astype(np.int64)
            cnt = np.zeros((self.total,) * l, dtype=np.int64)
            for s in range(l):
                shape = [1] * l
                shape[s] = self.total
                cnt = cnt + hit.reshape(shape)
            mask &= cnt == ri
        return mask

    def embed_component(self, r, t):
        """Spacetime tensor ``C^R`` (covariant, rank ``Σ r_i k_i``) as a symmetric tensor over ``V``.

        Slots of ``t`` run over ``r_1`` copies of field 1, then ``r_2`` copies
        of field 2 and so on; ``t`` must be symmetric under exchanging copies
        of one field. The result restricted to that block order equals ``t``.
        """
        r = MultiIndex(r)
        if len(r) != len(self.ranks):
            raise ExpansionError("component %s does not match %d fields" % (tuple(r), len(self.ranks)))
        want = sum(ri * k for ri, k in zip(r, self.ranks))
        if t.dim != self.dim or t.rank != want:
            raise ExpansionError("component %s: expected rank %d in dim %d, got rank %d in dim %d"
                                 % (tuple(r), want, self.dim, t.rank, t.dim))
        if not _copy_symmetric(t, r, self.ranks):
            raise ExpansionError("component %s is not symmetric under exchange of field copies" % (tuple(r),))
        l = r.norm
        if l == 0:
            return DenseTensor(np.array(int(t.num), dtype=object), t.den, dim=self.total)
        # reshape into one slot per field copy, indexed inside its block
        shape = []
        for ri, k in zip(r, self.ranks):
            shape += [self.dim ** k] * ri
        small = np.asarray(t.num, dtype=object).reshape(shape)
        big = np.zeros((self.total,) * l, dtype=object)
        sl = []
        for i, ri in enumerate(r):
            sl += [slice(self.offsets[i], self.offsets[i] + self.sizes[i])] * ri
        big[tuple(sl)] = small
        mult = factorial(l) // prod(factorial(ri) for ri in r)
        return DenseTensor(big, t.den, self.total, (CO,) * l).symmetrize().scale(mult)


def _copy_symmetric(t, r, ranks):
    # exchange of consecutive copies of the same field
    start = 0
    for ri, k in zip(r, ranks):
        for c in range(ri - 1):
            perm = list(range(t.rank))
            a = start + c * k
            for j in range(k):
                perm[a + j], perm[a + k + j] = a + k + j, a + j
            if not np.array_equal(t.num, np.transpose(t.num, perm)):
                return False
        start += ri * k
    return True


class CoefficientTable:
    """Counterterm components ``C_l^R`` as symmetric covariant tensors over ``V``.

    ``C_1`` is identically zero; supplying a nonzero order-1 entry is an
    error. Missing entries are errors at lookup time, not zero.
    """

    def __init__(self, space, entries=None):
        self.space = space
        self._entries = {}
        for (l, r), t in (entries or {}).items():
            self.set(l, r, t)

    def set(self, l, r, t):
        r = MultiIndex(r)
        if r.norm != l or len(r) != len(self.space.ranks):
            raise ExpansionError("entry (%d, %s) has the wrong order or length" % (l, tuple(r)))
        if t.dim != self.space.total or t.rank != l or any(v != CO for v in t.variance):
            raise ExpansionError("entry (%d, %s) must be covariant rank %d over V" % (l, tuple(r), l))
        if not t.is_symmetric():
            raise ExpansionError("entry (%d, %s) is not symmetric" % (l, tuple(r)))
        outside = ~self.space.pattern_mask(r)
        if np.asarray(t.num)[outside].any():
            raise ExpansionError("entry (%d, %s) has components outside its block signature" % (l, tuple(r)))
        if l == 1 and not t.is_zero():
            raise ExpansionError("C_1 must vanish")
        self._entries[l, r] = t

    def set_component(self, r, t):
        """Set ``C^R`` from its spacetime tensor (see :meth:`MultipletSpace.embed_component`)."""
        r = MultiIndex(r)
        self.set(r.norm, r, self.space.embed_component(r, t))

    def component(self, l, r):
        r = MultiIndex(r)
        if l == 1:
            return DenseTensor.zeros(self.space.total, 1)
        try:
            return self._entries[l, r]
        except KeyError:
            raise ExpansionError("coefficient table has no entry for order %d, component %s"
                                 % (l, tuple(r))) from None

    def full(self, l):
        """``C_l = Σ_{|R|=l} C_l^R``."""
        acc = DenseTensor.zeros(self.space.total, l)
        for r in MultiIndex.with_norm(l, len(self.space.ranks)):
            acc = acc + self.component(l, r)
        return acc

    def require_complete(self, k):
        for l in range(2, k + 1):
            for r in MultiIndex.with_norm(l, len(self.space.ranks)):
                self.component(l, r)

    def entries(self):
        return dict(self._entries)

    @classmethod
    def from_full(cls, space, tensors):
        """Split full symmetric ``C_l`` tensors ``{l: tensor}`` into components."""
        table = cls(space)
        for l, t in tensors.items():
            if l == 1:
                continue
            for r in MultiIndex.with_norm(l, len(space.ranks)):
                mask = space.pattern_mask(r)
                num = np.where(mask, np.asarray(t.num, dtype=object), 0)
                table.set(l, r, DenseTensor(num, t.den, space.total, (CO,) * l))
        return table

    @classmethod
    def random(cls, space, order, seed, spread=4):
        rng = np.random.default_rng(seed)
        tensors = {}
        for l in range(2, order + 1):
            raw = rng.integers(-spread, spread + 1, size=(space.total,) * l)
            tensors[l] = DenseTensor(raw, 1, space.total, (CO,) * l).symmetrize()
        return cls.from_full(space, tensors)


def field_power(space, fields, p):
    """``f_1^{p_1} ⊙ ... ⊙ f_N^{p_N}`` as a symmetric contravariant tensor over ``V``."""
    p = MultiIndex(p)
    vecs = [space.embed_field(i, f) for i, f in enumerate(fields)]
    acc = None
    for v, pi in zip(vecs, p):
        for _ in range(pi):
            acc = v if acc is None else sym_product(acc, v)
    if acc is None:
        return DenseTensor.scalar(1, space.total)
    return acc


@dataclass(frozen=True)
class ExpansionTerm:
    """One summand: ``binomial * scalar * A^Q(argument)``."""

    q: MultiIndex
    binomial: int
    scalar: Fraction
    argument: DenseTensor
    leading: bool = False

    @property
    def coefficient(self):
        return self.binomial * self.scalar

    @property
    def value(self):
        return self.argument.scale(self.coefficient)


def expand_component(p, table, fields):
    """All summands of the mixing formula for the component ``P``, keyed by ``Q``.

    ``Q = P`` is the leading term (coefficient 1). Orders ``l = k - 1`` are
    absent because ``C_1 = 0``.
    """
    p = MultiIndex(p)
    space = table.space
    k = p.norm
    if k < 1:
        raise ExpansionError("component needs |P| >= 1")
    if len(p) != len(space.ranks) or len(fields) != len(space.ranks):
        raise ExpansionError("P, fields and multiplet must have the same length")
    for i, f in enumerate(fields):
        if any(v != CONTRA for v in f.variance):
            raise ExpansionError("field %d must be contravariant" % i)
    table.require_complete(k)
    out = {p: ExpansionTerm(p, 1, Fraction(1), field_power(space, fields, p), leading=True)}
    for q in p.below():
        l = q.norm
        if l >= k - 1:
            continue
        rest = p - q
        c = table.component(k - l, rest)
        scalar = contract_l(c, field_power(space, fields, rest), k - l).component(())
        binom = prod(comb(pi, qi) for pi, qi in zip(p, q))
        out[q] = ExpansionTerm(q, binom, scalar, field_power(space, fields, q))
    return out


def random_field(rank, dim, rng, spread=4):
    raw = rng.integers(-spread, spread + 1, size=(dim,) * rank)
    if rank == 0:
        return DenseTensor(np.array(int(raw), dtype=object), 1, dim=dim)
    return DenseTensor(raw, 1, dim, (CONTRA,) * rank)


def verify_expansion_consistency(p, seed, ranks=None, dim=4):
    """Check the summands against the direct contraction ``C_{k-l} ·_{k-l} f^P``.

    For each order ``l < k`` the sum over ``|Q| = l`` of the summands must
    equal the single global contraction computed on the assembled tensor.
    """
    p = MultiIndex(p)
    k = p.norm
    if k == 0:
        return True
    ranks = tuple(ranks) if ranks is not None else (1,) * len(p)
    space = MultipletSpace(ranks, dim)
    rng = np.random.default_rng(seed)
    fields = [random_field(r, dim, rng) for r in ranks]
    table = CoefficientTable.random(space, k, int(rng.integers(0, 2**31)))
    terms = expand_component(p, table, fields)
    fp = field_power(space, fields, p)
    for l in range(k):
        direct = contract_l(table.full(k - l), fp, k - l)
        summed = DenseTensor.zeros(space.total, l, (CONTRA,) * l)
        for q, term in terms.items():
            if q.norm == l and not term.leading:
                summed = summed + term.value
        if direct != summed:
            return False
    return True


def expansion_report(p, table, fields):
    """Plain-data form of :func:`expand_component` for serialization."""
    terms = expand_component(p, table, fields)
    rows = []
    for q in sorted(terms):
        t = terms[q]
        rows.append({
            "Q": list(q),
            "leading": t.leading,
            "binomial": t.binomial,
            "scalar": str(t.scalar),
            "coefficient": str(t.coefficient),
        })
    return {"P": list(MultiIndex(p)), "ranks": list(table.space.ranks), "dim": table.space.dim, "terms": rows}

