"""Exact dense tensors, symmetric products and symmetry-type subspaces.

A :class:`DenseTensor` stores integer numerators over one positive common
denominator. Numerators live in an int64 array while every intermediate
bound fits, and silently move to Python-int object arrays otherwise, so no
operation here ever rounds.
"""

import itertools
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial, gcd, prod

import numpy as np
from sympy.utilities.iterables import multiset_permutations

from .linalg import exact_rref, rank as _int_rank

CO = "co"
CONTRA = "contra"
_INT64_SAFE = 2**62


class TensorError(ValueError):
    pass


class EmptySubspaceWarning(UserWarning):
    pass


def _maxabs(a):
    if a.size == 0:
        return 0
    if a.dtype == object:
        return max(abs(int(x)) for x in a.flat)
    return int(np.abs(a).max())


def _as_int_array(a):
    a = np.asarray(a)
    if a.dtype == object:
        if a.size and _maxabs(a) < _INT64_SAFE:
            return a.astype(np.int64)
        return a
    if not np.issubdtype(a.dtype, np.integer):
        raise TensorError("numerators must be integers, got %s" % a.dtype)
    return a.astype(np.int64, copy=False)


def _lift(a, bound):
    # promote to Python ints when an operation could leave int64
    if a.dtype != object and bound >= _INT64_SAFE:
        return a.astype(object)
    return a


class DenseTensor:
    """Rank-r tensor over Q in dimension ``dim``; all n**r components stored."""

    __slots__ = ("num", "den", "dim", "variance")
    __hash__ = None

    def __init__(self, num, den=1, dim=None, variance=None):
        num = _as_int_array(num)
        if num.ndim == 0 and dim is None:
            raise TensorError("rank-0 tensors need an explicit dim")
        if num.ndim and len(set(num.shape)) != 1:
            raise TensorError("all slots must have the same dimension, got %s" % (num.shape,))
        dim = num.shape[0] if num.ndim else int(dim)
        if num.ndim and dim != num.shape[0]:
            raise TensorError("dim %d does not match shape %s" % (dim, num.shape))
        if variance is None:
            variance = (CO,) * num.ndim
        variance = tuple(variance)
        if len(variance) != num.ndim or any(v not in (CO, CONTRA) for v in variance):
            raise TensorError("bad variance %r for rank %d" % (variance, num.ndim))
        den = int(den)
        if den == 0:
            raise ZeroDivisionError("zero denominator")
        if den < 0:
            num, den = -num, -den
        g = den
        for x in num.flat:
            if g == 1:
                break
            g = gcd(g, int(x))
        if g > 1:
            num = num // g
            den //= g
        if not num.any():
            den = 1
        self.num = num
        self.den = den
        self.dim = dim
        self.variance = variance

    # construction -------------------------------------------------------
    @classmethod
    def from_values(cls, values, dim=None, variance=None):
        """Build from a nested array of ints/Fractions (exact)."""
        arr = np.array(values, dtype=object)
        fr = [Fraction(x) for x in arr.flat]
        den = 1
        for x in fr:
            den = den * x.denominator // gcd(den, x.denominator)
        num = np.array([int(x * den) for x in fr], dtype=object).reshape(arr.shape)
        return cls(num, den, dim=dim, variance=variance)

    @classmethod
    def zeros(cls, dim, rank, variance=None):
        return cls(np.zeros((dim,) * rank, dtype=np.int64), 1, dim=dim, variance=variance)

    @classmethod
    def scalar(cls, value, dim):
        v = Fraction(value)
        return cls(np.array(v.numerator, dtype=object), v.denominator, dim=dim)

    @classmethod
    def kronecker(cls, dim):
        return cls(np.eye(dim, dtype=np.int64), 1, variance=(CONTRA, CO))

    # basic properties -------------------------------------------------------
    @property
    def rank(self):
        return self.num.ndim

    @property
    def shape(self):
        return self.num.shape

    def component(self, idx):
        return Fraction(int(self.num[tuple(idx)]), self.den)

    def to_fractions(self):
        out = np.empty(self.num.shape, dtype=object)
        for idx in np.ndindex(*self.num.shape):
            out[idx] = Fraction(int(self.num[idx]), self.den)
        if self.rank == 0:
            return Fraction(int(self.num), self.den)
        return out

    def is_zero(self):
        return not self.num.any()

    def __repr__(self):
        return "DenseTensor(dim=%d, rank=%d, den=%d, variance=%s)" % (
            self.dim, self.rank, self.den, "".join("u" if v == CONTRA else "d" for v in self.variance))

    def __eq__(self, other):
        if not isinstance(other, DenseTensor):
            return NotImplemented
        return (self.dim == other.dim and self.variance == other.variance and self.den == other.den
                and self.num.shape == other.num.shape and bool(np.array_equal(self.num, other.num)))

    def _compatible(self, other):
        if self.dim != other.dim or self.rank != other.rank:
            raise TensorError("shape mismatch: %r vs %r" % (self, other))
        if self.variance != other.variance:
            raise TensorError("variance mismatch: %r vs %r" % (self, other))

    # arithmetic -------------------------------------------------------------
    def __add__(self, other):
        self._compatible(other)
        d = self.den * other.den // gcd(self.den, other.den)
        fa, fb = d // self.den, d // other.den
        bound = _maxabs(self.num) * fa + _maxabs(other.num) * fb
        a = _lift(self.num, bound)
        b = _lift(other.num, bound)
        return DenseTensor(a * fa + b * fb, d, self.dim, self.variance)

    def __neg__(self):
        return DenseTensor(-self.num, self.den, self.dim, self.variance)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        c = Fraction(c)
        bound = _maxabs(self.num) * abs(c.numerator)
        a = _lift(self.num, bound)
        return DenseTensor(a * c.numerator, self.den * c.denominator, self.dim, self.variance)

    __mul__ = scale
    __rmul__ = scale

    def tensor(self, other):
        """Outer product ``self ⊗ other`` (slots of ``self`` first)."""
        if self.dim != other.dim:
            raise TensorError("dim mismatch")
        bound = max(_maxabs(self.num), 1) * max(_maxabs(other.num), 1)
        a = _lift(self.num, bound)
        b = _lift(other.num, bound)
        num = np.multiply.outer(a, b)
        return DenseTensor(num, self.den * other.den, self.dim, self.variance + other.variance)

    def permute(self, perm):
        """New tensor whose slot ``i`` is old slot ``perm[i]``."""
        perm = tuple(perm)
        return DenseTensor(np.transpose(self.num, perm), self.den, self.dim,
                           tuple(self.variance[p] for p in perm))

    def contract(self, i, j, force=False):
        """Plain trace over slots ``i`` and ``j`` (one upper, one lower)."""
        if i == j:
            raise TensorError("cannot contract a slot with itself")
        if not force and self.variance[i] == self.variance[j]:
            raise TensorError("contraction needs one upper and one lower slot")
        num = np.trace(self.num, axis1=i, axis2=j)
        var = tuple(v for k, v in enumerate(self.variance) if k not in (i, j))
        return DenseTensor(num, self.den, self.dim, var)

    def symmetrize(self, slots=None):
        """Average over all permutations of ``slots`` (default: all slots)."""
        slots = tuple(range(self.rank)) if slots is None else tuple(slots)
        if len(slots) < 2:
            return self
        var = {self.variance[s] for s in slots}
        if len(var) > 1:
            raise TensorError("cannot symmetrize slots of mixed variance")
        bound = _maxabs(self.num) * factorial(len(slots))
        base = _lift(self.num, bound)
        acc = None
        for p in itertools.permutations(slots):
            perm = list(range(self.rank))
            for s, q in zip(slots, p):
                perm[s] = q
            t = np.transpose(base, perm)
            acc = t.copy() if acc is None else acc + t
        return DenseTensor(acc, self.den * factorial(len(slots)), self.dim, self.variance)

    def is_symmetric(self, slots=None):
        slots = tuple(range(self.rank)) if slots is None else tuple(slots)
        for a, b in zip(slots, slots[1:]):
            perm = list(range(self.rank))
            perm[a], perm[b] = b, a
            if not np.array_equal(self.num, np.transpose(self.num, perm)):
                return False
        return True

    def flat_ints(self):
        """Numerators as a flat list of Python ints (for rank computations)."""
        return [int(x) for x in self.num.flat]


def exact_einsum(spec, tensors, dim, variance=None):
    """``np.einsum`` over the numerators of exact tensors, overflow-guarded."""
    ins, out = spec.split("->")
    labels_in = set(ins.replace(",", ""))
    summed = len(labels_in - set(out))
    bound = dim ** summed
    for t in tensors:
        bound *= max(_maxabs(t.num), 1)
    arrs = [t.num.astype(object) if bound >= _INT64_SAFE else t.num.astype(np.int64) for t in tensors]
    num = np.einsum(spec, *arrs, optimize=len(arrs) > 2)
    den = prod(t.den for t in tensors)
    return DenseTensor(np.asarray(num), den, dim=dim, variance=variance)


# ---------------------------------------------------------------------------
# symmetric algebra


def sym_product(a, b):
    """Symmetric tensor product: full symmetrization of ``a ⊗ b``."""
    if a.dim != b.dim:
        raise TensorError("dim mismatch: %d vs %d" % (a.dim, b.dim))
    if len(set(a.variance + b.variance)) > 1:
        raise TensorError("sym_product needs the same variance on all slots")
    return a.tensor(b).symmetrize()


def sym_power(f, k):
    """``f^{⊙k}`` for a rank-1 tensor (or the unit scalar when k = 0)."""
    if k == 0:
        return DenseTensor.scalar(1, f.dim)
    out = f
    for _ in range(k - 1):
        out = out.tensor(f)
    return out


def contract_l(g, f, l):
    """The l-contraction product of a symmetric covariant ``g`` into ``f``.

    Returns ``binom(k, l)`` times the contraction of ``g`` with the first ``l``
    slots of the symmetric contravariant rank-``k`` tensor ``f``.
    """
    k = f.rank
    if g.rank != l:
        raise TensorError("g must have rank l=%d, has %d" % (l, g.rank))
    if l > k:
        raise TensorError("l=%d exceeds rank %d" % (l, k))
    if g.dim != f.dim:
        raise TensorError("dim mismatch")
    if any(v != CO for v in g.variance) or any(v != CONTRA for v in f.variance):
        raise TensorError("contract_l needs covariant g and contravariant f")
    if not g.is_symmetric() or not f.is_symmetric():
        raise TensorError("contract_l needs symmetric inputs")
    letters = "abcdefghijklmnopqrstuvwxyz"
    gi = letters[:l]
    fi = letters[:k]
    out = exact_einsum("%s,%s->%s" % (gi, fi, fi[l:]), [g, f], g.dim, (CONTRA,) * (k - l))
    return out.scale(comb(k, l))


# ---------------------------------------------------------------------------
# multi-indices


class MultiIndex(tuple):
    """Non-negative integer multi-index ``(p_1, ..., p_N)``."""

    def __new__(cls, entries):
        entries = tuple(int(x) for x in entries)
        if any(x < 0 for x in entries):
            raise ValueError("multi-index entries must be non-negative: %r" % (entries,))
        return super().__new__(cls, entries)

    @property
    def norm(self):
        return sum(self)

    def pair(self, v):
        if len(v) != len(self):
            raise ValueError("length mismatch: %d vs %d" % (len(self), len(v)))
        return sum((Fraction(p) * Fraction(x) for p, x in zip(self, v)), Fraction(0))

    def __le__(self, other):
        return all(a <= b for a, b in zip(self, other))

    def __add__(self, other):
        return MultiIndex(a + b for a, b in zip(self, other))

    def __sub__(self, other):
        return MultiIndex(a - b for a, b in zip(self, other))

    def below(self):
        """All Q with Q <= self, in lexicographic order."""
        return [MultiIndex(q) for q in itertools.product(*(range(p + 1) for p in self))]

    @staticmethod
    def with_norm(k, length):
        """All multi-indices of the given length and norm, lexicographic."""
        out = []
        for q in itertools.product(range(k + 1), repeat=length):
            if sum(q) == k:
                out.append(MultiIndex(q))
        return out

    def __repr__(self):
        return "MultiIndex(%s)" % (tuple(self),)


# ---------------------------------------------------------------------------
# symmetry types


@dataclass(frozen=True)
class SymmetryType:
    """Linear symmetry conditions on the components of a rank-``rank`` tensor.

    ``groups`` are disjoint slot sets under which the tensor is totally
    symmetric. ``relations`` are ``(perm, sign)`` pairs meaning
    ``t[I∘perm] = sign * t[I]``. ``vanishing`` lists slot sets whose total
    symmetrization must vanish (e.g. the cyclic-type identity of the
    curvature coordinates).
    """

    rank: int
    groups: tuple = ()
    relations: tuple = ()
    vanishing: tuple = ()
    label: str = field(default="", compare=False)

    def __post_init__(self):
        seen = set()
        for g in self.groups:
            if seen & set(g):
                raise TensorError("symmetry groups must be disjoint")
            seen |= set(g)
            if any(s >= self.rank or s < 0 for s in g):
                raise TensorError("slot out of range in %r" % (g,))

    # canonical constructors -------------------------------------------------
    @classmethod
    def general(cls, rank):
        return cls(rank, label="general")

    @classmethod
    def symmetric(cls, rank):
        return cls(rank, (tuple(range(rank)),) if rank > 1 else (), label="symmetric")

    @classmethod
    def curvature(cls, nderiv):
        """Symmetries of the derived curvature coordinate ``Q_{ab,C}``, |C| = 2 + nderiv."""
        r = 4 + nderiv
        rel = ()
        if nderiv == 0:
            rel = (((2, 3, 0, 1), 1),)
        return cls(r, ((0, 1), tuple(range(2, r))), rel, (tuple(range(1, r)),), label="S%d" % nderiv)

    @classmethod
    def background(cls, field_rank, nderiv, field_symmetry="general"):
        groups = []
        if field_symmetry == "symmetric" and field_rank > 1:
            groups.append(tuple(range(field_rank)))
        elif field_symmetry not in ("general", "symmetric"):
            raise TensorError("unknown field symmetry %r" % field_symmetry)
        if nderiv > 1:
            groups.append(tuple(range(field_rank, field_rank + nderiv)))
        return cls(field_rank + nderiv, tuple(groups), label="bg(%d,%d,%s)" % (field_rank, nderiv, field_symmetry))

    @classmethod
    def antisymmetric(cls, rank):
        rel = []
        for i in range(rank - 1):
            p = list(range(rank))
            p[i], p[i + 1] = p[i + 1], p[i]
            rel.append((tuple(p), -1))
        return cls(rank, (), tuple(rel), label="antisymmetric")

    @classmethod
    def block_copies(cls, copies):
        """Output signature ⊗_i S^{q_i}(T*^{⊗k_i}): ``copies`` is ((q_1,k_1), ...).

        Copies of the same factor may be permuted as blocks; slots inside a
        copy carry no symmetry. Single-slot copies collapse to one group.
        """
        groups, rel = [], []
        pos = 0
        for q, k in copies:
            if k == 1 and q > 1:
                groups.append(tuple(range(pos, pos + q)))
            elif k > 1 and q > 1:
                for c in range(q - 1):
                    p = list(range(pos + q * k))
                    a, b = pos + c * k, pos + (c + 1) * k
                    for s in range(k):
                        p[a + s], p[b + s] = b + s, a + s
                    rel.append((tuple(p), 1))
            pos += q * k
        return cls(pos, tuple(groups), tuple(rel), label="out%s" % (tuple(copies),))

    # subspace machinery -----------------------------------------------------
    def basis(self, dim):
        """Integer basis tensors (flattened numerators) of the admissible subspace."""
        return _subspace_basis(self, dim)

    def dimension(self, dim):
        return len(self.basis(dim))

    def contains(self, t):
        if t.rank != self.rank:
            return False
        ints = np.asarray(t.num)
        for g in self.groups:
            for a, b in zip(g, g[1:]):
                perm = list(range(self.rank))
                perm[a], perm[b] = b, a
                if not np.array_equal(ints, np.transpose(ints, perm)):
                    return False
        for perm, sign in self.relations:
            if not np.array_equal(np.transpose(ints, perm), sign * ints):
                return False
        for slots in self.vanishing:
            sym = DenseTensor(ints, 1, t.dim, (CO,) * t.rank).symmetrize(slots)
            if not sym.is_zero():
                return False
        return True


def _orbit_key(idx, groups):
    idx = list(idx)
    for g in groups:
        vals = sorted(idx[s] for s in g)
        for s, v in zip(g, vals):
            idx[s] = v
    return tuple(idx)


@lru_cache(maxsize=256)
def _subspace_basis(sym, dim):
    r = sym.rank
    all_idx = list(itertools.product(range(dim), repeat=r))
    keys = {}
    for idx in all_idx:
        k = _orbit_key(idx, sym.groups)
        if k not in keys:
            keys[k] = len(keys)
    nvars = len(keys)
    rows = set()

    def add_row(coeffs):
        items = tuple(sorted((v, c) for v, c in coeffs.items() if c))
        if not items:
            return
        g = 0
        for _, c in items:
            g = gcd(g, c)
        if items[0][1] < 0:
            g = -g
        rows.add(tuple((v, c // g) for v, c in items))

    for perm, sign in sym.relations:
        for k in keys:
            j = tuple(k[perm[i]] for i in range(r))
            co = {}
            co[keys[k]] = co.get(keys[k], 0) + 1
            vj = keys[_orbit_key(j, sym.groups)]
            co[vj] = co.get(vj, 0) - sign
            add_row(co)
    for slots in sym.vanishing:
        rest = [s for s in range(r) if s not in slots]
        for rest_vals in itertools.product(range(dim), repeat=len(rest)):
            for ms in itertools.combinations_with_replacement(range(dim), len(slots)):
                co = {}
                for arr in multiset_permutations(list(ms)):
                    idx = [0] * r
                    for s, v in zip(rest, rest_vals):
                        idx[s] = v
                    for s, v in zip(slots, arr):
                        idx[s] = v
                    var = keys[_orbit_key(idx, sym.groups)]
                    co[var] = co.get(var, 0) + 1
                add_row(co)
    if rows:
        mat = np.zeros((len(rows), nvars), dtype=np.int64)
        for i, row in enumerate(sorted(rows)):
            for v, c in row:
                mat[i, v] = c
        null = exact_rref(mat).nullspace()
    else:
        null = [[1 if i == v else 0 for i in range(nvars)] for v in range(nvars)]
    out = []
    for vec in null:
        arr = np.zeros((dim,) * r, dtype=np.int64)
        for idx in all_idx:
            arr[idx] = vec[keys[_orbit_key(idx, sym.groups)]]
        out.append(arr)
    return tuple(out)


def project_symmetry(t, sym):
    """Orthogonal projection of ``t`` onto the subspace of ``sym`` (exact)."""
    if t.rank != sym.rank:
        raise TensorError("rank mismatch: tensor %d vs symmetry %d" % (t.rank, sym.rank))
    basis = sym.basis(t.dim)
    if not basis:
        warnings.warn("symmetry type %s has an empty subspace" % (sym.label or sym), EmptySubspaceWarning)
        return DenseTensor.zeros(t.dim, t.rank, t.variance)
    b = np.array([x.reshape(-1).astype(object) for x in basis], dtype=object)
    gram = b.dot(b.T)
    rhs = b.dot(np.asarray(t.num).reshape(-1).astype(object))
    aug = np.concatenate([gram, rhs.reshape(-1, 1)], axis=1)
    red = exact_rref(_as_int_array(aug))
    k = len(basis)
    if red.pivots != list(range(k)):
        raise TensorError("degenerate Gram matrix")
    # coefficients y_i = R[i, k] (over t.den)
    coeffs = [Fraction(int(red.num[i, k]), red.den) for i in range(k)]
    den = 1
    for c in coeffs:
        den = den * c.denominator // gcd(den, c.denominator)
    ints = [int(c * den) for c in coeffs]
    acc = sum((ci * bi.astype(object) for ci, bi in zip(ints, basis)), np.zeros((t.dim,) * t.rank, dtype=object))
    return DenseTensor(acc, den * t.den, t.dim, t.variance)


def random_in_symmetry(sym, dim, seed, spread=6, variance=None):
    """Seeded random integer tensor inside the subspace of ``sym``.

    Deterministic in ``seed``; components are small integers.
    """
    rng = np.random.default_rng(seed)
    basis = sym.basis(dim)
    if not basis:
        return DenseTensor.zeros(dim, sym.rank, variance)
    coeffs = rng.integers(-spread, spread + 1, size=len(basis))
    acc = np.zeros((dim,) * sym.rank, dtype=np.int64)
    for c, b in zip(coeffs, basis):
        acc = acc + int(c) * b
    if sym.rank == 0:
        return DenseTensor(np.array(int(acc), dtype=object), 1, dim=dim)
    return DenseTensor(acc, 1, dim, variance)


def rank_of_span(ts):
    """Exact rank of the span of a list of tensors."""
    ts = list(ts)
    if not ts:
        return 0
    first = ts[0]
    for t in ts[1:]:
        if t.dim != first.dim or t.rank != first.rank or t.variance != first.variance:
            raise TensorError("rank_of_span needs tensors of one shape and variance")
    rows = np.array([np.asarray(t.num).reshape(-1).astype(object) for t in ts], dtype=object)
    return _int_rank(_as_int_array(rows))


# ---------------------------------------------------------------------------
# GL(n) action


def _frac_matrix(u):
    return [[Fraction(x) for x in row] for row in np.asarray(u, dtype=object).tolist()]


def _inverse(m):
    n = len(m)
    aug = [row[:] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(m)]
    from .linalg import frac_rref

    red, piv = frac_rref(aug)
    if piv[:n] != list(range(n)) or len(piv) < n:
        raise TensorError("matrix is singular")
    return [row[n:] for row in red]


def _det(m):
    n = len(m)
    a = [row[:] for row in m]
    det = Fraction(1)
    for c in range(n):
        sel = next((i for i in range(c, n) if a[i][c] != 0), None)
        if sel is None:
            return Fraction(0)
        if sel != c:
            a[c], a[sel] = a[sel], a[c]
            det = -det
        det *= a[c][c]
        for i in range(c + 1, n):
            f = a[i][c] / a[c][c]
            if f:
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return det


def exact_root(x, q):
    """``x**(1/q)`` for a positive rational, or ``None`` if irrational."""
    x = Fraction(x)
    if x <= 0:
        return None

    def iroot(n):
        r = round(n ** (1.0 / q)) if n < 2**1000 else int(n ** (1.0 / q))
        for c in (r - 1, r, r + 1):
            if c >= 0 and c**q == n:
                return c
        return None

    a, b = iroot(x.numerator), iroot(x.denominator)
    if a is None or b is None:
        return None
    return Fraction(a, b)


def rational_power(x, e):
    """``x**e`` for rational ``x > 0`` and rational ``e``, exactly, else ``None``."""
    e = Fraction(e)
    root = exact_root(x, e.denominator)
    if root is None:
        return None
    return root**e.numerator


def _matrix_tensor(m, dim):
    den = 1
    for row in m:
        for x in row:
            den = den * x.denominator // gcd(den, x.denominator)
    num = np.array([[int(x * den) for x in row] for row in m], dtype=object)
    return DenseTensor(num, den, dim, (CONTRA, CO))


def transform(t, u, density_weight=0):
    """Push ``t`` forward by the invertible matrix ``u``.

    Contravariant slots get ``u``, covariant slots the inverse transpose,
    and the result is multiplied by ``|det u|**density_weight``.
    """
    m = _frac_matrix(u)
    n = len(m)
    if n != t.dim or any(len(row) != n for row in m):
        raise TensorError("u must be %dx%d" % (t.dim, t.dim))
    det = _det(m)
    if det == 0:
        raise TensorError("u is singular")
    factor = Fraction(1)
    if density_weight:
        factor = rational_power(abs(det), density_weight)
        if factor is None:
            raise TensorError("irrational density factor |det u|^%s in exact mode" % density_weight)
    uin = _inverse(m)
    ut = _matrix_tensor(m, n)
    uinv = _matrix_tensor(uin, n)
    out = t
    letters = "abcdefghijklmnopqrstuvwxyz"
    for slot, var in enumerate(t.variance):
        idx = list(letters[: t.rank])
        new = "z"
        src = idx[slot]
        res = idx[:]
        res[slot] = new
        if var == CONTRA:
            # t'^{z...} = u^z_s t^{s...}
            spec = "%s%s,%s->%s" % (new, src, "".join(idx), "".join(res))
            out = exact_einsum(spec, [ut, out], n, out.variance)
        else:
            # t'_{z...} = (u^{-1})^s_z t_{s...}
            spec = "%s%s,%s->%s" % (src, new, "".join(idx), "".join(res))
            out = exact_einsum(spec, [uinv, out], n, out.variance)
    if factor != 1:
        out = out.scale(factor)
    return out


def levi_civita(dim, scale=1):
    """Covariant permutation symbol ε_{0..n-1} = ``scale`` (exact)."""
    num = np.zeros((dim,) * dim, dtype=np.int64)
    for p in itertools.permutations(range(dim)):
        num[p] = _perm_sign(p)
    s = Fraction(scale)
    return DenseTensor(num, 1, dim).scale(s)


def _perm_sign(p):
    p = list(p)
    sign = 1
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            sign = -sign
    return sign


def minkowski(dim):
    """η = diag(-1, 1, ..., 1) as a covariant rank-2 tensor."""
    m = np.eye(dim, dtype=np.int64)
    m[0, 0] = -1
    return DenseTensor(m, 1, dim)
