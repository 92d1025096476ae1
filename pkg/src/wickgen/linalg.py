"""Exact rational linear algebra on integer matrices.

The fast path is multi-modular: reduced row echelon forms are computed
modulo word-size primes, lifted by CRT and rational reconstruction, and then
*verified* exactly over the integers, so every returned result is exact.
``frac_rref`` is the plain Fraction elimination kept for small systems and
as an independent oracle in tests.
"""

from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt

import numpy as np
import sympy

from .kernels import rref_modp

_INT64_SAFE = 2**62


class LinalgError(ArithmeticError):
    pass


@lru_cache(maxsize=None)
def prime(i):
    """The ``i``-th prime below 2**31 counting downwards (``prime(0)`` largest)."""
    if i == 0:
        return int(sympy.prevprime(2**31))
    return int(sympy.prevprime(prime(i - 1)))


def as_int_matrix(rows):
    """Stack integer row vectors into a 2-d array (int64 when it fits)."""
    a = np.array(rows, dtype=object)
    if a.ndim == 1:
        a = a.reshape(1, -1) if a.size else a.reshape(0, 0)
    return _shrink(a)


def _shrink(a):
    if a.dtype != object:
        return a.astype(np.int64, copy=False)
    if a.size == 0:
        return a.astype(np.int64)
    mx = max(abs(int(x)) for x in a.flat)
    if mx < _INT64_SAFE:
        return a.astype(np.int64)
    return a


def _maxabs(a):
    if a.size == 0:
        return 0
    if a.dtype == object:
        return max(abs(int(x)) for x in a.flat)
    return int(np.abs(a).max())


def _mod(a, p):
    if a.dtype == object:
        return np.array([[int(x) % p for x in row] for row in a], dtype=np.int64).reshape(a.shape)
    return np.mod(a, p).astype(np.int64)


def _ratrec(x, m):
    """Rational reconstruction of ``x`` mod ``m``; ``None`` if none exists."""
    bound = isqrt(m // 2)
    r0, r1 = m, x % m
    s0, s1 = 0, 1
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    if s1 == 0 or abs(s1) > bound or gcd(r1, abs(s1)) != 1:
        return None
    if s1 < 0:
        return Fraction(-r1, -s1)
    return Fraction(r1, s1)


def _crt(r_old, m_old, r_new, p):
    # combine object arrays of residues
    inv = pow(m_old % p, -1, p)
    t = ((r_new - r_old) % p) * inv % p
    return r_old + m_old * t, m_old * p


def _better(piv_a, piv_b):
    """True when pivot list ``a`` is lexicographically earlier than ``b``."""
    for x, y in zip(piv_a, piv_b):
        if x != y:
            return x < y
    return len(piv_a) > len(piv_b)


class RREF:
    """Exact reduced row echelon data of an integer matrix ``A``.

    ``pivots[k]`` is the pivot column of row ``k``; ``entry(k, c)`` is the
    exact entry ``R[k, c]`` of the reduced form, stored as an integer matrix
    ``num`` over the common denominator ``den``.
    """

    __slots__ = ("shape", "pivots", "num", "den")

    def __init__(self, shape, pivots, num, den):
        self.shape = shape
        self.pivots = list(pivots)
        self.num = num
        self.den = den

    @property
    def rank(self):
        return len(self.pivots)

    def entry(self, k, c):
        return Fraction(int(self.num[k, c]), self.den)

    def nullspace(self):
        """Integer basis of the right nullspace, one vector per free column."""
        ncols = self.shape[1]
        piv = set(self.pivots)
        out = []
        for f in range(ncols):
            if f in piv:
                continue
            v = [0] * ncols
            v[f] = self.den
            for k, pc in enumerate(self.pivots):
                v[pc] = -int(self.num[k, f])
            g = 0
            for x in v:
                g = gcd(g, x)
            out.append([x // g for x in v] if g > 1 else v)
        return out


def _verify(a, piv, num, den):
    # exact check A * den == A[:, piv] @ num
    if not piv:
        return _maxabs(a) == 0
    ak = a[:, piv]
    bound = _maxabs(ak) * max(_maxabs(num), 1) * len(piv)
    lhs_bound = _maxabs(a) * den
    if bound < _INT64_SAFE and lhs_bound < _INT64_SAFE:
        return bool(np.array_equal(ak.astype(np.int64) @ num.astype(np.int64), a.astype(np.int64) * den))
    ak = ak.astype(object)
    return bool(np.array_equal(ak.dot(num.astype(object)), a.astype(object) * den))


def exact_rref(a, max_primes=60):
    """Exact RREF of an integer matrix (rows x cols), verified over Z."""
    a = np.asarray(a)
    if a.dtype != object:
        a = a.astype(np.int64)
    nrows, ncols = a.shape
    if nrows == 0 or ncols == 0:
        return RREF(a.shape, [], np.zeros((0, ncols), dtype=np.int64), 1)
    best_piv = None
    res = None
    mod = 1
    for i in range(max_primes):
        p = prime(i)
        r, piv = rref_modp(_mod(a, p), p)
        if best_piv is None or _better(piv, best_piv):
            best_piv, res, mod = piv, r.astype(object), p
        elif piv == best_piv:
            res, mod = _crt(res, mod, r.astype(object), p)
        else:
            continue  # unlucky prime
        out = _reconstruct(res, mod, best_piv, ncols)
        if out is None:
            continue
        num, den = out
        if _verify(a, best_piv, num, den):
            return RREF(a.shape, best_piv, _shrink(num), den)
    raise LinalgError("exact RREF did not certify within %d primes" % max_primes)


def _reconstruct(res, mod, piv, ncols):
    r = len(piv)
    if r == 0:
        return np.zeros((0, ncols), dtype=object), 1
    half = mod // 2
    fr = {}
    den = 1
    pivset = set(piv)
    for k in range(r):
        for c in range(ncols):
            if c in pivset:
                continue
            x = int(res[k, c])
            if x == 0:
                continue
            if x <= half and x * x < mod:
                fr[k, c] = Fraction(x)
                continue
            if x > half and (mod - x) ** 2 < mod:
                fr[k, c] = Fraction(x - mod)
                continue
            q = _ratrec(x, mod)
            if q is None:
                return None
            fr[k, c] = q
            den = den * q.denominator // gcd(den, q.denominator)
    num = np.zeros((r, ncols), dtype=object)
    for k, c in enumerate(piv):
        num[k, c] = den
    for (k, c), q in fr.items():
        num[k, c] = q.numerator * (den // q.denominator)
    return num, den


def rank(a):
    a = np.asarray(a)
    if a.size == 0:
        return 0
    return len(exact_pivots(a))


def frac_rref(rows):
    """Plain Gaussian elimination over ``Fraction``; returns ``(rows, pivots)``."""
    m = [[Fraction(x) for x in row] for row in rows]
    if not m:
        return [], []
    ncols = len(m[0])
    pivots = []
    r = 0
    for c in range(ncols):
        sel = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if sel is None:
            continue
        m[r], m[sel] = m[sel], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def frac_rank(rows):
    return len(frac_rref(rows)[1])


def frac_solve(mat, rhs):
    """Solve a square nonsingular rational system exactly."""
    n = len(mat)
    aug = [list(map(Fraction, mat[i])) + [Fraction(rhs[i])] for i in range(n)]
    red, piv = frac_rref(aug)
    if piv[: n] != list(range(n)):
        raise LinalgError("singular system")
    return [red[i][n] for i in range(n)]


def _hadamard_bits(a, r):
    # log2 bound on any (r+1)-minor: product of the r+1 largest column norms
    norms = []
    for c in range(a.shape[1]):
        col = a[:, c]
        sq = sum(int(x) * int(x) for x in col) if a.dtype == object else int((col.astype(object) ** 2).sum())
        if sq:
            norms.append((isqrt(sq) + 1).bit_length())
    norms.sort(reverse=True)
    return sum(norms[: r + 1])


def exact_pivots(a, reconstruct_tries=3):
    """Pivot columns of the exact RREF over Q, without the reduced entries.

    Tries the verified reconstruction route first; when dependency
    coefficients are too large for that, falls back to a Hadamard-bound
    certificate: prefix ranks agree modulo primes whose product exceeds
    every minor that could witness a larger rank.
    """
    return certified_pivots(a, reconstruct_tries, budget=None)[0]


def certified_pivots(a, reconstruct_tries=3, budget=48):
    """``(pivots, certified)``; gives up certifying after ``budget`` primes.

    Uncertified results are the pivots on which two independent primes
    agree, which are correct unless both primes divide a relevant minor.
    """
    a = np.asarray(a)
    if a.dtype != object:
        a = a.astype(np.int64)
    if a.size == 0:
        return [], True
    try:
        return exact_rref(a, max_primes=reconstruct_tries).pivots, True
    except LinalgError:
        pass
    best_piv = None
    bits = 0
    i = 0
    need = None
    agreeing = 0
    while True:
        p = prime(i)
        i += 1
        _, piv = rref_modp(_mod(a, p), p)
        if best_piv is None or _better(piv, best_piv):
            best_piv, bits, agreeing = piv, 0, 0
            need = _hadamard_bits(a, len(piv)) + 1
            if len(piv) == a.shape[1]:
                # full column rank modulo a prime is full rank over Q
                return list(piv), True
        elif piv != best_piv:
            continue
        agreeing += 1
        bits += p.bit_length() - 1
        if bits >= need:
            return list(best_piv), True
        if budget is not None and i >= budget and agreeing >= 2:
            return list(best_piv), False


def modular_pivots(a, i=0):
    """Pivot columns modulo ``prime(i)``.

    Columns independent modulo a prime are independent over Q, so this
    rank is a lower bound; it is exact for all but finitely many primes.
    """
    a = np.asarray(a)
    if a.size == 0:
        return []
    p = prime(i)
    return list(rref_modp(_mod(a, p), p)[1])


def greedy_independent(vectors):
    """Indices of the left-to-right greedy maximal independent subset.

    ``vectors`` is a sequence of equal-length integer vectors.
    """
    if len(vectors) == 0:
        return []
    cols = np.array([np.asarray(v, dtype=object) for v in vectors], dtype=object).T
    return list(exact_pivots(_shrink(cols)))


def scale_to_integers(fracs):
    """Multiply a list of rationals by the lcm of denominators; return ints."""
    den = 1
    for x in fracs:
        d = Fraction(x).denominator
        den = den * d // gcd(den, d)
    return [int(Fraction(x) * den) for x in fracs]
