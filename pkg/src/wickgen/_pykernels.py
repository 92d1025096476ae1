"""Pure-Python/numpy implementations of the hot kernels.

These are the reference versions; ``wickgen._ckernels`` (Cython) mirrors
them function by function and must return identical results.
"""

import numpy as np


def rref_modp(a, p):
    """Reduced row echelon form of an integer matrix modulo a prime ``p``.

    ``a`` is a 2-d int64 array with entries already in ``[0, p)``; it is not
    modified. ``p`` must be below 2**31 so that products fit in int64.

    Returns ``(r, pivots)`` where ``r`` holds the first ``len(pivots)`` rows
    of the RREF and ``pivots`` lists the pivot column of each row.
    """
    m = np.array(a, dtype=np.int64, copy=True)
    nrows, ncols = m.shape
    pivots = []
    row = 0
    for col in range(ncols):
        if row >= nrows:
            break
        nz = np.flatnonzero(m[row:, col])
        if len(nz) == 0:
            continue
        sel = row + int(nz[0])
        if sel != row:
            m[[row, sel]] = m[[sel, row]]
        inv = pow(int(m[row, col]), p - 2, p)
        m[row] = (m[row] * inv) % p
        factors = m[:, col].copy()
        factors[row] = 0
        hit = np.flatnonzero(factors)
        if len(hit):
            m[hit] = (m[hit] - (factors[hit, None] * m[row][None, :]) % p) % p
        pivots.append(col)
        row += 1
    return m[:row].copy(), pivots


def enumerate_multigraphs(sizes, anti, autos):
    """All loop-multigraphs with prescribed degrees, up to the given symmetries.

    ``sizes[i]`` is the degree of node ``i`` (a self-loop uses two units).
    Nodes flagged in ``anti`` are antisymmetric slot groups: they carry no
    self-loop and at most one edge to any other node. ``autos`` is the full
    list of node permutations (as tuples) forming the symmetry group; it must
    contain the identity.

    Returns the sorted list of canonical forms. A canonical form is the
    row-major upper triangle (diagonal included) of the edge-multiplicity
    matrix, minimised over ``autos``.
    """
    v = len(sizes)
    pairs = [(i, j) for i in range(v) for j in range(i, v)]
    rem = list(sizes)
    mult = [0] * len(pairs)
    # index of the last pair touching node i as the smaller endpoint
    last_of_row = {}
    for k, (i, j) in enumerate(pairs):
        last_of_row[i] = k
    seen = set()

    def canon():
        mat = {}
        for k, (i, j) in enumerate(pairs):
            if mult[k]:
                mat[(i, j)] = mult[k]
        best = None
        for perm in autos:
            key = [0] * len(pairs)
            for (i, j), c in mat.items():
                a, b = perm[i], perm[j]
                if a > b:
                    a, b = b, a
                key[_pair_index(a, b, v)] = c
            key = tuple(key)
            if best is None or key < best:
                best = key
        return best

    def rec(k):
        if k == len(pairs):
            if not any(rem):
                seen.add(canon())
            return
        i, j = pairs[k]
        if i == j:
            if anti[i] or rem[i] < 2:
                top = 0
            else:
                top = rem[i] // 2
            for c in range(top, -1, -1):
                if k == last_of_row[i] and rem[i] != 2 * c:
                    continue
                mult[k] = c
                rem[i] -= 2 * c
                rec(k + 1)
                rem[i] += 2 * c
            mult[k] = 0
            return
        top = min(rem[i], rem[j])
        if anti[i] or anti[j]:
            top = min(top, 1)
        for c in range(top, -1, -1):
            if k == last_of_row[i] and rem[i] - c != 0:
                continue
            mult[k] = c
            rem[i] -= c
            rem[j] -= c
            rec(k + 1)
            rem[i] += c
            rem[j] += c
        mult[k] = 0

    if v == 0:
        return [()]
    rec(0)
    return sorted(seen)


def _pair_index(i, j, v):
    # position of (i, j), i <= j, in the row-major upper triangle
    return i * v - i * (i - 1) // 2 + (j - i)
