# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Compiled versions of the kernels in ``wickgen._pykernels``.

Same signatures, same results; see the pure-Python module for the contracts.
"""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t, uint64_t
from libc.stdlib cimport malloc, free
from libc.string cimport memset
from libcpp.vector cimport vector

cnp.import_array()


cdef uint64_t _powmod(uint64_t b, uint64_t e, uint64_t m):
    cdef uint64_t r = 1
    b %= m
    while e:
        if e & 1:
            r = (r * b) % m
        b = (b * b) % m
        e >>= 1
    return r


def rref_modp(a, p):
    cdef cnp.ndarray[int64_t, ndim=2] m = np.array(a, dtype=np.int64, copy=True, order="C")
    cdef Py_ssize_t nrows = m.shape[0], ncols = m.shape[1]
    cdef Py_ssize_t row = 0, col, r, c, sel
    cdef uint64_t P = p, inv, f
    cdef int64_t tmp
    cdef Py_ssize_t k
    cdef vector[Py_ssize_t] nz
    pivots = []
    for col in range(ncols):
        if row >= nrows:
            break
        sel = -1
        for r in range(row, nrows):
            if m[r, col] != 0:
                sel = r
                break
        if sel < 0:
            continue
        if sel != row:
            for c in range(ncols):
                tmp = m[row, c]
                m[row, c] = m[sel, c]
                m[sel, c] = tmp
        inv = _powmod(<uint64_t>m[row, col], P - 2, P)
        nz.clear()
        for c in range(col, ncols):
            if m[row, c] != 0:
                m[row, c] = <int64_t>((<uint64_t>m[row, c] * inv) % P)
                nz.push_back(c)
        for r in range(nrows):
            if r == row or m[r, col] == 0:
                continue
            f = P - <uint64_t>m[r, col]
            for k in range(<Py_ssize_t>nz.size()):
                c = nz[k]
                m[r, c] = <int64_t>((<uint64_t>m[r, c] + f * <uint64_t>m[row, c]) % P)
        pivots.append(col)
        row += 1
    return m[:row].copy(), pivots


cdef inline Py_ssize_t _pidx(Py_ssize_t i, Py_ssize_t j, Py_ssize_t v):
    return i * v - i * (i - 1) // 2 + (j - i)


cdef class _MGState:
    cdef int v, npairs, ngroup
    cdef int *pi
    cdef int *pj
    cdef int *rem
    cdef int *mult
    cdef int *last_of_row
    cdef int *anti
    cdef int *autos
    cdef int *key
    cdef int *best
    cdef object seen

    def __cinit__(self, sizes, anti, autos):
        cdef int k = 0, i, j, g
        self.v = len(sizes)
        self.npairs = self.v * (self.v + 1) // 2
        self.ngroup = len(autos)
        self.pi = <int *>malloc(max(self.npairs, 1) * sizeof(int))
        self.pj = <int *>malloc(max(self.npairs, 1) * sizeof(int))
        self.mult = <int *>malloc(max(self.npairs, 1) * sizeof(int))
        self.key = <int *>malloc(max(self.npairs, 1) * sizeof(int))
        self.best = <int *>malloc(max(self.npairs, 1) * sizeof(int))
        self.rem = <int *>malloc(max(self.v, 1) * sizeof(int))
        self.last_of_row = <int *>malloc(max(self.v, 1) * sizeof(int))
        self.anti = <int *>malloc(max(self.v, 1) * sizeof(int))
        self.autos = <int *>malloc(max(self.ngroup * self.v, 1) * sizeof(int))
        for i in range(self.v):
            for j in range(i, self.v):
                self.pi[k] = i
                self.pj[k] = j
                self.mult[k] = 0
                self.last_of_row[i] = k
                k += 1
            self.rem[i] = sizes[i]
            self.anti[i] = 1 if anti[i] else 0
        for g in range(self.ngroup):
            for i in range(self.v):
                self.autos[g * self.v + i] = autos[g][i]
        self.seen = set()

    def __dealloc__(self):
        free(self.pi)
        free(self.pj)
        free(self.mult)
        free(self.key)
        free(self.best)
        free(self.rem)
        free(self.last_of_row)
        free(self.anti)
        free(self.autos)

    cdef void canon(self):
        cdef int g, k, a, b, t, first = 1, better
        cdef int *perm
        for g in range(self.ngroup):
            perm = self.autos + g * self.v
            memset(self.key, 0, self.npairs * sizeof(int))
            for k in range(self.npairs):
                if self.mult[k]:
                    a = perm[self.pi[k]]
                    b = perm[self.pj[k]]
                    if a > b:
                        t = a
                        a = b
                        b = t
                    self.key[_pidx(a, b, self.v)] = self.mult[k]
            if first:
                better = 1
                first = 0
            else:
                better = 0
                for k in range(self.npairs):
                    if self.key[k] != self.best[k]:
                        better = self.key[k] < self.best[k]
                        break
            if better:
                for k in range(self.npairs):
                    self.best[k] = self.key[k]
        self.seen.add(tuple([self.best[k] for k in range(self.npairs)]))

    cdef void rec(self, int k):
        cdef int i, j, c, top, r
        if k == self.npairs:
            for r in range(self.v):
                if self.rem[r]:
                    return
            self.canon()
            return
        i = self.pi[k]
        j = self.pj[k]
        if i == j:
            if self.anti[i] or self.rem[i] < 2:
                top = 0
            else:
                top = self.rem[i] // 2
            c = top
            while c >= 0:
                if not (k == self.last_of_row[i] and self.rem[i] != 2 * c):
                    self.mult[k] = c
                    self.rem[i] -= 2 * c
                    self.rec(k + 1)
                    self.rem[i] += 2 * c
                c -= 1
            self.mult[k] = 0
            return
        top = self.rem[i] if self.rem[i] < self.rem[j] else self.rem[j]
        if (self.anti[i] or self.anti[j]) and top > 1:
            top = 1
        c = top
        while c >= 0:
            if not (k == self.last_of_row[i] and self.rem[i] - c != 0):
                self.mult[k] = c
                self.rem[i] -= c
                self.rem[j] -= c
                self.rec(k + 1)
                self.rem[i] += c
                self.rem[j] += c
            c -= 1
        self.mult[k] = 0


def enumerate_multigraphs(sizes, anti, autos):
    if len(sizes) == 0:
        return [()]
    st = _MGState(sizes, anti, autos)
    st.rec(0)
    return sorted(st.seen)
