# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels for the count-chain solver and the Monte Carlo loops.

Random draws come from the PCG64 stream through ``bitgen_t.next_double``,
which is what ``Generator.random()`` returns, in the same order as
``_pykernels``.
"""
from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from libc.math cimport log1p, pow
from libc.stdlib cimport free, malloc
from numpy.random cimport bitgen_t

import numpy as np

NAME = "cython"

cdef double LOG_PMF0_FLOOR = -700.0


cdef bitgen_t* _bitgen(object bit_generator) except NULL:
    capsule = bit_generator.capsule
    if not PyCapsule_IsValid(capsule, "BitGenerator"):
        raise ValueError("invalid bit generator capsule")
    return <bitgen_t*> PyCapsule_GetPointer(capsule, "BitGenerator")


cdef inline double _u(bitgen_t* rng) noexcept nogil:
    return rng.next_double(rng.state)


cdef void _binomial_pmf(Py_ssize_t m, double p, double* out) noexcept nogil:
    # mode-anchored ratio recurrence, normalised; mirrors chain.binomial_pmf
    cdef Py_ssize_t j, mode
    cdef double odds, s
    for j in range(m + 1):
        out[j] = 0.0
    if p <= 0.0:
        out[0] = 1.0
        return
    if p >= 1.0:
        out[m] = 1.0
        return
    mode = <Py_ssize_t>((m + 1) * p)
    if mode > m:
        mode = m
    odds = p / (1.0 - p)
    out[mode] = 1.0
    for j in range(mode, m):
        out[j + 1] = out[j] * ((m - j) / (j + 1.0) * odds)
    for j in range(mode - 1, -1, -1):
        out[j] = out[j + 1] * (1.0 / ((m - j) / (j + 1.0) * odds))
    s = 0.0
    for j in range(m + 1):
        s += out[j]
    for j in range(m + 1):
        out[j] /= s


cdef void _row(Py_ssize_t n, double p, Py_ssize_t k, double* row,
               double* w1, double* w2) noexcept nogil:
    # row[0..k+1] of the count-chain transition matrix
    cdef Py_ssize_t j
    cdef double gain = (n - k) / <double>n
    cdef double stay = k / <double>n
    for j in range(k + 2):
        row[j] = 0.0
    if k < n:
        _binomial_pmf(k + 1, p, w1)
        for j in range(k + 2):
            row[j] += gain * w1[k + 1 - j]
    if k > 0:
        _binomial_pmf(k, p, w2)
        for j in range(k + 1):
            row[j] += stay * w2[k - j]


def transition_row(Py_ssize_t n, double p, Py_ssize_t k):
    out = np.zeros(n + 1)
    cdef double[::1] o = out
    cdef double* w1 = <double*> malloc((n + 2) * sizeof(double))
    cdef double* w2 = <double*> malloc((n + 2) * sizeof(double))
    cdef double* row = <double*> malloc((n + 2) * sizeof(double))
    cdef Py_ssize_t j
    if w1 == NULL or w2 == NULL or row == NULL:
        free(w1); free(w2); free(row)
        raise MemoryError()
    _row(n, p, k, row, w1, w2)
    for j in range(min(k + 2, n + 1)):
        o[j] = row[j]
    free(w1); free(w2); free(row)
    return out


def hessenberg_solve(Py_ssize_t n, double p):
    """Forward elimination / back substitution on the banded ``(I - Q) h = 1``.

    Rows are generated and eliminated one at a time (row-oriented order, same
    arithmetic per entry as the column sweep), keeping O(n) memory.  For each
    earlier column ``c``: ``m = A[r,c] / U[c,c]``, ``A[r,c+1] -= m U[c,c+1]``,
    ``b[r] -= m b'[c]``.  The pivot ``U[c,c]`` is taken as ``P[c,c+1]``, the
    row sum of the partially eliminated system, instead of the cancellation
    prone ``A[c,c] - m U[c-1,c]``.
    """
    h = np.empty(n)
    cdef double[::1] hv = h
    cdef double* piv = <double*> malloc(n * sizeof(double))
    cdef double* bp = <double*> malloc(n * sizeof(double))
    cdef double* row = <double*> malloc((n + 2) * sizeof(double))
    cdef double* w1 = <double*> malloc((n + 2) * sizeof(double))
    cdef double* w2 = <double*> malloc((n + 2) * sizeof(double))
    cdef Py_ssize_t r, c, k
    cdef double x, m, br
    if piv == NULL or bp == NULL or row == NULL or w1 == NULL or w2 == NULL:
        free(piv); free(bp); free(row); free(w1); free(w2)
        raise MemoryError()
    with nogil:
        for r in range(n):
            _row(n, p, r, row, w1, w2)
            piv[r] = row[r + 1]
            x = (1.0 - row[0]) if r == 0 else -row[0]
            br = 1.0
            for c in range(r):
                m = x / piv[c]
                br = br - m * bp[c]
                if c + 1 < r:
                    x = -row[c + 1] - m * (-piv[c])
            bp[r] = br
        hv[n - 1] = bp[n - 1] / piv[n - 1]
        for k in range(n - 2, -1, -1):
            hv[k] = bp[k] / piv[k] + hv[k + 1]
    free(piv); free(bp); free(row); free(w1); free(w2)
    return h


def residual_inf(Py_ssize_t n, double p, h_in):
    cdef double[::1] h = np.ascontiguousarray(h_in, dtype=float)
    cdef double* row = <double*> malloc((n + 2) * sizeof(double))
    cdef double* w1 = <double*> malloc((n + 2) * sizeof(double))
    cdef double* w2 = <double*> malloc((n + 2) * sizeof(double))
    cdef Py_ssize_t r, j, top
    cdef double s, res, worst = 0.0
    if row == NULL or w1 == NULL or w2 == NULL:
        free(row); free(w1); free(w2)
        raise MemoryError()
    with nogil:
        for r in range(n):
            _row(n, p, r, row, w1, w2)
            top = r + 2 if r + 2 <= n else n
            s = 0.0
            for j in range(top):
                s += row[j] * h[j]
            res = h[r] - s - 1.0
            if res < 0:
                res = -res
            if not res <= worst:
                worst = res
    free(row); free(w1); free(w2)
    return worst


cdef inline Py_ssize_t _binomial_draw(bitgen_t* rng, Py_ssize_t m, double p) noexcept nogil:
    cdef bint flip
    cdef double q, r, f, cdf, u
    cdef Py_ssize_t j, x
    if m == 0 or p == 0.0:
        return 0
    if p == 1.0:
        return m
    flip = p > 0.5
    q = 1.0 - p if flip else p
    if m * log1p(-q) > LOG_PMF0_FLOOR:
        r = q / (1.0 - q)
        f = pow(1.0 - q, <double>m)
        cdf = f
        u = _u(rng)
        j = 0
        while u >= cdf and j < m:
            f *= <double>(m - j) / <double>(j + 1) * r
            j += 1
            cdf += f
        x = j
    else:
        x = 0
        for j in range(m):
            if _u(rng) < q:
                x += 1
    return m - x if flip else x


cdef inline Py_ssize_t _reduced_step(bitgen_t* rng, Py_ssize_t n, double p,
                                     Py_ssize_t k) noexcept nogil:
    cdef Py_ssize_t m = k + 1 if _u(rng) * <double>n >= <double>k else k
    return m - _binomial_draw(rng, m, p)


cdef inline Py_ssize_t _coupon(bitgen_t* rng, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t c = <Py_ssize_t>(_u(rng) * <double>n)
    return c if c < n else n - 1


cdef inline Py_ssize_t _full_step(bitgen_t* rng, Py_ssize_t n, double p,
                                  unsigned char* owned) noexcept nogil:
    cdef Py_ssize_t c = _coupon(rng, n), i, delta = 0
    if not owned[c]:
        owned[c] = 1
        delta = 1
    for i in range(n):
        if owned[i] and _u(rng) < p:
            owned[i] = 0
            delta -= 1
    return delta


def reduced_hitting_time(bit_generator, Py_ssize_t n, double p, Py_ssize_t max_steps):
    cdef bitgen_t* rng = _bitgen(bit_generator)
    cdef Py_ssize_t t, k = 0, hit = -1
    with bit_generator.lock, nogil:
        for t in range(1, max_steps + 1):
            k = _reduced_step(rng, n, p, k)
            if k == n:
                hit = t
                break
    return hit


def reduced_step_counts(bit_generator, Py_ssize_t n, double p, Py_ssize_t k,
                        Py_ssize_t samples):
    cdef bitgen_t* rng = _bitgen(bit_generator)
    counts = np.zeros(n + 1, dtype=np.int64)
    cdef long long[::1] c = counts
    cdef Py_ssize_t i
    with bit_generator.lock, nogil:
        for i in range(samples):
            c[_reduced_step(rng, n, p, k)] += 1
    return counts


def reduced_trajectory(bit_generator, Py_ssize_t n, double p, Py_ssize_t horizon):
    cdef bitgen_t* rng = _bitgen(bit_generator)
    sizes = np.zeros(horizon + 1, dtype=np.int64)
    cdef long long[::1] s = sizes
    cdef Py_ssize_t t, k = 0
    with bit_generator.lock, nogil:
        for t in range(1, horizon + 1):
            k = _reduced_step(rng, n, p, k)
            s[t] = k
    return sizes


def full_trajectory(bit_generator, Py_ssize_t n, double p, Py_ssize_t horizon):
    cdef bitgen_t* rng = _bitgen(bit_generator)
    sizes = np.zeros(horizon + 1, dtype=np.int64)
    owned_arr = np.zeros(n, dtype=np.uint8)
    cdef long long[::1] s = sizes
    cdef unsigned char[::1] owned = owned_arr
    cdef Py_ssize_t t, k = 0
    with bit_generator.lock, nogil:
        for t in range(1, horizon + 1):
            k += _full_step(rng, n, p, &owned[0])
            s[t] = k
    return sizes


def full_state(bit_generator, Py_ssize_t n, double p, Py_ssize_t t):
    cdef bitgen_t* rng = _bitgen(bit_generator)
    owned_arr = np.zeros(n, dtype=np.uint8)
    cdef unsigned char[::1] owned = owned_arr
    cdef Py_ssize_t s
    with bit_generator.lock, nogil:
        for s in range(t):
            _full_step(rng, n, p, &owned[0])
    return owned_arr


def coupled_run(bit_generator, Py_ssize_t n, double p1, double p2, Py_ssize_t max_steps):
    cdef bitgen_t* rng = _bitgen(bit_generator)
    a1 = np.zeros(n, dtype=np.uint8)
    a2 = np.zeros(n, dtype=np.uint8)
    cdef unsigned char[::1] s1 = a1
    cdef unsigned char[::1] s2 = a2
    cdef Py_ssize_t t, i, c, k1 = 0, k2 = 0, t1 = -1, t2 = -1
    cdef bint held = True
    cdef double u
    with bit_generator.lock, nogil:
        for t in range(1, max_steps + 1):
            c = _coupon(rng, n)
            if not s1[c]:
                s1[c] = 1
                k1 += 1
            if not s2[c]:
                s2[c] = 1
                k2 += 1
            for i in range(n):
                u = _u(rng)
                if s1[i] and u < p1:
                    s1[i] = 0
                    k1 -= 1
                if s2[i] and u < p2:
                    s2[i] = 0
                    k2 -= 1
                if s2[i] and not s1[i]:
                    held = False
            if t1 < 0 and k1 == n:
                t1 = t
            if t2 < 0 and k2 == n:
                t2 = t
            if t1 >= 0 and t2 >= 0:
                break
    return t1, t2, bool(held)
