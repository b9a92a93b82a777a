# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: counter-based draws, shelf permutations, inversion
counting, chunked Monte Carlo and odometer enumeration.

Every function here has a twin in ``_pykernels`` with identical semantics;
``shelf_lab._backend`` picks one at import time.
"""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int64_t
from libc.stdlib cimport malloc, calloc, free

cnp.import_array()

BACKEND = "cython"

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef double TWO_M53 = 1.0 / 9007199254740992.0

cdef enum:
    C_INVERSIONS = 0
    C_DESCENTS = 1

STAT_INVERSIONS = C_INVERSIONS
STAT_DESCENTS = C_DESCENTS


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double uniform_at(uint64_t key, uint64_t index) noexcept nogil:
    return <double>(mix64(key + GOLDEN * (index + 1)) >> 11) * TWO_M53


cdef inline int64_t letter_for(double u, const double* thr, int64_t nthr) noexcept nogil:
    # number of thresholds <= u, plus one
    cdef int64_t lo = 0, hi = nthr, mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if thr[mid] <= u:
            lo = mid + 1
        else:
            hi = mid
    return lo + 1


def draw_letters(uint64_t key, uint64_t offset, Py_ssize_t count, double[::1] thresholds):
    cdef cnp.ndarray[int64_t, ndim=1] out = np.empty(count, dtype=np.int64)
    cdef int64_t[::1] ov = out
    cdef const double* thr = &thresholds[0] if thresholds.shape[0] else NULL
    cdef int64_t nthr = thresholds.shape[0]
    cdef Py_ssize_t j
    with nogil:
        for j in range(count):
            ov[j] = letter_for(uniform_at(key, offset + j), thr, nthr)
    return out


cdef void build_perm(const int64_t* letters, int64_t n, int64_t piles,
                     int64_t* counts, int64_t* offsets, int64_t* perm) noexcept nogil:
    cdef int64_t i, k, pos
    for k in range(piles):
        counts[k] = 0
    for i in range(n):
        counts[letters[i] - 1] += 1
    pos = 0
    for k in range(piles):
        offsets[k] = pos
        pos += counts[k]
    # fill[k] reuses offsets as a cursor: odd piles grow forward from the
    # block start, even piles grow backward from the block end
    for k in range(piles):
        if k & 1:
            offsets[k] += counts[k]
    for i in range(n):
        k = letters[i] - 1
        if k & 1:
            offsets[k] -= 1
            perm[offsets[k]] = i + 1
        else:
            perm[offsets[k]] = i + 1
            offsets[k] += 1
    # restore block starts
    pos = 0
    for k in range(piles):
        offsets[k] = pos
        pos += counts[k]


def shelf_permutation(int64_t[::1] letters, int64_t m):
    cdef int64_t n = letters.shape[0]
    cdef int64_t piles = 2 * m
    cdef cnp.ndarray[int64_t, ndim=1] out = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] ov = out
    cdef int64_t* counts = <int64_t*>malloc(piles * sizeof(int64_t))
    cdef int64_t* offsets = <int64_t*>malloc(piles * sizeof(int64_t))
    if counts == NULL or offsets == NULL:
        free(counts)
        free(offsets)
        raise MemoryError()
    if n:
        build_perm(&letters[0], n, piles, counts, offsets, &ov[0])
    free(counts)
    free(offsets)
    return out


cdef int64_t fenwick_inversions(const int64_t* perm, int64_t n, int64_t* tree) noexcept nogil:
    # scan right to left, counting already-seen smaller labels
    cdef int64_t i, j, total = 0, acc
    for i in range(n + 1):
        tree[i] = 0
    for i in range(n - 1, -1, -1):
        acc = 0
        j = perm[i] - 1
        while j > 0:
            acc += tree[j]
            j -= j & (-j)
        total += acc
        j = perm[i]
        while j <= n:
            tree[j] += 1
            j += j & (-j)
    return total


def count_inversions(int64_t[::1] perm):
    cdef int64_t n = perm.shape[0]
    if n < 2:
        return 0
    cdef int64_t* tree = <int64_t*>malloc((n + 1) * sizeof(int64_t))
    if tree == NULL:
        raise MemoryError()
    cdef int64_t total
    with nogil:
        total = fenwick_inversions(&perm[0], n, tree)
    free(tree)
    return total


cdef inline void decompose(const int64_t* perm, int64_t n, int64_t m,
                           const int64_t* counts, const int64_t* offsets,
                           int64_t* out) noexcept nogil:
    # out = (d, E, C, B, nonempty_even)
    cdef int64_t i, k, d = 0, e = 0, c = 0, b = 0, ne = 0, prev_end = -1
    for i in range(n - 1):
        if perm[i] > perm[i + 1]:
            d += 1
    for k in range(2 * m):
        if counts[k] == 0:
            continue
        if k & 1:
            b += counts[k]
            e += counts[k] - 1
            ne += 1
        if prev_end >= 0 and perm[prev_end] > perm[offsets[k]]:
            c += 1
        prev_end = offsets[k] + counts[k] - 1
    out[0] = d
    out[1] = e
    out[2] = c
    out[3] = b
    out[4] = ne


def descent_parts(int64_t[::1] letters, int64_t m):
    """Return (d, E, C, B, nonempty_even) for one word."""
    cdef int64_t n = letters.shape[0]
    cdef int64_t piles = 2 * m
    cdef int64_t parts[5]
    cdef int64_t* counts = <int64_t*>malloc(piles * sizeof(int64_t))
    cdef int64_t* offsets = <int64_t*>malloc(piles * sizeof(int64_t))
    cdef int64_t* perm = <int64_t*>malloc((n + 1) * sizeof(int64_t))
    if counts == NULL or offsets == NULL or perm == NULL:
        free(counts)
        free(offsets)
        free(perm)
        raise MemoryError()
    if n:
        build_perm(&letters[0], n, piles, counts, offsets, perm)
    else:
        for i in range(piles):
            counts[i] = 0
            offsets[i] = 0
    decompose(perm, n, m, counts, offsets, parts)
    free(counts)
    free(offsets)
    free(perm)
    return parts[0], parts[1], parts[2], parts[3], parts[4]


def mc_chunk(uint64_t key, int64_t n, int64_t m, double[::1] thresholds,
             int64_t samples, int stat):
    """Simulate ``samples`` shuffles from the stream ``key``.

    Returns ``(hist, max_dev, violations)``. Sample ``s`` consumes draws
    ``s*n .. s*n+n-1`` of the stream.
    """
    cdef int64_t piles = 2 * m
    cdef int64_t size = n * (n - 1) // 2 + 1 if stat == C_INVERSIONS else n
    cdef cnp.ndarray[int64_t, ndim=1] hist = np.zeros(size, dtype=np.int64)
    cdef int64_t[::1] hv = hist
    cdef const double* thr = &thresholds[0] if thresholds.shape[0] else NULL
    cdef int64_t nthr = thresholds.shape[0]
    cdef int64_t* letters = <int64_t*>malloc(n * sizeof(int64_t))
    cdef int64_t* perm = <int64_t*>malloc(n * sizeof(int64_t))
    cdef int64_t* tree = <int64_t*>malloc((n + 1) * sizeof(int64_t))
    cdef int64_t* counts = <int64_t*>malloc(piles * sizeof(int64_t))
    cdef int64_t* offsets = <int64_t*>malloc(piles * sizeof(int64_t))
    cdef int64_t parts[5]
    cdef int64_t s, j, dev, max_dev = 0, violations = 0, bound = 4 * m - 1
    cdef uint64_t base
    if letters == NULL or perm == NULL or tree == NULL or counts == NULL or offsets == NULL:
        free(letters); free(perm); free(tree); free(counts); free(offsets)
        raise MemoryError()
    with nogil:
        for s in range(samples):
            base = <uint64_t>s * <uint64_t>n
            for j in range(n):
                letters[j] = letter_for(uniform_at(key, base + j), thr, nthr)
            build_perm(letters, n, piles, counts, offsets, perm)
            if stat == C_INVERSIONS:
                hv[fenwick_inversions(perm, n, tree)] += 1
            else:
                decompose(perm, n, m, counts, offsets, parts)
                hv[parts[0]] += 1
                dev = parts[0] - parts[3]
                if dev < 0:
                    dev = -dev
                if dev > max_dev:
                    max_dev = dev
                if parts[0] != parts[1] + parts[2] or dev > bound or parts[2] > piles - 1:
                    violations += 1
    free(letters); free(perm); free(tree); free(counts); free(offsets)
    return hist, max_dev, violations


def enumerate_chunk(int64_t n, int64_t m, int64_t start, int64_t stop):
    """Tally statistics over word indices ``[start, stop)``.

    Word index ``w`` is read in base 2m with the last letter as the least
    significant digit. Returns a dict of histograms plus ``sum_ac`` (the sum
    of pair_order * equal_even) and ``violations`` (pathwise identity
    failures, expected to be zero).
    """
    cdef int64_t piles = 2 * m
    cdef int64_t top = n * (n - 1) // 2 + 1
    names = ("inversions", "pair_sum", "descents", "even_cards", "pair_order", "equal_even",
             "inverse_descents")
    cdef cnp.ndarray[int64_t, ndim=2] hists = np.zeros((7, top + n + 1), dtype=np.int64)
    cdef int64_t[:, ::1] hv = hists
    cdef int64_t* letters = <int64_t*>malloc((n + 1) * sizeof(int64_t))
    cdef int64_t* perm = <int64_t*>malloc((n + 1) * sizeof(int64_t))
    cdef int64_t* counts = <int64_t*>malloc(piles * sizeof(int64_t))
    cdef int64_t* offsets = <int64_t*>malloc(piles * sizeof(int64_t))
    cdef int64_t* pos = <int64_t*>malloc((n + 1) * sizeof(int64_t))
    cdef int64_t parts[5]
    cdef int64_t w, i, k, j, rem, inv, a, c, ides, violations = 0, sum_ac = 0
    if letters == NULL or perm == NULL or counts == NULL or offsets == NULL or pos == NULL:
        free(letters); free(perm); free(counts); free(offsets); free(pos)
        raise MemoryError()
    rem = start
    for j in range(n - 1, -1, -1):
        letters[j] = rem % piles + 1
        rem //= piles
    with nogil:
        for w in range(start, stop):
            build_perm(letters, n, piles, counts, offsets, perm)
            inv = 0
            for i in range(n):
                for k in range(i + 1, n):
                    if perm[i] > perm[k]:
                        inv += 1
            a = 0
            c = 0
            for i in range(n):
                for k in range(i + 1, n):
                    if letters[i] > letters[k]:
                        a += 1
                    elif letters[i] == letters[k] and (letters[i] & 1) == 0:
                        c += 1
            decompose(perm, n, m, counts, offsets, parts)
            for i in range(n):
                pos[perm[i] - 1] = i
            ides = 0
            for i in range(n - 1):
                if pos[i + 1] < pos[i]:
                    ides += 1
            hv[6, ides] += 1
            hv[0, inv] += 1
            hv[1, a + c] += 1
            hv[2, parts[0]] += 1
            hv[3, parts[3]] += 1
            hv[4, a] += 1
            hv[5, c] += 1
            sum_ac += a * c
            if (inv != a + c or parts[0] != parts[1] + parts[2]
                    or parts[2] > piles - 1 or parts[4] > m
                    or parts[0] - parts[3] > 4 * m - 1
                    or parts[3] - parts[0] > 4 * m - 1):
                violations += 1
            # odometer step
            j = n - 1
            while j >= 0:
                if letters[j] < piles:
                    letters[j] += 1
                    break
                letters[j] = 1
                j -= 1
    free(letters); free(perm); free(counts); free(offsets); free(pos)
    out = {name: hists[idx] for idx, name in enumerate(names)}
    out["sum_ac"] = sum_ac
    out["violations"] = violations
    return out
