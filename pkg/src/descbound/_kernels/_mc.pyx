# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled Monte Carlo kernels.

Bit-identical to ``fallback.py``; see that module and ``descbound.rng`` for
the draw-index scheme.  Loops run with the GIL released so the caller can
shard trials across threads.
"""

from libc.stdint cimport int64_t, uint64_t

cdef uint64_t GAMMA = 0x9E3779B97F4A7C15UL
cdef uint64_t M1 = 0xBF58476D1CE4E5B9UL
cdef uint64_t M2 = 0x94D049BB133111EBUL


cdef inline uint64_t mix64(uint64_t z) nogil:
    z ^= z >> 30
    z *= M1
    z ^= z >> 27
    z *= M2
    z ^= z >> 31
    return z


def backend_name():
    return "cython"


def chernoff_tail_count(uint64_t seed, int64_t trials, int64_t n,
                        uint64_t threshold, int64_t count_max):
    """Number of trials whose Bernoulli success count is <= count_max."""
    cdef int64_t t, j, count, violations = 0
    cdef uint64_t base, raw
    if trials <= 0 or count_max < 0:
        return 0
    if count_max >= n:
        return trials
    with nogil:
        for t in range(trials):
            base = (<uint64_t> t) * (<uint64_t> n)
            count = 0
            for j in range(n):
                raw = mix64(seed + (base + (<uint64_t> j) + 1UL) * GAMMA)
                if (raw >> 11) < threshold:
                    count += 1
            if count <= count_max:
                violations += 1
    return violations


def coverage_violation_count(uint64_t seed, int64_t trials, int64_t n,
                             uint64_t[::1] thresholds,
                             int64_t[::1] count_maxes):
    """Number of trials in which at least one classifier under-covers."""
    cdef int64_t m = thresholds.shape[0]
    cdef int64_t t, c, j, count, violations = 0
    cdef uint64_t base, raw, thr
    cdef int64_t cmax
    if trials <= 0 or m == 0:
        return 0
    with nogil:
        for t in range(trials):
            for c in range(m):
                cmax = count_maxes[c]
                if cmax < 0:
                    continue
                thr = thresholds[c]
                base = ((<uint64_t> t) * (<uint64_t> m) + (<uint64_t> c)) \
                    * (<uint64_t> n)
                count = 0
                for j in range(n):
                    raw = mix64(seed + (base + (<uint64_t> j) + 1UL) * GAMMA)
                    if (raw >> 11) < thr:
                        count += 1
                if count <= cmax:
                    violations += 1
                    break  # draws are counter-indexed, skipping is safe
    return violations
