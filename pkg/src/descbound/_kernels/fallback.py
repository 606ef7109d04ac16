"""NumPy implementation of the Monte Carlo kernels.

Bit-identical to the compiled kernel in ``_mc.pyx``: both realise the
counter-based SplitMix64 scheme documented in :mod:`descbound.rng` and the
draw-index layouts documented in :mod:`descbound.verify`.  Work is chunked
so peak memory stays modest regardless of trial count.
"""

from __future__ import annotations

import numpy as np

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_SHIFT11 = np.uint64(11)

# draws per chunk; 8M uint64 ~ 64 MB transient
_CHUNK_DRAWS = 1 << 23


def _mix64(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> np.uint64(30))
    z = z * _M1
    z = z ^ (z >> np.uint64(27))
    z = z * _M2
    z = z ^ (z >> np.uint64(31))
    return z


def backend_name() -> str:
    return "numpy"


def chernoff_tail_count(seed: int, trials: int, n: int, threshold: int,
                        count_max: int) -> int:
    """Number of trials whose Bernoulli success count is <= count_max.

    Trial t, sample j reads stream index t*n + j of the stream seeded with
    ``seed``.  A sample succeeds iff ``(raw >> 11) < threshold``.
    """
    if trials <= 0:
        return 0
    if count_max < 0:
        return 0
    if count_max >= n:
        return trials
    seed_u = np.uint64(seed)
    thr = np.uint64(threshold)
    per_chunk = max(1, _CHUNK_DRAWS // n)
    violations = 0
    for t0 in range(0, trials, per_chunk):
        t1 = min(t0 + per_chunk, trials)
        # stream indices t*n + j, pre-offset by +1 for the counter formula
        idx1 = np.arange(t0 * n + 1, t1 * n + 1, dtype=np.uint64)
        raw = _mix64(seed_u + idx1 * _GAMMA)
        hits = (raw >> _SHIFT11) < thr
        counts = hits.reshape(t1 - t0, n).sum(axis=1)
        violations += int((counts <= count_max).sum())
    return violations


def coverage_violation_count(seed: int, trials: int, n: int,
                             thresholds: np.ndarray,
                             count_maxes: np.ndarray) -> int:
    """Number of trials in which at least one classifier under-covers.

    For trial t, classifier c, sample j the stream index is
    (t*m + c)*n + j where m = len(thresholds).  Classifier c under-covers
    in a trial iff its success count is <= count_maxes[c].
    """
    m = len(thresholds)
    if trials <= 0 or m == 0:
        return 0
    seed_u = np.uint64(seed)
    thr = np.asarray(thresholds, dtype=np.uint64)
    cmax = np.asarray(count_maxes, dtype=np.int64)
    per_chunk = max(1, _CHUNK_DRAWS // (m * n))
    j_off = np.arange(1, n + 1, dtype=np.uint64)
    violations = 0
    for t0 in range(0, trials, per_chunk):
        t1 = min(t0 + per_chunk, trials)
        t_idx = np.arange(t0, t1, dtype=np.uint64)
        violated = np.zeros(t1 - t0, dtype=bool)
        for c in range(m):
            if cmax[c] < 0:
                continue
            base = (t_idx * np.uint64(m) + np.uint64(c)) * np.uint64(n)
            idx1 = base[:, None] + j_off[None, :]
            raw = _mix64(seed_u + idx1 * _GAMMA)
            counts = ((raw >> _SHIFT11) < thr[c]).sum(axis=1)
            violated |= counts <= cmax[c]
        violations += int(violated.sum())
    return violations
