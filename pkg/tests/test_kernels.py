"""Monte Carlo kernels against a scalar reference, and backend agreement.

The reference below evaluates every draw through ``rng.stream_output``
one index at a time; both production kernels (compiled and NumPy) must
reproduce its counts exactly, draw for draw.
"""

from __future__ import annotations

import os
import subprocess
import sys

import numpy as np
import pytest

from descbound import _kernels, rng
from descbound._kernels import fallback

BACKENDS = [pytest.param(fallback, id="numpy")]
if _kernels.HAVE_EXTENSION:
    from descbound._kernels import _mc
    BACKENDS.append(pytest.param(_mc, id="cython"))


def ref_chernoff(seed, trials, n, threshold, count_max):
    violations = 0
    for t in range(trials):
        count = sum(
            1 for j in range(n)
            if (rng.stream_output(seed, t * n + j) >> 11) < threshold)
        if count <= count_max:
            violations += 1
    return violations


def ref_coverage(seed, trials, n, thresholds, count_maxes):
    m = len(thresholds)
    violations = 0
    for t in range(trials):
        for c in range(m):
            if count_maxes[c] < 0:
                continue
            count = sum(
                1 for j in range(n)
                if (rng.stream_output(seed, (t * m + c) * n + j) >> 11)
                < thresholds[c])
            if count <= count_maxes[c]:
                violations += 1
                break
    return violations


CHERNOFF_CASES = [
    # (seed, trials, n, p, count_max)
    (42, 40, 25, 0.5, 10),
    (7, 25, 50, 0.2, 8),
    (0, 30, 10, 0.9, 9),
    (123456789, 20, 33, 0.0449, 1),
]


@pytest.mark.parametrize("impl", BACKENDS)
@pytest.mark.parametrize("seed,trials,n,p,count_max", CHERNOFF_CASES)
def test_chernoff_count_matches_reference(impl, seed, trials, n, p, count_max):
    threshold = rng.bernoulli_threshold(p)
    expected = ref_chernoff(seed, trials, n, threshold, count_max)
    assert impl.chernoff_tail_count(seed, trials, n, threshold,
                                    count_max) == expected


@pytest.mark.parametrize("impl", BACKENDS)
def test_chernoff_count_edge_cases(impl):
    threshold = rng.bernoulli_threshold(0.5)
    assert impl.chernoff_tail_count(42, 0, 10, threshold, 5) == 0
    assert impl.chernoff_tail_count(42, 10, 10, threshold, -1) == 0
    assert impl.chernoff_tail_count(42, 10, 10, threshold, 10) == 10


COVERAGE_CASES = [
    # (seed, trials, n, probabilities, count_maxes)
    (42, 20, 30, (0.2, 0.4, 0.1), (4, 10, 2)),
    (9, 15, 40, (0.5, 0.5), (18, -1)),       # second classifier disabled
    (0, 25, 12, (0.3,), (3,)),
    (314159, 10, 20, (0.05, 0.95, 0.5), (-1, 17, 9)),
]


@pytest.mark.parametrize("impl", BACKENDS)
@pytest.mark.parametrize("seed,trials,n,probs,cmaxes", COVERAGE_CASES)
def test_coverage_count_matches_reference(impl, seed, trials, n, probs,
                                          cmaxes):
    thresholds = [rng.bernoulli_threshold(p) for p in probs]
    expected = ref_coverage(seed, trials, n, thresholds, list(cmaxes))
    got = impl.coverage_violation_count(
        seed, trials, n,
        np.asarray(thresholds, dtype=np.uint64),
        np.asarray(cmaxes, dtype=np.int64))
    assert got == expected


@pytest.mark.parametrize("impl", BACKENDS)
def test_coverage_count_edge_cases(impl):
    empty_thr = np.asarray([], dtype=np.uint64)
    empty_max = np.asarray([], dtype=np.int64)
    assert impl.coverage_violation_count(42, 10, 5, empty_thr, empty_max) == 0
    thr = np.asarray([rng.bernoulli_threshold(0.5)], dtype=np.uint64)
    assert impl.coverage_violation_count(
        42, 0, 5, thr, np.asarray([2], dtype=np.int64)) == 0
    # all classifiers disabled: no trial can violate
    assert impl.coverage_violation_count(
        42, 10, 5, thr, np.asarray([-1], dtype=np.int64)) == 0


@pytest.mark.skipif(not _kernels.HAVE_EXTENSION,
                    reason="compiled kernel not built")
def test_backends_bit_identical_at_scale():
    threshold = rng.bernoulli_threshold(0.3)
    args = (97, 5000, 200, threshold, 50)
    assert _mc.chernoff_tail_count(*args) == \
        fallback.chernoff_tail_count(*args)
    thr = np.asarray([rng.bernoulli_threshold(p) for p in (0.2, 0.35, 0.5)],
                     dtype=np.uint64)
    cmax = np.asarray([30, 55, 85], dtype=np.int64)
    assert _mc.coverage_violation_count(97, 800, 180, thr, cmax) == \
        fallback.coverage_violation_count(97, 800, 180, thr, cmax)


def test_fallback_chunking_is_invisible(monkeypatch):
    """Shrinking the chunk size cannot change any count."""
    threshold = rng.bernoulli_threshold(0.4)
    want = fallback.chernoff_tail_count(5, 60, 37, threshold, 14)
    thr = np.asarray([threshold, rng.bernoulli_threshold(0.6)],
                     dtype=np.uint64)
    cmax = np.asarray([14, 20], dtype=np.int64)
    want_cov = fallback.coverage_violation_count(5, 40, 37, thr, cmax)
    monkeypatch.setattr(fallback, "_CHUNK_DRAWS", 64)
    assert fallback.chernoff_tail_count(5, 60, 37, threshold, 14) == want
    assert fallback.coverage_violation_count(5, 40, 37, thr, cmax) == want_cov


def test_pure_env_var_forces_numpy_backend():
    env = dict(os.environ, DESCBOUND_PURE="1")
    out = subprocess.run(
        [sys.executable, "-c",
         "from descbound._kernels import backend_name, HAVE_EXTENSION; "
         "print(backend_name(), HAVE_EXTENSION)"],
        capture_output=True, text=True, env=env, check=True)
    assert out.stdout.split() == ["numpy", "False"]


def test_active_backend_reports_name():
    assert _kernels.backend_name() in ("numpy", "cython")
    if _kernels.HAVE_EXTENSION:
        assert _kernels.backend_name() == "cython"
