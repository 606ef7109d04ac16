"""Counter-based SplitMix64: reference vectors and exact draw semantics.

The reference implementation below walks the generator the conventional
way (state += GAMMA, then finalize the state); the package computes output
i directly as mix64(seed + (i+1) * GAMMA).  Both must agree everywhere,
and the seed-0 sequence must equal the widely published SplitMix64 logs.
"""

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from descbound import rng

MASK = (1 << 64) - 1

# first outputs of the standard sequential SplitMix64 for three seeds;
# seed 0 is the sequence quoted in the xoshiro reference material
REFERENCE_VECTORS = {
    0: (0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4,
        0x06C45D188009454F, 0xF88BB8A8724C81EC),
    42: (0xBDD732262FEB6E95, 0x28EFE333B266F103,
         0x47526757130F9F52, 0x581CE1FF0E4AE394),
    0xDEADBEEF: (0x4ADFB90F68C9EB9B, 0xDE586A3141A10922,
                 0x021FBC2F8E1CFC1D, 0x7466CE737BE16790),
}


def _reference_next(state: int) -> tuple[int, int]:
    """One step of textbook SplitMix64: advance the state, mix a copy."""
    state = (state + 0x9E3779B97F4A7C15) & MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return state, z ^ (z >> 31)


@pytest.mark.parametrize("seed,expected", sorted(REFERENCE_VECTORS.items()))
def test_stream_matches_reference_vectors(seed, expected):
    got = tuple(rng.stream_output(seed, i) for i in range(len(expected)))
    assert got == expected


@given(st.integers(min_value=0, max_value=MASK))
def test_counter_form_equals_sequential_walk(seed):
    state = seed
    for i in range(8):
        state, expected = _reference_next(state)
        assert rng.stream_output(seed, i) == expected


@given(st.integers())
def test_mix64_stays_in_64_bits(z):
    out = rng.mix64(z)
    assert 0 <= out <= MASK


def test_stream_output_rejects_negative_index():
    with pytest.raises(ValueError):
        rng.stream_output(0, -1)


@given(st.integers(min_value=0, max_value=MASK),
       st.integers(min_value=0, max_value=1000))
def test_worker_seed_is_stream_output(seed, worker):
    assert rng.worker_seed(seed, worker) == rng.stream_output(seed, worker)


@given(st.integers(min_value=0, max_value=MASK))
def test_unit_uniform_range_and_resolution(raw):
    u = rng.unit_uniform(raw)
    assert 0.0 <= u < 1.0
    assert u == (raw >> 11) * 2.0 ** -53


@given(st.floats(min_value=0.0, max_value=1.0))
def test_bernoulli_threshold_is_exact_floor(p):
    # independent route: exact rational arithmetic
    expected = (Fraction(p) * 2 ** 53).__floor__()
    assert rng.bernoulli_threshold(p) == expected


def test_bernoulli_threshold_edges():
    assert rng.bernoulli_threshold(0.0) == 0
    assert rng.bernoulli_threshold(1.0) == 2 ** 53
    with pytest.raises(ValueError):
        rng.bernoulli_threshold(-0.01)
    with pytest.raises(ValueError):
        rng.bernoulli_threshold(1.01)


@given(st.integers(min_value=0, max_value=MASK))
def test_bernoulli_draw_semantics(raw):
    threshold = rng.bernoulli_threshold(0.3)
    assert rng.bernoulli(raw, threshold) == ((raw >> 11) < threshold)


def test_bernoulli_success_rate_is_threshold_over_2_53():
    """Success probability is exactly floor(p * 2^53) / 2^53 by counting."""
    # tiny 6-bit model of the same rule: threshold t means t of 2**6
    # uniforms succeed; here we just confirm the comparison is half-open
    threshold = rng.bernoulli_threshold(0.5)
    assert rng.bernoulli((threshold - 1) << 11, threshold)
    assert not rng.bernoulli(threshold << 11, threshold)
