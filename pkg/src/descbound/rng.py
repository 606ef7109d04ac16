"""Counter-based pseudo-random numbers for the Monte Carlo checks.

All simulation code in this package draws randomness through the scheme
defined here, so a (seed, workers) pair reproduces results bit for bit on
any platform and in any implementation language.  The generator is
SplitMix64 used in counter mode:

    GAMMA = 0x9E3779B97F4A7C15
    mix64(z):  z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9
               z ^= z >> 27;  z *= 0x94D049BB133111EB
               z ^= z >> 31;  return z
    stream(seed)[i] = mix64((seed + (i + 1) * GAMMA) mod 2**64)

Because output i is a pure function of (seed, i), draws can be indexed
directly instead of sequenced, which lets workers take disjoint slices of
one logical stream without communicating.

Derived quantities:

* worker w of a run with master seed s uses seed(w) = stream(s)[w];
* a 53-bit uniform integer is ``u >> 11`` for a raw output u;
* a uniform float in [0, 1) is ``(u >> 11) * 2.0**-53``;
* a Bernoulli(p) draw succeeds iff ``(u >> 11) < floor(p * 2**53)``.

The Bernoulli rule realises success probability floor(p * 2**53) / 2**53,
within 2**-53 of p; the integer comparison is exact, so there is no
floating-point path in the hot loop.
"""

from __future__ import annotations

import math

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_MIX_M1 = 0xBF58476D1CE4E5B9
_MIX_M2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a 64-bit integer."""
    z &= MASK64
    z ^= z >> 30
    z = (z * _MIX_M1) & MASK64
    z ^= z >> 27
    z = (z * _MIX_M2) & MASK64
    z ^= z >> 31
    return z


def stream_output(seed: int, index: int) -> int:
    """The ``index``-th raw 64-bit output of the stream with the given seed."""
    if index < 0:
        raise ValueError("stream index must be >= 0")
    return mix64((seed + (index + 1) * GAMMA) & MASK64)


def worker_seed(master_seed: int, worker: int) -> int:
    """Seed for worker ``worker``: output ``worker`` of the master stream."""
    return stream_output(master_seed, worker)


def unit_uniform(raw: int) -> float:
    """Map a raw 64-bit output to a uniform float in [0, 1)."""
    return (raw >> 11) * 2.0 ** -53


def bernoulli_threshold(p: float) -> int:
    """Integer threshold t such that ``(raw >> 11) < t`` is a Bernoulli(p) draw.

    p * 2**53 is computed exactly (a power-of-two scaling never rounds), so
    the threshold is the exact floor of the real product.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability out of range: {p}")
    return int(math.floor(p * 2.0 ** 53))


def bernoulli(raw: int, threshold: int) -> bool:
    """Evaluate a Bernoulli draw from a raw output and a precomputed threshold."""
    return (raw >> 11) < threshold
