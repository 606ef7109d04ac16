"""Monte Carlo and numeric checks for the probabilistic guarantees.

Three checks live here:

* :func:`mc_chernoff` simulates the lower-tail bound for the mean of n
  Bernoulli(p) samples and compares the observed tail mass against
  exp(-n eps^2 / (2 p (1 - p)));
* :func:`mc_theorem_coverage` simulates a finite class of fixed classifiers
  that all share one description length and measures how often any of them
  lands below its population-error bound on a fresh test set;
* :func:`kl_scan` sweeps the inequality KL(p - eps || p) >= eps^2 / (2p(1-p))
  over a lattice and counts violations.

Randomness is drawn through the counter scheme of :mod:`descbound.rng`.
Worker w of a run reads the stream seeded with ``worker_seed(seed, w)``;
this holds for ``workers = 1`` as well, so a single-worker run is exactly
the w = 0 slice of the same scheme.  Trials are dealt to workers in
contiguous blocks (``trials // workers`` each, the remainder spread over
the lowest-numbered workers).  A fixed (seed, workers) pair therefore
reproduces bit for bit; changing only ``workers`` changes which streams
are read, so results across worker counts agree statistically, not
exactly.

Draw-index layouts (stream indices within one worker's stream):

* chernoff: trial t, sample j reads index ``t*n + j``;
* coverage: trial t, classifier c, sample j reads index ``(t*m + c)*n + j``.

Because every index maps to an independent-looking output, a kernel may
stop scanning a trial early (coverage does, after the first violation)
without disturbing any later draw.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels, rng
from .bounds import DomainError, chernoff_lower_tail, kl_bernoulli

LN2 = math.log(2.0)

__all__ = [
    "McConfig",
    "McReport",
    "mc_chernoff",
    "mc_theorem_coverage",
    "kl_scan",
]


@dataclass(frozen=True)
class McConfig:
    """Trial count, master seed, and worker count for one Monte Carlo run."""

    trials: int
    seed: int = 42
    workers: int = 1

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise DomainError(f"trials must be >= 1, got {self.trials}")
        if self.workers < 1:
            raise DomainError(f"workers must be >= 1, got {self.workers}")
        # seeds live in Z/2^64; normalise so every int is accepted
        object.__setattr__(self, "seed", self.seed & rng.MASK64)

    def split(self) -> list[tuple[int, int]]:
        """Per-worker (seed, trials) pairs; block sizes differ by at most 1."""
        base, rem = divmod(self.trials, self.workers)
        out = []
        for w in range(self.workers):
            t = base + (1 if w < rem else 0)
            if t > 0:
                out.append((rng.worker_seed(self.seed, w), t))
        return out


@dataclass(frozen=True)
class McReport:
    """Outcome of one Monte Carlo check.

    ``passed`` is not free-standing: it must equal
    ``empirical <= analytic + 3 * std_err``.
    """

    empirical: float
    analytic: float
    passed: bool
    std_err: float

    def __post_init__(self) -> None:
        if self.passed != (self.empirical <= self.analytic + 3.0 * self.std_err):
            raise ValueError("passed flag contradicts the 3-sigma rule")


def _proportion_report(violations: int, trials: int, analytic: float) -> McReport:
    empirical = violations / trials
    # normal approximation of the binomial proportion
    std_err = math.sqrt(empirical * (1.0 - empirical) / trials)
    passed = empirical <= analytic + 3.0 * std_err
    return McReport(empirical=empirical, analytic=analytic,
                    passed=passed, std_err=std_err)


def _run_sharded(cfg: McConfig, one_worker) -> int:
    """Sum ``one_worker(seed, trials)`` over the worker split of ``cfg``."""
    shards = cfg.split()
    if len(shards) == 1:
        seed, trials = shards[0]
        return one_worker(seed, trials)
    # kernels release the GIL (compiled) or spend their time inside NumPy
    # (fallback), so threads give real parallelism without IPC
    with ThreadPoolExecutor(max_workers=len(shards)) as pool:
        futures = [pool.submit(one_worker, seed, trials)
                   for seed, trials in shards]
        return sum(f.result() for f in futures)


def mc_chernoff(p: float, eps: float, n: int, cfg: McConfig) -> McReport:
    """Measure P(mean of n Bernoulli(p) <= p - eps) against the tail bound.

    Domain: 0 < p <= 1/2, 0 <= eps < p, n >= 1.  At eps = 0 the bound is
    the vacuous 1.0 and the check passes trivially.
    """
    if not 0.0 < p <= 0.5:
        raise DomainError(f"p must be in (0, 1/2], got {p}")
    if not 0.0 <= eps < p:
        raise DomainError(f"eps must be in [0, p), got eps={eps}, p={p}")
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    analytic = 1.0 if eps == 0.0 else chernoff_lower_tail(p, eps, n)
    threshold = rng.bernoulli_threshold(p)
    # mean <= p - eps  <=>  success count <= floor(n * (p - eps));
    # the cutoff is evaluated in double precision, matching the bound's
    # own arithmetic
    count_max = math.floor(n * (p - eps))

    def one_worker(seed: int, trials: int) -> int:
        return _kernels.chernoff_tail_count(seed, trials, n, threshold,
                                            count_max)

    violations = _run_sharded(cfg, one_worker)
    return _proportion_report(violations, cfg.trials, analytic)


def mc_theorem_coverage(s_bits: int, n: int, cap_c: float, delta: float,
                        class_errors: list[float] | tuple[float, ...],
                        cfg: McConfig) -> McReport:
    """Measure how often any classifier beats its population-error bound.

    A class of ``len(class_errors)`` fixed classifiers is simulated, all
    with description length ``s_bits``; classifier c has population error
    p_c = class_errors[c].  Each trial draws an independent test set of
    size n for every classifier and flags a violation when any classifier's
    observed error X_c / n falls strictly below p_c - eps_c, where

        eps_c = sqrt(2 ln 2 * p_c (1 - p_c) * (s_bits + log2(cap_c/delta)) / n).

    That event is exactly a failure of the population-error form of the
    guarantee (p_c <= observed + eps_c).  Run at one fixed description
    length the true failure rate is at most delta / cap_c, so comparing
    against ``analytic = delta`` is deliberately loose.

    Domain: 1 <= s_bits <= cap_c (lengths index the class decomposition),
    at most 2**s_bits classifiers, each error in (0, 1/2], n >= 1,
    0 < delta < 1.
    """
    if s_bits < 1:
        raise DomainError(f"s_bits must be >= 1, got {s_bits}")
    if cap_c < s_bits:
        raise DomainError(
            f"cap_c must be >= s_bits, got cap_c={cap_c}, s_bits={s_bits}")
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must be in (0, 1), got {delta}")
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    m = len(class_errors)
    if s_bits < 64 and m > (1 << s_bits):
        raise DomainError(
            f"{m} classifiers do not fit in 2^{s_bits} descriptions")
    for p_c in class_errors:
        if not 0.0 < p_c <= 0.5:
            raise DomainError(
                f"class errors must be in (0, 1/2], got {p_c}")

    if m == 0:
        return McReport(empirical=0.0, analytic=delta, passed=True,
                        std_err=0.0)

    budget = s_bits + math.log2(cap_c / delta)
    thresholds = np.empty(m, dtype=np.uint64)
    count_maxes = np.empty(m, dtype=np.int64)
    for c, p_c in enumerate(class_errors):
        eps_c = math.sqrt(2.0 * LN2 * p_c * (1.0 - p_c) * budget / n)
        thresholds[c] = rng.bernoulli_threshold(p_c)
        # violation iff X_c < n * (p_c - eps_c); for an integer count that
        # is X_c <= ceil(cutoff) - 1, and a negative bound can never fire
        count_maxes[c] = math.ceil(n * (p_c - eps_c)) - 1

    def one_worker(seed: int, trials: int) -> int:
        return _kernels.coverage_violation_count(seed, trials, n,
                                                 thresholds, count_maxes)

    violations = _run_sharded(cfg, one_worker)
    return _proportion_report(violations, cfg.trials, delta)


def kl_scan(grid_p: int, grid_eps: int) -> int:
    """Count lattice violations of KL(p - eps || p) >= eps^2 / (2p(1-p)).

    The lattice covers the inequality's domain: p takes grid_p values
    0.5 * i / grid_p (i = 1..grid_p) spanning (0, 1/2], and for each p,
    eps takes grid_eps values p * j / grid_eps (j = 0..grid_eps - 1)
    spanning [0, p).  A point violates when the KL side is smaller by
    more than 1e-15.
    """
    if grid_p < 2 or grid_eps < 2:
        raise DomainError(
            f"grid sizes must be >= 2, got ({grid_p}, {grid_eps})")
    violations = 0
    for i in range(1, grid_p + 1):
        p = 0.5 * i / grid_p
        denom = 2.0 * p * (1.0 - p)
        for j in range(grid_eps):
            eps = p * j / grid_eps
            if kl_bernoulli(p, eps) < eps * eps / denom - 1e-15:
                violations += 1
    return violations
