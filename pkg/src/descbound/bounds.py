"""True-error bounds from description length.

A model described in s bits, picked from a catalogue of at most C
candidates and measured at error p_hat on n held-out samples, has true
error at most p*, the fixed point of

    T(p) = p_hat + sqrt(K * p * (1 - p)),
    K    = 2 * ln(2) * (s + log2(C / delta)) / n,

with probability 1 - delta.  T's fixed points are the roots of the
quadratic

    (1 + K) p**2 - (2 p_hat + K) p + p_hat**2 = 0,

whose discriminant K * (K + 4 p_hat (1 - p_hat)) is nonnegative, so real
roots always exist.  p_hat lies between the roots (the quadratic evaluates
to -K p_hat (1 - p_hat) <= 0 there), hence exactly one root is >= p_hat;
that larger root is the bound.  ``solve_bound`` evaluates it in the
numerically stable form

    q  = ((2 p_hat + K) + sqrt(disc)) / 2
    p2 = q / (1 + K),     p1 = p_hat**2 / q

which avoids cancellation for small p_hat.  ``iterate_bound`` reaches the
same value by iterating T, as a cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

DEFAULT_N_TEST = 50_000
DEFAULT_CAP_C = 5_000
DEFAULT_DELTA = 0.05

# |T(p*) - p*| permitted before solve_bound declares its own answer wrong
FIXED_POINT_TOL = 1e-12
# permitted disagreement between the closed form and the iteration
AGREEMENT_TOL = 1e-10


class DomainError(ValueError):
    """An input lies outside the mathematical domain of the operation."""


class NumericalError(ArithmeticError):
    """An internal numerical invariant failed (indicates a bug, not bad input)."""


def kl_bernoulli(p: float, eps: float) -> float:
    """KL(p - eps || p) between Bernoulli distributions, in nats.

    Requires 0 < p < 1 and 0 <= eps < p.  Written with log1p so the result
    stays accurate when eps is tiny relative to p.
    """
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must be in (0, 1), got {p}")
    if eps < 0.0 or eps >= p:
        raise DomainError(f"eps must be in [0, p), got eps={eps}, p={p}")
    if eps == 0.0:
        return 0.0
    a = p - eps
    b = 1.0 - p + eps
    return a * math.log1p(-eps / p) + b * math.log1p(eps / (1.0 - p))


def chernoff_lower_tail(p: float, eps: float, n: int) -> float:
    """Bound on P(mean of n Bernoulli(p) samples <= p - eps).

    Valid for 0 < p <= 1/2 and 0 < eps < p: the lower tail is at most
    exp(-n * eps**2 / (2 p (1 - p))).
    """
    if not 0.0 < p <= 0.5:
        raise DomainError(f"p must be in (0, 1/2], got {p}")
    if not 0.0 < eps < p:
        raise DomainError(f"eps must be in (0, p), got eps={eps}, p={p}")
    if n <= 0:
        raise DomainError(f"n must be positive, got {n}")
    return math.exp(-n * eps * eps / (2.0 * p * (1.0 - p)))


@dataclass(frozen=True)
class BoundInputs:
    """Inputs to the bound: observed error, description length, catalogue size."""

    p_hat: float
    desc_bits: float
    n_test: int = DEFAULT_N_TEST
    cap_c: float = DEFAULT_CAP_C
    delta: float = DEFAULT_DELTA

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_hat < 1.0:
            raise DomainError(f"p_hat must be in [0, 1), got {self.p_hat}")
        if self.desc_bits < 1.0:
            raise DomainError(
                f"desc_bits must be >= 1 (every model costs at least one bit), "
                f"got {self.desc_bits}")
        if self.n_test <= 0:
            raise DomainError(f"n_test must be positive, got {self.n_test}")
        if self.cap_c < 1.0:
            raise DomainError(f"cap_c must be >= 1, got {self.cap_c}")
        if not 0.0 < self.delta < 1.0:
            raise DomainError(f"delta must be in (0, 1), got {self.delta}")

    @property
    def slack(self) -> float:
        """The coefficient K = 2 ln(2) (desc_bits + log2(cap_c / delta)) / n_test."""
        budget = self.desc_bits + math.log2(self.cap_c / self.delta)
        return 2.0 * math.log(2.0) * budget / self.n_test


def t_map(p: float, inputs: BoundInputs) -> float:
    """One application of T(p) = p_hat + sqrt(K p (1 - p))."""
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must be in [0, 1], got {p}")
    return inputs.p_hat + math.sqrt(inputs.slack * p * (1.0 - p))


@dataclass(frozen=True)
class BoundResult:
    """Solved bound: the fixed point, both quadratic roots, and any caveats.

    warnings may contain:

    * ``"outside_kl_domain"``  -- p_star > 1/2, where the quadratic-KL step
      underlying the bound no longer applies; the number is reported but
      has no coverage guarantee;
    * ``"vacuous_bound"``      -- the solution exceeded 1 and was clamped.
    """

    p_star: float
    slack: float
    roots: tuple[float, float]
    margin: float
    warnings: tuple[str, ...] = field(default_factory=tuple)


def solve_bound(inputs: BoundInputs) -> BoundResult:
    """Closed-form fixed point of T: the larger root of the bound quadratic."""
    k = inputs.slack
    p_hat = inputs.p_hat
    if p_hat == 0.0:
        # quadratic degenerates: roots 0 and K / (1 + K)
        p_low, p_high = 0.0, k / (1.0 + k)
    else:
        disc = k * (k + 4.0 * p_hat * (1.0 - p_hat))
        if disc < 0.0:
            raise NumericalError(
                f"discriminant {disc} < 0; this cannot happen for valid inputs")
        q = ((2.0 * p_hat + k) + math.sqrt(disc)) / 2.0
        p_high = q / (1.0 + k)
        p_low = p_hat * p_hat / q

    warnings: list[str] = []
    p_star = p_high
    # near-vacuous solutions sit at 1 - p* ~ 1/K, where rounding in the
    # p(1-p) factor is amplified by K; the sanity tolerance scales with it
    residual_tol = FIXED_POINT_TOL * (1.0 + k)
    if p_star > 1.0:
        p_star = 1.0
        warnings.append("vacuous_bound")
    elif abs(t_map(p_star, inputs) - p_star) > residual_tol:
        raise NumericalError(
            f"fixed-point residual {t_map(p_star, inputs) - p_star} exceeds "
            f"{residual_tol}")
    if p_star > 0.5:
        warnings.append("outside_kl_domain")
    return BoundResult(
        p_star=p_star,
        slack=k,
        roots=(p_low, p_high),
        margin=p_star - p_hat,
        warnings=tuple(warnings),
    )


def iterate_bound(inputs: BoundInputs, tol: float = 1e-15,
                  max_iter: int = 10_000) -> float:
    """Fixed point of T by direct iteration from max(p_hat, 1/2).

    Independent of the closed form; used to cross-check it.  From any start
    in [p*, 1] the iteration descends monotonically to the larger fixed
    point p*, and near p* with p* <= 1/2 the contraction factor is below
    1/2, so convergence is fast.  Only meaningful when the solution lies in
    [0, 1]; callers should prefer :func:`solve_bound` for the general case.
    """
    p = max(inputs.p_hat, 0.5)
    for _ in range(max_iter):
        p_next = t_map(min(p, 1.0), inputs)
        if abs(p_next - p) <= tol:
            return p_next
        p = p_next
    raise NumericalError(f"no convergence after {max_iter} iterations")


def folklore_bound(desc_bits: float, n_test: int, c_const: float = 1.0) -> float:
    """The rule-of-thumb generalisation gap c * sqrt(k / N) for k-bit models."""
    if desc_bits < 0.0:
        raise DomainError(f"desc_bits must be >= 0, got {desc_bits}")
    if n_test <= 0:
        raise DomainError(f"n_test must be positive, got {n_test}")
    if c_const <= 0.0:
        raise DomainError(f"c_const must be positive, got {c_const}")
    return c_const * math.sqrt(desc_bits / n_test)
