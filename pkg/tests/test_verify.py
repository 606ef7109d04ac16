"""Monte-Carlo verification layer: sharding, reproducibility, reports."""

from __future__ import annotations

import math

import pytest

from descbound.bounds import DomainError, chernoff_lower_tail, kl_bernoulli
from descbound.rng import worker_seed
from descbound.verify import McConfig, McReport, kl_scan, mc_chernoff, \
    mc_theorem_coverage


def test_config_validation():
    with pytest.raises(ValueError):
        McConfig(trials=0)
    with pytest.raises(ValueError):
        McConfig(trials=10, workers=0)
    assert McConfig(trials=10, seed=-1).seed == 2**64 - 1


def test_config_split_covers_all_trials():
    cfg = McConfig(trials=10, workers=4, seed=9)
    shards = cfg.split()
    assert sum(block for _, block in shards) == 10
    assert [block for _, block in shards] == [3, 3, 2, 2]
    assert [s for s, _ in shards] == [worker_seed(9, w) for w in range(4)]


def test_config_split_drops_empty_shards():
    shards = McConfig(trials=2, workers=8).split()
    assert len(shards) == 2
    assert all(block == 1 for _, block in shards)


def test_report_invariant_enforced():
    with pytest.raises(ValueError):
        McReport(empirical=0.5, analytic=0.1, passed=True, std_err=0.01)
    # the stated pass criterion: empirical <= analytic + 3 x std_err
    McReport(empirical=0.5, analytic=0.1, passed=False, std_err=0.01)
    McReport(empirical=0.102, analytic=0.1, passed=True, std_err=0.001)


# --- chernoff claim ---------------------------------------------------------


def test_chernoff_reproducible_bit_identical():
    cfg = McConfig(trials=50_000, seed=123, workers=3)
    a = mc_chernoff(0.5, 0.1, 100, cfg)
    b = mc_chernoff(0.5, 0.1, 100, cfg)
    assert a == b


def test_chernoff_within_analytic_budget():
    report = mc_chernoff(0.5, 0.1, 100, McConfig(trials=100_000, seed=7))
    assert report.analytic == pytest.approx(math.exp(-2 * 100 * 0.1**2))
    assert report.passed
    assert report.empirical <= report.analytic + 3 * report.std_err
    # the bound is not wildly loose at this point either
    assert report.empirical > 0


def test_chernoff_eps_zero_is_vacuous():
    report = mc_chernoff(0.3, 0.0, 50, McConfig(trials=2_000, seed=1))
    assert report.analytic == 1.0
    assert report.passed


def test_chernoff_extreme_tail_never_fires():
    # p - eps = 0.01: a mean of 1000 draws below 10 essentially never happens
    report = mc_chernoff(0.3, 0.29, 1000, McConfig(trials=20_000, seed=5))
    assert report.empirical == 0.0
    assert report.passed


def test_chernoff_worker_counts_agree_statistically():
    base = mc_chernoff(0.5, 0.05, 200, McConfig(trials=80_000, seed=11,
                                                workers=1))
    split = mc_chernoff(0.5, 0.05, 200, McConfig(trials=80_000, seed=11,
                                                 workers=4))
    spread = math.hypot(base.std_err, split.std_err)
    assert abs(base.empirical - split.empirical) <= 4 * max(spread, 1e-12)


@pytest.mark.parametrize("p, eps, n", [
    (-0.1, 0.1, 10), (1.1, 0.1, 10), (0.5, -0.1, 10), (0.5, 0.6, 10),
    (0.5, 0.1, 0),
])
def test_chernoff_domain_errors(p, eps, n):
    with pytest.raises((DomainError, ValueError)):
        mc_chernoff(p, eps, n, McConfig(trials=10))


# --- coverage claim ---------------------------------------------------------


def test_coverage_reproducible_and_sharded():
    errors = [0.2] * 16
    cfg = McConfig(trials=4_000, seed=77, workers=4)
    a = mc_theorem_coverage(8, 500, 100.0, 0.05, errors, cfg)
    b = mc_theorem_coverage(8, 500, 100.0, 0.05, errors, cfg)
    assert a == b
    assert a.analytic == 0.05
    assert a.passed


def test_coverage_no_classifiers():
    report = mc_theorem_coverage(4, 100, 16.0, 0.05, [],
                                 McConfig(trials=500, seed=3))
    assert report.empirical == 0.0
    assert report.passed


def test_coverage_single_cheap_classifier():
    report = mc_theorem_coverage(1, 2_000, 2.0, 0.05, [0.1],
                                 McConfig(trials=5_000, seed=13))
    assert report.passed
    # the union bound leaves slack: observed rate well under delta
    assert report.empirical <= report.analytic


def test_coverage_domain_errors():
    cfg = McConfig(trials=10)
    with pytest.raises((DomainError, ValueError)):
        mc_theorem_coverage(0, 100, 16.0, 0.05, [0.2], cfg)
    with pytest.raises((DomainError, ValueError)):
        mc_theorem_coverage(4, 0, 16.0, 0.05, [0.2], cfg)
    with pytest.raises((DomainError, ValueError)):
        mc_theorem_coverage(4, 100, 0.5, 0.05, [0.2], cfg)
    with pytest.raises((DomainError, ValueError)):
        mc_theorem_coverage(4, 100, 16.0, 0.0, [0.2], cfg)
    with pytest.raises((DomainError, ValueError)):
        mc_theorem_coverage(4, 100, 16.0, 0.05, [1.5], cfg)


# --- kl lattice -------------------------------------------------------------


def test_kl_scan_finds_no_violations():
    assert kl_scan(40, 25) == 0


def test_kl_scan_row_arithmetic():
    # spot-check the lattice the scan walks: at p = 0.5 the quadratic
    # relaxation is 2 eps^2 and the KL divergence must dominate it
    for j in range(8):
        eps = 0.5 * j / 8
        kl = kl_bernoulli(0.5, eps)
        assert kl >= 2 * eps * eps - 1e-15

    p = 0.25
    eps = p * 3 / 8
    assert kl_bernoulli(p, eps) >= eps**2 / (2 * p * (1 - p)) - 1e-15


def test_kl_scan_rejects_bad_grids():
    with pytest.raises((DomainError, ValueError)):
        kl_scan(0, 5)
    with pytest.raises((DomainError, ValueError)):
        kl_scan(5, 0)


# --- cross-checks against the analytic layer --------------------------------


def test_analytic_references_match_bounds_module():
    assert chernoff_lower_tail(0.5, 0.1, 100) == pytest.approx(
        math.exp(-2 * 100 * 0.01), rel=1e-12)
    report = mc_chernoff(0.2, 0.05, 400, McConfig(trials=1_000, seed=2))
    assert report.analytic == pytest.approx(
        chernoff_lower_tail(0.2, 0.05, 400), rel=0, abs=0)
