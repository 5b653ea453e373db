"""
界目录测试: 求值、有效区间、夹逼、排序、交叉点与积分恒等式
"""

import math

import numpy as np
import pytest

from src.bounds import (
    BOUND_FAMILIES,
    CROSSOVER,
    SQRT2,
    BoundId,
    Side,
    ValidityInterval,
    asymptotic_ratio,
    bound_catalog,
    bound_margin,
    compare_at,
    crossover_constant,
    empirical_crossover,
    evaluate_bound,
    get_spec,
    identity_residual,
    integrand_factor,
    limiting_ratio,
    log_evaluate_bound,
    resolve_bound_selection,
)
from src.errors import BracketError, DomainError, ValidityError
from src.gauss_core import tail_integral

_LOG_PART = np.minimum(np.logspace(-3, math.log10(40.0), 150), 40.0)
GRID = [float(x) for x in np.unique(np.concatenate([_LOG_PART,
                                                     np.linspace(0.5, 40.0, 150)]))]


def test_catalog_order_and_size():
    ids = [spec.id for spec in bound_catalog()]
    assert ids == list(BoundId)
    assert len(ids) == 8


def test_crossover_constant():
    u = crossover_constant()
    assert u == pytest.approx(0.786151, abs=1e-6)
    assert u ** 4 + u ** 2 - 1.0 == pytest.approx(0.0, abs=1e-15)
    assert CROSSOVER == u


def test_validity_intervals():
    assert get_spec("thm3_lower").proven_validity.lo == SQRT2
    assert get_spec("thm3_upper").proven_validity.lo == CROSSOVER
    assert get_spec(BoundId.GORDON_LOWER).proven_validity.contains(1e-9)
    interval = ValidityInterval(1.0, 2.0, lo_open=False)
    assert interval.contains(1.0) and not interval.contains(2.0)
    assert interval.describe() == "[1.0, 2.0)"
    with pytest.raises(ValueError):
        ValidityInterval(2.0, 1.0)


@pytest.mark.parametrize("bound_id, expected", [
    ("gordon_lower", 0.0541341),
    ("gordon_upper", 0.0676676),
    ("bs_lower", 0.0560577),
    ("bs_upper", 0.0571994),
    ("thm3_lower", 0.0563897),
    ("thm3_upper", 0.0605238),
])
def test_spot_values_at_two(bound_id, expected):
    assert evaluate_bound(bound_id, 2.0) == pytest.approx(expected, rel=2e-6)


def test_corollary_bounds_piecewise():
    assert evaluate_bound("corollary_lower", 1.0) == evaluate_bound("bs_lower", 1.0)
    # 拼接点归左支
    assert evaluate_bound("corollary_lower", SQRT2) == evaluate_bound("bs_lower", SQRT2)
    assert evaluate_bound("corollary_lower", 3.0) == evaluate_bound("thm3_lower", 3.0)
    for x in (0.1, 1.0, 5.0):
        assert evaluate_bound("corollary_upper", x) == evaluate_bound("bs_upper", x)


def test_strict_evaluation_outside_validity():
    with pytest.raises(ValidityError, match="force=True"):
        evaluate_bound("thm3_lower", 1.0)
    with pytest.raises(ValidityError):
        evaluate_bound("thm3_upper", 0.5)
    # force 时照常求值
    assert evaluate_bound("thm3_lower", 1.0, force=True) == pytest.approx(
        2.0 / 3.0 * math.exp(-0.5), rel=1e-14)


@pytest.mark.parametrize("x", [0.0, -1.0, 41.0])
def test_bound_domain_errors(x):
    with pytest.raises(DomainError):
        log_evaluate_bound("gordon_upper", x)


def test_log_domain_values_beyond_underflow():
    assert evaluate_bound("thm3_upper", 39.5) == 0.0
    log_value = log_evaluate_bound("thm3_upper", 39.5)
    assert log_value == pytest.approx(-0.5 * math.log1p(39.5 ** 2) - 0.5 * 39.5 ** 2)


@pytest.mark.parametrize("family", ["gordon", "bs", "corollary"])
def test_sandwich_holds_everywhere(family):
    for x in GRID:
        row = compare_at(x, BOUND_FAMILIES[family])
        assert row.ordering_ok, (x, row.violations)


def test_thm3_sandwich_on_validity_region():
    for x in GRID:
        row = compare_at(x, BOUND_FAMILIES["thm3"])
        assert row.ordering_ok, (x, row.violations)
        if x >= SQRT2 + 1e-12:
            assert row.in_validity[BoundId.THM3_LOWER]


def test_compare_at_relative_errors_signs():
    row = compare_at(2.0)
    assert row.reference == pytest.approx(tail_integral(2.0).linear)
    for bound_id, error in row.relative_errors.items():
        if get_spec(bound_id).side is Side.LOWER:
            assert error < 0
        else:
            assert error > 0


def test_compare_at_reports_violation_only_inside_validity():
    # 1.0 < √2: 新下界高于参考值，但不在有效区间内
    row = compare_at(1.0, [BoundId.THM3_LOWER])
    assert row.bound_values[BoundId.THM3_LOWER] > row.reference
    assert not row.in_validity[BoundId.THM3_LOWER]
    assert row.ordering_ok


def test_orderings():
    for x in GRID:
        logs = compare_at(x).bound_log_values
        assert logs[BoundId.THM3_LOWER] > logs[BoundId.GORDON_LOWER]
        assert logs[BoundId.THM3_UPPER] < logs[BoundId.GORDON_UPPER]
        if x > SQRT2:
            assert logs[BoundId.THM3_LOWER] > logs[BoundId.BS_LOWER]
        if x > CROSSOVER:
            assert logs[BoundId.BS_UPPER] < logs[BoundId.THM3_UPPER]


def test_empirical_crossovers():
    upper_onset = empirical_crossover("thm3_upper", 0.1, CROSSOVER)
    lower_onset = empirical_crossover("thm3_lower", 1.0, SQRT2)
    assert 0.42 < upper_onset < 0.44
    assert 1.16 < lower_onset < 1.17
    assert lower_onset == pytest.approx(1.161528, abs=1e-4)
    assert bound_margin("thm3_upper", upper_onset + 1e-3) > 0
    assert bound_margin("thm3_lower", lower_onset - 1e-3) < 0


def test_crossover_without_sign_change():
    with pytest.raises(BracketError, match="没有交叉点"):
        empirical_crossover("gordon_upper", 0.5, 3.0)
    with pytest.raises(DomainError):
        empirical_crossover("thm3_upper", 0.8, 0.5)


@pytest.mark.parametrize("x", [0.0, 0.5, 1.0, 2.0, 4.0, 8.0])
def test_identity_residual(x):
    assert abs(identity_residual(x)) <= 1e-10


def test_integrand_factor_threshold():
    assert integrand_factor(CROSSOVER) == pytest.approx(1.0, abs=1e-14)
    assert integrand_factor(0.5) < 1.0 < integrand_factor(1.0)


def test_asymptotic_ratio():
    assert abs(asymptotic_ratio(10.0) - 1.0) <= 0.006
    assert abs(asymptotic_ratio(30.0) - 1.0) <= 7e-4
    ratios = [asymptotic_ratio(x) for x in (2.0, 4.0, 8.0, 16.0, 32.0)]
    assert all(r < 1.0 for r in ratios)
    assert ratios == sorted(ratios)


def test_limiting_ratio():
    assert limiting_ratio(40.0) == pytest.approx(1.0, abs=1e-3)
    assert limiting_ratio(2.0) < limiting_ratio(10.0) < 1.0


def test_resolve_bound_selection():
    assert resolve_bound_selection(["thm3", "gordon"]) == [
        BoundId.GORDON_LOWER, BoundId.GORDON_UPPER, BoundId.THM3_LOWER, BoundId.THM3_UPPER]
    assert resolve_bound_selection([" BS_upper ", "bs"]) == [BoundId.BS_LOWER, BoundId.BS_UPPER]
    assert len(resolve_bound_selection(["all"])) == 8
    with pytest.raises(ValueError, match="至少需要"):
        resolve_bound_selection([])
    with pytest.raises(ValueError, match="未知的界"):
        resolve_bound_selection(["chernoff"])
