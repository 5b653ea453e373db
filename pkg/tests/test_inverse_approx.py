"""
反 Q 近似测试: 二元熵、闭式估计、证书界反演与猜想扫描
"""

import math

import pytest

from src.bounds import BoundId
from src.errors import AttainabilityError, DomainError
from src.gauss_core import inverse_q
from src.inverse_approx import (
    binary_entropy,
    conjecture_scan,
    estimate_low1,
    estimate_low2,
    estimate_upp,
    invert_bound,
    inverse_row,
    relative_error,
)


def test_binary_entropy_values():
    assert binary_entropy(0.5) == pytest.approx(math.log(2.0), rel=1e-15)
    assert binary_entropy(0.0) == 0.0
    assert binary_entropy(1.0) == 0.0
    assert binary_entropy(0.2) == pytest.approx(binary_entropy(0.8), rel=1e-14)


def test_binary_entropy_small_argument():
    p = 1e-12
    expected = p * (1.0 - math.log(p)) - 0.5 * p * p
    assert binary_entropy(p) == pytest.approx(expected, rel=1e-14)
    assert binary_entropy(p) < p * (1.0 - math.log(p))


@pytest.mark.parametrize("p", [0.01, 0.1, 0.3])
def test_binary_entropy_symmetry(p):
    assert abs(binary_entropy(p) - binary_entropy(1.0 - p)) <= 1e-14


# 更小的 p 时 p³ 低于 h(p) 的舍入误差
@pytest.mark.parametrize("p", [1e-3, 3e-4, 1e-4, 1e-5, 1e-6])
def test_binary_entropy_small_p_expansion(p):
    expansion = -p * math.log(p) + p - 0.5 * p * p
    assert abs(binary_entropy(p) - expansion) <= p ** 3


@pytest.mark.parametrize("bad", [-1e-3, 1.5, float("nan"), "p"])
def test_binary_entropy_domain(bad):
    with pytest.raises(DomainError):
        binary_entropy(bad)


def test_estimates_at_one_in_a_thousand():
    assert estimate_low1(1e-3) == pytest.approx(3.08130, abs=1e-4)
    assert estimate_upp(1e-3) == pytest.approx(3.06828, abs=1e-4)
    assert estimate_low2(1e-3) == pytest.approx(3.06829, abs=1e-4)
    assert inverse_q(1e-3) == pytest.approx(3.0902323, abs=1e-6)


def test_low2_exceeds_upp_where_resolvable():
    for alpha in (1e-2, 1e-3, 1e-4, 1e-5):
        assert estimate_low2(alpha) > estimate_upp(alpha)


def test_estimates_tiny_alpha_stay_finite():
    # 2πα² 下溢为 0，对数域仍可计算
    for estimator in (estimate_low1, estimate_low2, estimate_upp):
        value = estimator(1e-200)
        assert math.isfinite(value)
        assert value == pytest.approx(inverse_q(1e-200), rel=5e-3)


@pytest.mark.parametrize("name", ["low1", "low2", "upp"])
def test_relative_error_decreases(name):
    alphas = [1e-2, 1e-4, 1e-6, 1e-8, 1e-10]
    errors = [relative_error(name, a) for a in alphas]
    assert all(b < a for a, b in zip(errors, errors[1:]))
    assert relative_error(name, 1e-6) <= 2e-3


def test_estimate_domain_guards():
    with pytest.raises(DomainError, match="2πα²"):
        estimate_low1(0.45)
    with pytest.raises(DomainError):
        estimate_upp(0.45)
    with pytest.raises(DomainError, match="0.5"):
        estimate_low2(0.3)
    with pytest.raises(DomainError):
        estimate_low1(0.0)


def test_certified_pair_at_one_in_a_thousand():
    lower = invert_bound(BoundId.THM3_LOWER, 1e-3)
    upper = invert_bound(BoundId.THM3_UPPER, 1e-3)
    assert 3.088 < lower < 3.0902
    assert 3.100 < upper < 3.102
    assert lower <= inverse_q(1e-3) <= upper


@pytest.mark.parametrize("alpha", [1e-12, 1e-9, 1e-6, 1e-4, 1e-2])
def test_certified_sandwich(alpha):
    reference = inverse_q(alpha)
    assert invert_bound("thm3_lower", alpha) <= reference <= invert_bound("thm3_upper", alpha)
    assert invert_bound("gordon_lower", alpha) <= reference <= invert_bound("gordon_upper", alpha)


@pytest.mark.parametrize("alpha", [1e-3, 1e-5, 1e-7, 1e-9, 1e-12])
def test_certified_lower_beats_low1(alpha):
    assert invert_bound(BoundId.THM3_LOWER, alpha) >= estimate_low1(alpha)


def test_invert_bound_unattainable():
    # 新下界在 √2 处的值低于 √(2π)·0.1
    with pytest.raises(AttainabilityError, match="取不到"):
        invert_bound(BoundId.THM3_LOWER, 0.1)


def test_inverse_row():
    row = inverse_row(1e-3)
    assert row.alpha == 1e-3
    assert row.reference == pytest.approx(3.0902323, abs=1e-6)
    assert row.cert_lower < row.reference < row.cert_upper
    assert inverse_row(0.1).cert_lower is None
    assert inverse_row(0.1).cert_upper is not None


def test_conjecture_scan_default_grid():
    report = conjecture_scan(1e-12, 1e-2, 10)
    assert report.grid["size"] == 101
    assert [r.name for r in report.results] == ["low1", "low2", "upp"]

    for name in ("low1", "low2"):
        result = report.result(name)
        assert result.violations == []
        assert result.holds_at == 101
        assert result.empirical_range == pytest.approx((1e-12, 1e-2))

    upp = report.result("upp")
    assert upp.violations
    alpha, estimate, reference = upp.violations[0]
    assert estimate < reference
    assert upp.holds_at + len(upp.violations) == 101


def test_conjecture_scan_two_point_grid():
    report = conjecture_scan(1e-4, 1e-3, 1)
    assert report.grid == {"alpha_min": 1e-4, "alpha_max": 1e-3,
                           "points_per_decade": 1, "size": 2}
    for result in report.results:
        assert result.holds_at + len(result.violations) + len(result.non_evaluable) == 2


def test_conjecture_scan_below_inverse_floor():
    # 整个网格低于精确反 Q 的下限：逐点记为不可求值，扫描本身不中断
    report = conjecture_scan(1e-305, 1e-301, 1)
    assert report.grid["size"] == 5
    for result in report.results:
        assert len(result.non_evaluable) == 5
        assert all("alpha 不能小于" in reason for _, reason in result.non_evaluable)
        assert result.holds_at == 0 and result.violations == []
        assert result.empirical_range is None


def test_conjecture_scan_validation():
    with pytest.raises(DomainError):
        conjecture_scan(1e-3, 1e-4, 10)
    with pytest.raises(DomainError, match="alpha_max"):
        conjecture_scan(1e-4, 0.2, 10)
    with pytest.raises(DomainError, match="points_per_decade"):
        conjecture_scan(1e-4, 1e-3, 0)
    with pytest.raises(KeyError):
        conjecture_scan(1e-4, 1e-3, 1).result("low3")
