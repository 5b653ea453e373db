"""
反 Q 函数近似 - 闭式估计、二元熵、证书界反演与猜想扫描

记 p = 2πα²。三个闭式估计:
    low1 = √(-ln(-p·ln p))
    upp  = √(-ln(p·(1 - ln p)))
    low2 = √(-ln h(p))，h 为二元熵（自然对数）
全部在对数域计算，α 很小时 p 会下溢，但 ln p = ln 2π + 2 ln α 不会。
"""

import math
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from scipy import optimize

from config import BOUNDS_CONFIG, INVERSE_CONFIG, ORACLE_CONFIG
from .bounds import BoundId, get_spec, log_evaluate_bound
from .errors import AttainabilityError, DomainError
from .gauss_core import LOG_SQRT_2PI, TailProbability, check_alpha, inverse_q
from .thread_manager import get_thread_manager
from .utils import log_grid

logger = logging.getLogger(__name__)

LOG_2PI = math.log(2.0 * math.pi)

# p 低于此值时 h(p) 与 p(1 - ln p) 在双精度下已无法区分
_ENTROPY_DIRECT_MIN = 1e-280

ESTIMATE_NAMES = ("low1", "low2", "upp")


def binary_entropy(p: float) -> float:
    """
    二元熵 h(p) = -p·ln p - (1-p)·ln(1-p)，单位 nats

    第二项写成 -(1-p)·log1p(-p)，p 很小时不损失有效数字。
    """
    try:
        p = float(p)
    except (TypeError, ValueError):
        raise DomainError(f"p 必须是实数，收到 {p!r}")
    if not (0.0 <= p <= 1.0):
        raise DomainError(f"p 必须在 [0, 1] 之间，收到 {p}")
    if p == 0.0 or p == 1.0:
        return 0.0
    return -p * math.log(p) - (1.0 - p) * math.log1p(-p)


def _log_p(alpha: float) -> float:
    """ln(2πα²)"""
    return LOG_2PI + 2.0 * math.log(alpha)


def _sqrt_neg(log_inner: float, name: str, alpha: float) -> float:
    # 外层对数的自变量必须在 (0, 1)
    if not log_inner < 0.0:
        raise DomainError(f"{name}: alpha={alpha} 时内层自变量 {math.exp(log_inner):.6g} 不在 (0, 1) 内")
    return math.sqrt(-log_inner)


def estimate_low1(alpha: TailProbability) -> float:
    """Q⁻(α) 的闭式估计 √(-ln(-(2πα²)·ln(2πα²)))"""
    alpha = check_alpha(alpha)
    log_p = _log_p(alpha)
    if not log_p < 0.0:
        raise DomainError(f"low1: alpha={alpha} 时 2πα² >= 1，-p·ln p 不在 (0, 1) 内")
    return _sqrt_neg(log_p + math.log(-log_p), "low1", alpha)


def estimate_upp(alpha: TailProbability) -> float:
    """Q⁻(α) 的闭式估计 √(-ln(2πα²·(1 - ln(2πα²))))"""
    alpha = check_alpha(alpha)
    log_p = _log_p(alpha)
    if not log_p < 0.0:
        raise DomainError(f"upp: alpha={alpha} 时 2πα² >= 1")
    return _sqrt_neg(log_p + math.log1p(-log_p), "upp", alpha)


def estimate_low2(alpha: TailProbability) -> float:
    """Q⁻(α) 的熵估计 √(-ln h(2πα²))，要求 2πα² < 0.5"""
    alpha = check_alpha(alpha)
    log_p = _log_p(alpha)
    if not log_p < math.log(0.5):
        raise DomainError(f"low2: alpha={alpha} 时 2πα² >= 0.5")
    p = math.exp(log_p)
    if p >= _ENTROPY_DIRECT_MIN:
        log_h = math.log(binary_entropy(p))
    else:
        # h(p) = p(1 - ln p) - p²/2 + O(p³)
        log_h = log_p + math.log1p(-log_p)
    return _sqrt_neg(log_h, "low2", alpha)


_ESTIMATORS = {
    "low1": estimate_low1,
    "low2": estimate_low2,
    "upp": estimate_upp,
}


def invert_bound(bound_id, alpha: TailProbability) -> float:
    """
    数值反演已证明的界，得到 Q⁻(α) 的证书界

    求 x* 使 bound(x*) = √(2π)·α，x* 限定在界的有效区间且界严格递减的部分。
    由于界与 M 都递减: 上界反演得到 x* >= Q⁻(α)，下界反演得到 x* <= Q⁻(α)。

    Raises:
        AttainabilityError: 目标值不在界于有效区间上的取值范围内
    """
    spec = get_spec(bound_id)
    alpha = check_alpha(alpha)
    log_target = LOG_SQRT_2PI + math.log(alpha)

    lo = max(spec.proven_validity.lo, spec.decreasing_from, BOUNDS_CONFIG["min_abscissa"])
    hi = min(spec.proven_validity.hi, ORACLE_CONFIG["x_max"])

    def residual(x: float) -> float:
        return log_evaluate_bound(spec.id, x, force=True) - log_target

    f_lo, f_hi = residual(lo), residual(hi)
    if not (f_lo > 0.0 > f_hi):
        raise AttainabilityError(
            f"{spec.id.value} 在 [{lo:.6g}, {hi:.6g}] 上取不到 √(2π)·α（alpha={alpha}）"
        )

    root = optimize.brentq(residual, lo, hi,
                           xtol=INVERSE_CONFIG["invert_xtol"], rtol=INVERSE_CONFIG["invert_rtol"])
    logger.debug(f"invert_bound {spec.id.value} alpha={alpha} -> {root!r} ({spec.side.value})")
    return root


@dataclass
class InverseRow:
    """单个 α 处的精确反 Q 值、三个闭式估计与证书界"""
    alpha: float
    reference: float
    est_low1: float
    est_low2: float
    est_upp: float
    cert_lower: Optional[float]
    cert_upper: Optional[float]


def _certified(bound_id: BoundId, alpha: float) -> Optional[float]:
    try:
        return invert_bound(bound_id, alpha)
    except AttainabilityError as e:
        logger.debug(f"证书界不可达: {e}")
        return None


def inverse_row(alpha: TailProbability) -> InverseRow:
    """组装一行反 Q 对比数据"""
    alpha = check_alpha(alpha)
    return InverseRow(
        alpha=alpha,
        reference=inverse_q(alpha),
        est_low1=estimate_low1(alpha),
        est_low2=estimate_low2(alpha),
        est_upp=estimate_upp(alpha),
        cert_lower=_certified(BoundId.THM3_LOWER, alpha),
        cert_upper=_certified(BoundId.THM3_UPPER, alpha),
    )


@dataclass
class InequalityResult:
    """猜想中单个不等式的扫描结果"""
    name: str
    relation: str
    holds_at: int = 0
    violations: List[Tuple[float, float, float]] = field(default_factory=list)
    non_evaluable: List[Tuple[float, str]] = field(default_factory=list)
    empirical_range: Optional[Tuple[float, float]] = None


@dataclass
class ConjectureReport:
    """猜想扫描报告；只记录经验结果，不做断言"""
    grid: Dict[str, Any]
    results: List[InequalityResult]

    def result(self, name: str) -> InequalityResult:
        for item in self.results:
            if item.name == name:
                return item
        raise KeyError(name)


# 猜想断言的方向: low1/low2 < Q⁻(α) < upp
_RELATIONS = {"low1": "estimate < reference", "low2": "estimate < reference",
              "upp": "estimate > reference"}


def _scan_point(alpha: float) -> Dict[str, Any]:
    try:
        reference = inverse_q(alpha)
    except DomainError as e:
        # 精确值不可求时三个不等式都无法判定
        return {"alpha": alpha, "reference": None, **{name: e for name in _ESTIMATORS}}

    point: Dict[str, Any] = {"alpha": alpha, "reference": reference}
    for name, estimator in _ESTIMATORS.items():
        try:
            point[name] = estimator(alpha)
        except DomainError as e:
            point[name] = e
    return point


def _longest_run(alphas: List[float], flags: List[bool]) -> Optional[Tuple[float, float]]:
    """成立点的最长连续段，返回其 α 端点（小 α 在前）"""
    best: Optional[Tuple[int, int]] = None
    start = None
    for i, ok in enumerate(flags + [False]):
        if ok and start is None:
            start = i
        elif not ok and start is not None:
            if best is None or (i - start) > (best[1] - best[0] + 1):
                best = (start, i - 1)
            start = None
    if best is None:
        return None
    return alphas[best[0]], alphas[best[1]]


def conjecture_scan(alpha_min: TailProbability, alpha_max: TailProbability,
                    points_per_decade: int) -> ConjectureReport:
    """
    在对数网格上扫描猜想中的三个不等式

    每个网格点计算精确 Q⁻(α) 与三个估计，记录成立次数、违反点与最长成立区间。
    不可求值的点记为 non_evaluable，不计入违反。
    """
    alpha_min = check_alpha(alpha_min, "alpha_min")
    alpha_max = check_alpha(alpha_max, "alpha_max")
    if not alpha_min < alpha_max:
        raise DomainError(f"要求 alpha_min < alpha_max，收到 {alpha_min}, {alpha_max}")
    if alpha_max > INVERSE_CONFIG["alpha_max"]:
        raise DomainError(f"alpha_max 不能超过 {INVERSE_CONFIG['alpha_max']}，收到 {alpha_max}")
    if int(points_per_decade) != points_per_decade or points_per_decade < 1:
        raise DomainError(f"points_per_decade 必须是正整数，收到 {points_per_decade}")

    alphas = [float(a) for a in log_grid(alpha_min, alpha_max, int(points_per_decade))]
    points = get_thread_manager().map_ordered("conjecture_scan", _scan_point, alphas)
    points.sort(key=lambda item: item["alpha"])
    alphas = [item["alpha"] for item in points]

    results = []
    for name in ESTIMATE_NAMES:
        result = InequalityResult(name=name, relation=_RELATIONS[name])
        flags = []
        for point in points:
            estimate = point[name]
            if isinstance(estimate, Exception):
                result.non_evaluable.append((point["alpha"], str(estimate)))
                flags.append(False)
                continue
            if name == "upp":
                holds = estimate > point["reference"]
            else:
                holds = estimate < point["reference"]
            flags.append(holds)
            if holds:
                result.holds_at += 1
            else:
                result.violations.append((point["alpha"], estimate, point["reference"]))
        result.empirical_range = _longest_run(alphas, flags)
        results.append(result)
        logger.info(f"猜想 {name}: 成立 {result.holds_at}/{len(points)}，违反 {len(result.violations)}")

    grid = {
        "alpha_min": alpha_min,
        "alpha_max": alpha_max,
        "points_per_decade": int(points_per_decade),
        "size": len(points),
    }
    return ConjectureReport(grid=grid, results=results)


def relative_error(name: str, alpha: TailProbability, reference: Optional[float] = None) -> float:
    """估计相对精确值的相对误差 |est - Q⁻(α)| / Q⁻(α)"""
    if reference is None:
        reference = inverse_q(alpha)
    return abs(_ESTIMATORS[name](alpha) - reference) / reference
