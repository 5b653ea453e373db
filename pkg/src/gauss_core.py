"""
高斯尾积分核心模块 - Mill 比、尾积分、Q 函数与精确反 Q 函数的参考求值

所有大 x 的计算都经由 Mill 比 R(x) = e^(x²/2)·M(x) 在对数域完成，
e^(-x²/2) 在 x ≈ 38 处就会下溢为 0。
"""

import math
import logging
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

from scipy import integrate

from config import ORACLE_CONFIG
from .errors import DomainError

logger = logging.getLogger(__name__)

SQRT_2PI = math.sqrt(2.0 * math.pi)
LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
# M(0) = √(2π)/2
HALF_SQRT_2PI = 0.5 * SQRT_2PI

METHODS = ("quadrature", "continued_fraction")

# 类型别名: 横坐标 x >= 0，尾概率 α ∈ (0, 0.5]
Abscissa = float
TailProbability = float


@dataclass(frozen=True)
class TailValue:
    """尾积分值，同时保存线性值与自然对数值"""
    linear: float
    log_value: float
    normalized: bool = False  # True 表示 Q(x)，False 表示 M(x)


def check_abscissa(x: float, name: str = "x", positive: bool = False,
                   upper: Optional[float] = None) -> float:
    """校验横坐标，返回 float；越界抛出 DomainError"""
    try:
        value = float(x)
    except (TypeError, ValueError):
        raise DomainError(f"{name} 必须是实数，收到 {x!r}")

    if not math.isfinite(value):
        raise DomainError(f"{name} 必须是有限数，收到 {value}")

    if positive and value <= 0.0:
        raise DomainError(f"{name} 必须大于 0，收到 {value}")

    if value < 0.0:
        raise DomainError(f"{name} 不能为负，收到 {value}")

    limit = ORACLE_CONFIG["x_max"] if upper is None else upper
    if value > limit:
        raise DomainError(f"{name} 超出支持范围 [0, {limit}]，收到 {value}")

    return value


def check_alpha(alpha: float, name: str = "alpha") -> float:
    """校验尾概率 α ∈ (0, 0.5]"""
    try:
        value = float(alpha)
    except (TypeError, ValueError):
        raise DomainError(f"{name} 必须是实数，收到 {alpha!r}")

    if not math.isfinite(value) or not (0.0 < value <= 0.5):
        raise DomainError(f"{name} 必须在 (0, 0.5] 之间，收到 {value}")

    return value


def scaled_tail_quad(weight: Callable[[float], float], x: float) -> float:
    """
    自适应求积 e^(x²/2)·∫ₓ^∞ w(u)·e^(-u²/2) du

    代换 u = x + t 后被积函数为 w(x+t)·e^(-xt - t²/2)，不会下溢；
    积分上限截断在指数低于 -log_cutoff 的位置。
    """
    cutoff = ORACLE_CONFIG["log_cutoff"]
    # xt + t²/2 = cutoff 的正根，写成有理化形式避免相消
    upper = 2.0 * cutoff / (x + math.sqrt(x * x + 2.0 * cutoff))
    # 被积函数的衰减尺度约为 1/(1+x)
    split = 10.0 / (1.0 + x)

    def integrand(t: float) -> float:
        return weight(x + t) * math.exp(-x * t - 0.5 * t * t)

    result = integrate.quad(
        integrand,
        0.0,
        upper,
        epsabs=0.0,
        epsrel=ORACLE_CONFIG["quad_epsrel"],
        limit=ORACLE_CONFIG["quad_limit"],
        points=(split,),
        full_output=1,
    )
    value, abserr = result[0], result[1]
    if len(result) > 3:
        # full_output 模式下 QUADPACK 的告警以消息返回
        logger.debug(f"quad 告警 x={x}: {result[3]}")
    logger.debug(f"quad x={x} value={value!r} abserr={abserr:.3e}")
    return value


def _mills_ratio_quadrature(x: float) -> float:
    return scaled_tail_quad(lambda u: 1.0, x)


def _mills_ratio_series(x: float) -> float:
    """小 x: R(x) = e^(x²/2)·√(π/2) - Σ x^(2n+1)/(2n+1)!!，级数各项为正"""
    x2 = x * x
    term = x
    total = 0.0
    eps = ORACLE_CONFIG["cf_eps"]
    for n in range(1, ORACLE_CONFIG["cf_max_iter"] + 1):
        total += term
        if term <= eps * total:
            break
        term *= x2 / (2 * n + 1)
    else:
        raise RuntimeError(f"Mill 比级数在 x={x} 未收敛")
    return math.exp(0.5 * x2) * HALF_SQRT_2PI - total


def _mills_ratio_lentz(x: float) -> float:
    """大 x: R(x) = 1/(x + 1/(x + 2/(x + 3/(x + ...))))，修正 Lentz 算法"""
    tiny = 1e-300
    eps = ORACLE_CONFIG["cf_eps"]
    f = tiny
    c = f
    d = 0.0
    for n in range(1, ORACLE_CONFIG["cf_max_iter"] + 1):
        a = 1.0 if n == 1 else float(n - 1)
        d = x + a * d
        if d == 0.0:
            d = tiny
        c = x + a / c
        if c == 0.0:
            c = tiny
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) <= eps:
            logger.debug(f"连分式 x={x} 迭代 {n} 次收敛")
            return f
    raise RuntimeError(f"Mill 比连分式在 x={x} 未收敛")


def _mills_ratio_continued_fraction(x: float) -> float:
    if x < ORACLE_CONFIG["cf_switch"]:
        return _mills_ratio_series(x)
    return _mills_ratio_lentz(x)


_EVALUATORS = {
    "quadrature": _mills_ratio_quadrature,
    "continued_fraction": _mills_ratio_continued_fraction,
}


def mills_ratio(x: Abscissa, method: Optional[str] = None) -> float:
    """
    Mill 比 R(x) = e^(x²/2)·∫ₓ^∞ e^(-u²/2) du

    Args:
        x: 横坐标，0 <= x <= 40
        method: 'quadrature'（默认，见 ORACLE_CONFIG）或 'continued_fraction'

    Returns:
        R(x)，严格为正且关于 x 严格递减
    """
    x = check_abscissa(x)
    method = method or ORACLE_CONFIG["method"]
    if method not in _EVALUATORS:
        raise ValueError(f"未知求值方法: {method}，可选 {', '.join(METHODS)}")
    return _EVALUATORS[method](x)


def oracle_agreement(x: Abscissa) -> float:
    """两种独立求值方法的相对差 |R_quad - R_cf| / R_cf"""
    quad_value = mills_ratio(x, method="quadrature")
    cf_value = mills_ratio(x, method="continued_fraction")
    return abs(quad_value - cf_value) / cf_value


def log_tail_integral(x: Abscissa, method: Optional[str] = None) -> float:
    """log M(x) = log R(x) - x²/2"""
    x = check_abscissa(x)
    return math.log(mills_ratio(x, method)) - 0.5 * x * x


def tail_integral(x: Abscissa, normalized: bool = False,
                  method: Optional[str] = None) -> TailValue:
    """尾积分 M(x)；normalized=True 时返回 Q(x) = M(x)/√(2π)"""
    log_value = log_tail_integral(x, method)
    if normalized:
        log_value -= LOG_SQRT_2PI
    # 超过 x ≈ 38.6 线性值下溢为 0，对数值仍然有限
    return TailValue(linear=math.exp(log_value), log_value=log_value, normalized=normalized)


def log_q_value(x: Abscissa, method: Optional[str] = None) -> float:
    """log Q(x)"""
    return log_tail_integral(x, method) - LOG_SQRT_2PI


def q_value(x: Abscissa, method: Optional[str] = None) -> TailProbability:
    """Q(x) = M(x)/√(2π)，标准正态变量超过 x 的概率"""
    return math.exp(log_q_value(x, method))


def _inverse_residual(x: float, log_alpha: float, method: Optional[str]) -> Tuple[float, float]:
    """返回 (log Q(x) - log α, R(x))；残差关于 x 递减"""
    ratio = mills_ratio(x, method)
    return math.log(ratio) - 0.5 * x * x - LOG_SQRT_2PI - log_alpha, ratio


def inverse_q(alpha: TailProbability, method: Optional[str] = None) -> Abscissa:
    """
    精确反 Q 函数: 求 x 使 Q(x) = α

    以渐近式 x ≈ √(-ln(2πα²)) 为初值，倍增得到保证包含根的区间，
    再用安全牛顿法（牛顿步越界或收缩过慢时改为二分）细化。
    d/dx log Q(x) = -1/R(x)，因此牛顿步为 x + f·R(x)。
    """
    alpha = check_alpha(alpha)
    if alpha < ORACLE_CONFIG["alpha_floor"]:
        raise DomainError(f"alpha 不能小于 {ORACLE_CONFIG['alpha_floor']}，收到 {alpha}")

    if alpha == 0.5:
        return 0.0

    x_max = ORACLE_CONFIG["x_max"]
    rtol = ORACLE_CONFIG["inverse_rtol"]
    log_alpha = math.log(alpha)

    seed = math.sqrt(max(-(math.log(2.0 * math.pi) + 2.0 * log_alpha), 0.0))

    # 倍增扩展区间: f(lo) > 0 > f(hi)
    lo, hi = 0.0, min(max(seed, 1.0), x_max)
    f_hi, _ = _inverse_residual(hi, log_alpha, method)
    while f_hi > 0.0:
        if hi >= x_max:
            raise DomainError(f"alpha={alpha} 对应的 x 超出 [0, {x_max}]")
        lo, hi = hi, min(2.0 * hi, x_max)
        f_hi, _ = _inverse_residual(hi, log_alpha, method)
    if f_hi == 0.0:
        return hi

    x = seed if lo < seed < hi else 0.5 * (lo + hi)
    f, ratio = _inverse_residual(x, log_alpha, method)
    dx_old = hi - lo
    dx = dx_old

    for iteration in range(1, ORACLE_CONFIG["inverse_max_iter"] + 1):
        if f == 0.0:
            return x
        if f > 0.0:
            lo = x
        else:
            hi = x

        newton = x + f * ratio
        if not (lo < newton < hi) or abs(2.0 * f * ratio) > abs(dx_old):
            # 二分
            dx_old = dx
            dx = 0.5 * (hi - lo)
            x = lo + dx
        else:
            dx_old = dx
            dx = f * ratio
            x = newton

        if abs(dx) <= rtol * max(x, 1e-15):
            logger.debug(f"inverse_q alpha={alpha} 迭代 {iteration} 次收敛, x={x!r}")
            return x

        f, ratio = _inverse_residual(x, log_alpha, method)

    raise RuntimeError(f"inverse_q 在 alpha={alpha} 未在 {ORACLE_CONFIG['inverse_max_iter']} 次内收敛")
