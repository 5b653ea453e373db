"""
尾积分界目录 - Gordon、Birnbaum–Sampford、新 Mill 比不等式及其拼接界的
求值、比较、积分恒等式自检与经验交叉点搜索

所有界的形式都是 prefactor(x)·e^(-x²/2)。内部一律保存 log prefactor，
x 较大时在对数域比较，避免 e^(-x²/2) 下溢。
"""

import math
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, Iterable, List, Optional

from scipy import optimize

from config import BOUNDS_CONFIG
from .errors import BracketError, DomainError, ValidityError
from .gauss_core import (
    Abscissa,
    check_abscissa,
    log_tail_integral,
    mills_ratio,
    scaled_tail_quad,
)

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)


def crossover_constant() -> float:
    """u⁴ + u² - 1 = 0 的正根 √((√5-1)/2) ≈ 0.786151"""
    return math.sqrt(0.5 * (math.sqrt(5.0) - 1.0))


CROSSOVER = crossover_constant()


class BoundId(str, Enum):
    """界标识"""
    GORDON_LOWER = "gordon_lower"
    GORDON_UPPER = "gordon_upper"
    BS_LOWER = "bs_lower"
    BS_UPPER = "bs_upper"
    THM3_LOWER = "thm3_lower"
    THM3_UPPER = "thm3_upper"
    COROLLARY_LOWER = "corollary_lower"
    COROLLARY_UPPER = "corollary_upper"  # 与 bs_upper 相同


class Side(str, Enum):
    """界的方向"""
    LOWER = "lower"
    UPPER = "upper"


@dataclass(frozen=True)
class ValidityInterval:
    """已证明的有效区间"""
    lo: float
    hi: float = math.inf
    lo_open: bool = True
    hi_open: bool = True

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"有效区间要求 lo < hi，收到 lo={self.lo}, hi={self.hi}")

    def contains(self, x: float) -> bool:
        """判断 x 是否在区间内"""
        above = x > self.lo if self.lo_open else x >= self.lo
        below = x < self.hi if self.hi_open else x <= self.hi
        return above and below

    def describe(self) -> str:
        left = "(" if self.lo_open else "["
        right = ")" if self.hi_open else "]"
        return f"{left}{self.lo!r}, {self.hi!r}{right}"


@dataclass(frozen=True)
class BoundSpec:
    """单个界的元数据"""
    id: BoundId
    side: Side
    proven_validity: ValidityInterval
    source: str
    formula: str
    # 从此点起界关于 x 严格递减（反演界时的搜索起点）
    decreasing_from: float = 0.0


# x·e^(-x²/2)/(1+x²) 在 x² = √2 - 1 处取最大值
_GORDON_LOWER_PEAK = math.sqrt(SQRT2 - 1.0)

_ALL_POSITIVE = ValidityInterval(0.0)

_CATALOG = (
    BoundSpec(BoundId.GORDON_LOWER, Side.LOWER, _ALL_POSITIVE, "Gordon (1941)",
              "x/(1+x^2) * exp(-x^2/2)", decreasing_from=_GORDON_LOWER_PEAK),
    BoundSpec(BoundId.GORDON_UPPER, Side.UPPER, _ALL_POSITIVE, "Gordon (1941)",
              "1/x * exp(-x^2/2)"),
    BoundSpec(BoundId.BS_LOWER, Side.LOWER, _ALL_POSITIVE, "Birnbaum (1942)",
              "2/(sqrt(x^2+4)+x) * exp(-x^2/2)"),
    BoundSpec(BoundId.BS_UPPER, Side.UPPER, _ALL_POSITIVE, "Sampford (1953)",
              "4/(sqrt(x^2+8)+3x) * exp(-x^2/2)"),
    BoundSpec(BoundId.THM3_LOWER, Side.LOWER, ValidityInterval(SQRT2), "Mill 比新下界, x > √2",
              "(1+x^2)/(x(2+x^2)) * exp(-x^2/2)", decreasing_from=SQRT2),
    BoundSpec(BoundId.THM3_UPPER, Side.UPPER, ValidityInterval(CROSSOVER), "Mill 比新上界, x > 0.786",
              "1/sqrt(1+x^2) * exp(-x^2/2)", decreasing_from=CROSSOVER),
    BoundSpec(BoundId.COROLLARY_LOWER, Side.LOWER, _ALL_POSITIVE, "拼接下界 (BS | 新下界)",
              "bs_lower if 0<x<=sqrt(2) else thm3_lower"),
    BoundSpec(BoundId.COROLLARY_UPPER, Side.UPPER, _ALL_POSITIVE, "拼接上界 (= bs_upper)",
              "4/(sqrt(x^2+8)+3x) * exp(-x^2/2)"),
)

_SPECS: Dict[BoundId, BoundSpec] = {spec.id: spec for spec in _CATALOG}

# log prefactor(x)，运行时查表（测试通过替换表项注入错误公式）
_LOG_PREFACTORS: Dict[BoundId, Callable[[float], float]] = {
    BoundId.GORDON_LOWER: lambda x: math.log(x) - math.log1p(x * x),
    BoundId.GORDON_UPPER: lambda x: -math.log(x),
    BoundId.BS_LOWER: lambda x: math.log(2.0) - math.log(math.sqrt(x * x + 4.0) + x),
    BoundId.BS_UPPER: lambda x: math.log(4.0) - math.log(math.sqrt(x * x + 8.0) + 3.0 * x),
    BoundId.THM3_LOWER: lambda x: math.log1p(x * x) - math.log(x) - math.log(2.0 + x * x),
    BoundId.THM3_UPPER: lambda x: -0.5 * math.log1p(x * x),
    # 拼接点 √2 归左支
    BoundId.COROLLARY_LOWER: lambda x: (
        _LOG_PREFACTORS[BoundId.BS_LOWER](x) if x <= SQRT2
        else _LOG_PREFACTORS[BoundId.THM3_LOWER](x)
    ),
    BoundId.COROLLARY_UPPER: lambda x: _LOG_PREFACTORS[BoundId.BS_UPPER](x),
}

# 命令行可用的界族名
BOUND_FAMILIES: Dict[str, List[BoundId]] = {
    "gordon": [BoundId.GORDON_LOWER, BoundId.GORDON_UPPER],
    "bs": [BoundId.BS_LOWER, BoundId.BS_UPPER],
    "thm3": [BoundId.THM3_LOWER, BoundId.THM3_UPPER],
    "corollary": [BoundId.COROLLARY_LOWER, BoundId.COROLLARY_UPPER],
    "all": [spec.id for spec in _CATALOG],
}


@dataclass
class ComparisonRow:
    """单个 x 处参考值与各界的比较结果"""
    x: float
    reference: float
    reference_log: float
    bound_values: Dict[BoundId, float] = field(default_factory=dict)
    bound_log_values: Dict[BoundId, float] = field(default_factory=dict)
    relative_errors: Dict[BoundId, float] = field(default_factory=dict)
    in_validity: Dict[BoundId, bool] = field(default_factory=dict)
    ordering_ok: bool = True
    violations: List[BoundId] = field(default_factory=list)


def bound_catalog() -> List[BoundSpec]:
    """返回全部八个界，顺序固定"""
    return list(_CATALOG)


def get_spec(bound_id) -> BoundSpec:
    """按标识取界元数据"""
    return _SPECS[BoundId(bound_id)]


def resolve_bound_selection(names: Iterable[str]) -> List[BoundId]:
    """
    解析界选择列表（族名或单个标识），按目录顺序去重返回

    Raises:
        ValueError: 名称未知或结果为空
    """
    selected = set()
    unknown = []
    for raw in names:
        name = raw.strip().lower()
        if not name:
            continue
        if name in BOUND_FAMILIES:
            selected.update(BOUND_FAMILIES[name])
        elif name in {b.value for b in BoundId}:
            selected.add(BoundId(name))
        else:
            unknown.append(raw)

    if unknown:
        choices = ", ".join(list(BOUND_FAMILIES) + [b.value for b in BoundId])
        raise ValueError(f"未知的界: {', '.join(unknown)}（可选: {choices}）")
    if not selected:
        raise ValueError("至少需要选择一个界")

    return [spec.id for spec in _CATALOG if spec.id in selected]


def log_evaluate_bound(bound_id, x: Abscissa, force: bool = False) -> float:
    """
    对数域求界值 log(prefactor(x)) - x²/2

    Raises:
        DomainError: x <= 0 或超出 [0, 40]
        ValidityError: force=False 且 x 不在已证明的有效区间内
    """
    spec = get_spec(bound_id)
    x = check_abscissa(x, positive=True)
    if not force and not spec.proven_validity.contains(x):
        raise ValidityError(
            f"{spec.id.value} 仅在 x ∈ {spec.proven_validity.describe()} 上成立，收到 x={x}；"
            f"如需在有效区间外求值请使用 force=True"
        )
    return _LOG_PREFACTORS[spec.id](x) - 0.5 * x * x


def evaluate_bound(bound_id, x: Abscissa, force: bool = False) -> float:
    """线性域求界值；x 很大时可能下溢为 0，比较请用 log_evaluate_bound"""
    return math.exp(log_evaluate_bound(bound_id, x, force))


def compare_at(x: Abscissa, ids: Optional[Iterable] = None,
               reference_log: Optional[float] = None) -> ComparisonRow:
    """
    在 x 处比较参考值 M(x) 与所选各界

    有效区间外的界也会求值（force），但不参与 ordering_ok 判定。
    x 超过 log_domain_threshold 时相对误差与大小比较都在对数域进行。

    Args:
        x: 横坐标，x > 0
        ids: 界标识集合，默认全部
        reference_log: 预先算好的 log M(x)（扫描网格时复用）
    """
    x = check_abscissa(x, positive=True)
    selected = [spec.id for spec in _CATALOG] if ids is None else [BoundId(i) for i in ids]
    if reference_log is None:
        reference_log = log_tail_integral(x)
    reference = math.exp(reference_log)
    log_domain = x > BOUNDS_CONFIG["log_domain_threshold"]

    row = ComparisonRow(x=x, reference=reference, reference_log=reference_log)
    for bound_id in selected:
        spec = _SPECS[bound_id]
        log_value = log_evaluate_bound(bound_id, x, force=True)
        value = math.exp(log_value)
        valid = spec.proven_validity.contains(x)

        if log_domain:
            relative_error = math.expm1(log_value - reference_log)
            holds = (log_value < reference_log if spec.side is Side.LOWER
                     else log_value > reference_log)
        else:
            relative_error = (value - reference) / reference
            holds = value < reference if spec.side is Side.LOWER else value > reference

        row.bound_values[bound_id] = value
        row.bound_log_values[bound_id] = log_value
        row.relative_errors[bound_id] = relative_error
        row.in_validity[bound_id] = valid

        if valid and not holds:
            row.violations.append(bound_id)

    row.ordering_ok = not row.violations
    return row


def bound_margin(bound_id, x: Abscissa, reference_log: Optional[float] = None) -> float:
    """界成立的对数余量: 上界为 log b - log M，下界为 log M - log b；正值表示成立"""
    spec = get_spec(bound_id)
    log_value = log_evaluate_bound(spec.id, x, force=True)
    if reference_log is None:
        reference_log = log_tail_integral(x)
    if spec.side is Side.UPPER:
        return log_value - reference_log
    return reference_log - log_value


def empirical_crossover(bound_id, lo: Abscissa, hi: Abscissa,
                        tol: Optional[float] = None) -> Abscissa:
    """
    二分搜索界开始成立的位置（可能早于已证明的充分阈值）

    Raises:
        BracketError: [lo, hi] 两端余量没有符号变化
    """
    spec = get_spec(bound_id)
    lo = check_abscissa(lo, name="lo", positive=True)
    hi = check_abscissa(hi, name="hi", positive=True)
    tol = BOUNDS_CONFIG["crossover_tol"] if tol is None else float(tol)
    if not tol > 0:
        raise DomainError(f"tol 必须大于 0，收到 {tol}")
    if not lo < hi:
        raise DomainError(f"要求 lo < hi，收到 lo={lo}, hi={hi}")

    margin_lo = bound_margin(spec.id, lo)
    margin_hi = bound_margin(spec.id, hi)
    if margin_lo * margin_hi >= 0.0:
        state = "成立" if margin_lo > 0 else "不成立"
        raise BracketError(
            f"{spec.id.value} 在 [{lo}, {hi}] 两端都{state}（余量 {margin_lo:.3e}, {margin_hi:.3e}），"
            f"没有交叉点"
        )

    root = optimize.bisect(lambda x: bound_margin(spec.id, x), lo, hi, xtol=tol)
    logger.debug(f"{spec.id.value} 经验交叉点 ≈ {root} (证明阈值 {spec.proven_validity.lo})")
    return root


def integrand_factor(u: float) -> float:
    """g₃(u) = u(2+u²)/(1+u²)^(3/2)；u > crossover_constant() 时大于 1"""
    return u * (2.0 + u * u) / (1.0 + u * u) ** 1.5


def identity_residual(x: Abscissa) -> float:
    """
    积分恒等式 ∫ₓ^∞ g₃(u)e^(-u²/2)du = e^(-x²/2)/√(1+x²) 的相对残差

    两边都乘以 e^(x²/2) 后比较，x 较大时不下溢。
    """
    x = check_abscissa(x)
    lhs = scaled_tail_quad(integrand_factor, x)
    rhs = 1.0 / math.sqrt(1.0 + x * x)
    return (lhs - rhs) / rhs


def asymptotic_ratio(x: Abscissa) -> float:
    """M(x)·√(1+x²)·e^(x²/2)，x → ∞ 时从下方趋于 1"""
    x = check_abscissa(x, positive=True)
    return mills_ratio(x) * math.hypot(1.0, x)


def limiting_ratio(x: Abscissa) -> float:
    """新下界与新上界的前因子之比 (1+x²)^(3/2)/(x(2+x²)) = 1/g₃(x)，x → ∞ 时趋于 1"""
    x = check_abscissa(x, positive=True)
    return 1.0 / integrand_factor(x)
