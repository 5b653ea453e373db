"""
报告模块 - 生成界对比表、反 Q 对比表、猜想扫描报告，并运行验证套件

所有计算完成后才组装输出，命令行层只负责写出文本。
"""

import math
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import (
    BOUNDS_CONFIG,
    GRID_CONFIG,
    INVERSE_CONFIG,
    ORACLE_CONFIG,
    OUTPUT_CONFIG,
    VERIFY_CONFIG,
)
from .bounds import (
    BOUND_FAMILIES,
    CROSSOVER,
    SQRT2,
    BoundId,
    ComparisonRow,
    Side,
    asymptotic_ratio,
    compare_at,
    empirical_crossover,
    get_spec,
    identity_residual,
    integrand_factor,
    limiting_ratio,
    resolve_bound_selection,
)
from .errors import BoundsToolkitError, ConfigError
from .gauss_core import HALF_SQRT_2PI, LOG_SQRT_2PI, inverse_q, log_tail_integral, mills_ratio
from .inverse_approx import ConjectureReport, conjecture_scan, invert_bound, inverse_row
from .operation_middleware import OperationMiddleware, OperationStatus, get_middleware
from .thread_manager import get_thread_manager
from .utils import dumps_json, linear_grid, log_grid, mixed_grid, render_csv

logger = logging.getLogger(__name__)

SUBCOMMANDS = ("bounds-table", "inverse-table", "conjecture-scan", "verify")

INVERSE_COLUMNS = ["alpha", "reference", "est_low1", "est_low2", "est_upp",
                   "cert_lower", "cert_upper"]


@dataclass
class CommandConfig:
    """单次命令的参数；所有范围在计算前校验"""
    subcommand: str
    x_min: Optional[float] = None
    x_max: Optional[float] = None
    step: Optional[float] = None
    alpha_min: Optional[float] = None
    alpha_max: Optional[float] = None
    points_per_decade: Optional[int] = None
    alphas: List[float] = field(default_factory=list)
    bounds: List[str] = field(default_factory=lambda: ["all"])
    normalized: bool = False
    q_scale: bool = False
    out: Optional[Path] = None
    fmt: str = OUTPUT_CONFIG["default_format"]
    grid_points: Optional[int] = None

    @classmethod
    def for_figure(cls, subcommand: str, figure: str, **overrides) -> "CommandConfig":
        """以 GRID_CONFIG 中某组默认网格为基础构造配置，未给出（None）的参数取默认值"""
        params = dict(GRID_CONFIG[figure])
        params.update({k: v for k, v in overrides.items() if v is not None})
        return cls(subcommand=subcommand, **params)

    def validate(self):
        """
        校验配置

        Raises:
            ConfigError: 携带全部错误信息
        """
        errors: List[str] = []

        if self.subcommand not in SUBCOMMANDS:
            errors.append(f"未知子命令 {self.subcommand}，可选 {', '.join(SUBCOMMANDS)}")
        if self.fmt not in OUTPUT_CONFIG["formats"]:
            errors.append(f"--format 必须是 {' / '.join(OUTPUT_CONFIG['formats'])}，收到 {self.fmt}")

        if self.subcommand == "bounds-table":
            errors.extend(self._x_range_errors())
            try:
                resolve_bound_selection(self.bounds)
            except ValueError as e:
                errors.append(f"--bounds: {e}")
            if self.normalized and self.q_scale:
                errors.append("--normalized 与 --q-scale 不能同时使用")

        elif self.subcommand == "inverse-table":
            if self.alphas:
                errors.extend(self._alpha_errors(self.alphas))
            else:
                errors.extend(self._alpha_range_errors())

        elif self.subcommand == "conjecture-scan":
            errors.extend(self._alpha_range_errors())

        elif self.subcommand == "verify":
            if self.grid_points is not None and self.grid_points < 2:
                errors.append(f"--grid-points 至少为 2，收到 {self.grid_points}")

        if errors:
            raise ConfigError(errors)

    def _x_range_errors(self) -> List[str]:
        errors = []
        if None in (self.x_min, self.x_max, self.step):
            return ["需要 --x-min、--x-max 与 --step"]
        x_cap = ORACLE_CONFIG["x_max"]
        if not (0.0 < self.x_min <= x_cap):
            errors.append(f"--x-min 必须在 (0, {x_cap}] 之间，收到 {self.x_min}")
        if not (0.0 < self.x_max <= x_cap):
            errors.append(f"--x-max 必须在 (0, {x_cap}] 之间，收到 {self.x_max}")
        if not self.x_min < self.x_max:
            errors.append(f"要求 --x-min < --x-max，收到 {self.x_min} >= {self.x_max}")
        if not self.step > 0.0:
            errors.append(f"--step 必须大于 0，收到 {self.step}")
        return errors

    def _alpha_errors(self, alphas: Sequence[float]) -> List[str]:
        lo, hi = INVERSE_CONFIG["alpha_min"], INVERSE_CONFIG["alpha_max"]
        return [f"alpha 必须在 [{lo}, {hi}] 之间（小 α 区间），收到 {a}"
                for a in alphas if not (lo <= a <= hi)]

    def _alpha_range_errors(self) -> List[str]:
        if None in (self.alpha_min, self.alpha_max, self.points_per_decade):
            return ["需要 --alpha-min、--alpha-max 与 --points-per-decade"]
        errors = self._alpha_errors([self.alpha_min, self.alpha_max])
        if not self.alpha_min < self.alpha_max:
            errors.append(f"要求 --alpha-min < --alpha-max，收到 {self.alpha_min} >= {self.alpha_max}")
        if self.points_per_decade < 1:
            errors.append(f"--points-per-decade 至少为 1，收到 {self.points_per_decade}")
        return errors


@dataclass
class CsvTable:
    """定长行表格；数值用最短往返十进制表示"""
    header: List[str]
    rows: List[List[Any]] = field(default_factory=list)

    def __post_init__(self):
        for i, row in enumerate(self.rows):
            if len(row) != len(self.header):
                raise ValueError(f"第 {i} 行有 {len(row)} 列，表头有 {len(self.header)} 列")

    def add_row(self, row: Sequence[Any]):
        if len(row) != len(self.header):
            raise ValueError(f"行有 {len(row)} 列，表头有 {len(self.header)} 列")
        self.rows.append(list(row))

    def column(self, name: str) -> List[Any]:
        index = self.header.index(name)
        return [row[index] for row in self.rows]

    def to_csv(self) -> str:
        return render_csv(self.header, self.rows)

    def to_json(self) -> str:
        return dumps_json({"columns": self.header,
                           "rows": [dict(zip(self.header, row)) for row in self.rows]})

    def render(self, fmt: str) -> str:
        return self.to_json() if fmt == "json" else self.to_csv()


def _reference_logs(name: str, xs: Sequence[float]) -> List[float]:
    return get_thread_manager().map_ordered(name, log_tail_integral, [float(x) for x in xs])


def cmd_bounds_table(config: CommandConfig) -> CsvTable:
    """
    界对比表: x、参考值，以及每个所选界的值和有效区间标记

    normalized=True 时所有值除以参考值（参考列恒为 1）；
    q_scale=True 时报告 Q 尺度（除以 √(2π)）。
    """
    config.validate()
    ids = resolve_bound_selection(config.bounds)
    xs = [float(x) for x in linear_grid(config.x_min, config.x_max, config.step)]
    reference_logs = _reference_logs("bounds_table", xs)

    header = ["x", "reference"]
    for bound_id in ids:
        header.extend([bound_id.value, f"{bound_id.value}_valid"])
    table = CsvTable(header)

    for x, reference_log in zip(xs, reference_logs):
        row = compare_at(x, ids, reference_log=reference_log)
        if config.normalized:
            shift = reference_log
        elif config.q_scale:
            shift = LOG_SQRT_2PI
        else:
            shift = 0.0
        cells: List[Any] = [x, math.exp(reference_log - shift)]
        for bound_id in ids:
            cells.append(math.exp(row.bound_log_values[bound_id] - shift))
            cells.append(row.in_validity[bound_id])
        table.add_row(cells)

    logger.info(f"界对比表: {len(table.rows)} 行, 界 {', '.join(b.value for b in ids)}")
    return table


def cmd_inverse_table(config: CommandConfig) -> CsvTable:
    """反 Q 对比表: 精确值、三个闭式估计、两个证书界（不可达时为空）"""
    config.validate()
    if config.alphas:
        alphas = [float(a) for a in config.alphas]
    else:
        alphas = [float(a) for a in log_grid(config.alpha_min, config.alpha_max,
                                             config.points_per_decade)]

    rows = get_thread_manager().map_ordered("inverse_table", inverse_row, alphas)
    table = CsvTable(list(INVERSE_COLUMNS))
    for item in rows:
        table.add_row([item.alpha, item.reference, item.est_low1, item.est_low2, item.est_upp,
                       item.cert_lower, item.cert_upper])

    logger.info(f"反 Q 对比表: {len(table.rows)} 行")
    return table


def serialize_report(report: ConjectureReport) -> Dict[str, Any]:
    """猜想报告转为键顺序固定的字典"""
    results = []
    for item in report.results:
        results.append({
            "name": item.name,
            "relation": item.relation,
            "holds_at": item.holds_at,
            "violations": [{"alpha": a, "estimate": e, "reference": r}
                           for a, e, r in item.violations],
            "non_evaluable": [{"alpha": a, "reason": reason} for a, reason in item.non_evaluable],
            "empirical_range": list(item.empirical_range) if item.empirical_range else None,
        })
    return {"grid": dict(report.grid), "results": results}


def conjecture_summary_table(payload: Dict[str, Any]) -> CsvTable:
    """猜想报告的 CSV 摘要，每个不等式一行"""
    table = CsvTable(["name", "relation", "holds_at", "violations", "non_evaluable",
                      "range_min", "range_max"])
    for item in payload["results"]:
        lo, hi = item["empirical_range"] or (None, None)
        table.add_row([item["name"], item["relation"], item["holds_at"],
                       len(item["violations"]), len(item["non_evaluable"]), lo, hi])
    return table


def cmd_conjecture_scan(config: CommandConfig) -> Dict[str, Any]:
    """在 α 对数网格上扫描猜想，返回可直接序列化的报告"""
    config.validate()
    report = conjecture_scan(config.alpha_min, config.alpha_max, config.points_per_decade)
    return serialize_report(report)


# ---------------------------------------------------------------- 验证套件

@dataclass
class FamilyResult:
    """一个不变量族的检查结果"""
    name: str
    description: str
    checked: int = 0
    failures: List[Tuple[str, str]] = field(default_factory=list)  # (位置, 不变量)

    @property
    def passed(self) -> bool:
        return not self.failures

    def check(self, ok: bool, where: str, invariant: str):
        self.checked += 1
        if not ok:
            self.failures.append((where, invariant))


@dataclass
class VerifyOutcome:
    """验证结果；exit_status 只由不变量族决定"""
    families: List[FamilyResult]
    conjecture: Optional[Dict[str, Any]] = None

    @property
    def exit_status(self) -> int:
        return 0 if all(f.passed for f in self.families) else 1

    def failures(self, limit: Optional[int] = None) -> List[str]:
        limit = VERIFY_CONFIG["max_failures"] if limit is None else limit
        items = [f"{where}: {invariant}" for family in self.families
                 for where, invariant in family.failures]
        return items[:limit]

    def summary_lines(self) -> List[str]:
        lines = []
        for family in self.families:
            state = "PASS" if family.passed else "FAIL"
            lines.append(f"[{state}] {family.name}: {family.checked} 项检查, "
                         f"{len(family.failures)} 项失败 - {family.description}")
        if self.conjecture is not None:
            for item in self.conjecture["results"]:
                lines.append(f"[INFO] conjecture {item['name']} ({item['relation']}): "
                             f"成立 {item['holds_at']}/{self.conjecture['grid']['size']}, "
                             f"违反 {len(item['violations'])}")
        failures = self.failures()
        if failures:
            lines.append(f"前 {len(failures)} 个失败:")
            lines.extend(f"  {line}" for line in failures)
        return lines


def _x_label(x: float) -> str:
    return f"x={x!r}"


def _check_oracle(family: FamilyResult, grid: List[float], reference_logs: List[float]):
    rtol = VERIFY_CONFIG["agreement_rtol"]
    cf_values = get_thread_manager().map_ordered(
        "oracle_cf", lambda x: mills_ratio(x, method="continued_fraction"), grid)
    for x, reference_log, cf_value in zip(grid, reference_logs, cf_values):
        quad_value = math.exp(reference_log + 0.5 * x * x)
        family.check(abs(quad_value - cf_value) <= rtol * cf_value, _x_label(x),
                     f"quadrature 与 continued_fraction 相对差 <= {rtol}")

    family.check(abs(mills_ratio(0.0) - HALF_SQRT_2PI) <= 1e-13 * HALF_SQRT_2PI,
                 _x_label(0.0), "M(0) = √(2π)/2")
    family.check(abs(inverse_q(0.5)) <= 1e-10, "alpha=0.5", "inverse_q(0.5) = 0")


def _check_sandwich(family_ids: Sequence[BoundId]) -> Callable:
    def check(family: FamilyResult, rows: List[ComparisonRow]):
        for row in rows:
            for bound_id in family_ids:
                if not row.in_validity[bound_id]:
                    continue
                side = get_spec(bound_id).side.value
                family.check(bound_id not in row.violations, _x_label(row.x),
                             f"{bound_id.value} ({side}) 夹逼")
    return check


def _check_new_bound_sandwich(family: FamilyResult, rows: List[ComparisonRow]):
    _check_sandwich(BOUND_FAMILIES["thm3"])(family, rows)
    for name, (start, (lo, hi)) in VERIFY_CONFIG["crossover_windows"].items():
        spec = get_spec(name)
        try:
            onset = empirical_crossover(spec.id, start, spec.proven_validity.lo)
        except BoundsToolkitError as e:
            family.check(False, f"{name} start={start!r}", f"{name} 经验交叉点无法定位: {e}")
            continue
        logger.info(f"{name} 经验交叉点 {onset:.6f}，证明阈值 {spec.proven_validity.lo:.6f}")
        family.check(lo < onset < hi and onset < spec.proven_validity.lo, f"{name} onset={onset!r}",
                     f"{name} 经验交叉点在 ({lo}, {hi}) 内且早于证明阈值")


# (更紧的界, 更松的界, 起点): 只比较 x > 起点的网格点
_ORDERINGS = (
    (BoundId.THM3_LOWER, BoundId.GORDON_LOWER, 0.0),
    (BoundId.THM3_UPPER, BoundId.GORDON_UPPER, 0.0),
    (BoundId.THM3_LOWER, BoundId.BS_LOWER, SQRT2),
    (BoundId.BS_UPPER, BoundId.THM3_UPPER, CROSSOVER),
)


def _check_orderings(family: FamilyResult, rows: List[ComparisonRow]):
    for row in rows:
        for tighter, looser, start in _ORDERINGS:
            if not row.x > start:
                continue
            a = row.bound_log_values[tighter]
            b = row.bound_log_values[looser]
            lower = get_spec(tighter).side is Side.LOWER
            ok = a > b if lower else a < b
            relation = ">" if lower else "<"
            family.check(ok, _x_label(row.x), f"{tighter.value} {relation} {looser.value}")


def _check_identity(family: FamilyResult, grid: List[float]):
    tol = BOUNDS_CONFIG["identity_tol"]
    for x in VERIFY_CONFIG["identity_points"]:
        residual = identity_residual(x)
        family.check(abs(residual) <= tol, _x_label(x), f"积分恒等式残差 {residual:.3e} <= {tol}")

    # g₃ 在交叉常数处等于 1
    for u in grid:
        if abs(u - CROSSOVER) < 1e-9:
            continue
        above = integrand_factor(u) > 1.0
        family.check(above == (u > CROSSOVER), f"u={u!r}", "g₃(u) > 1 当且仅当 u > 0.786151")


def _check_asymptotic(family: FamilyResult, grid: List[float], reference_logs: List[float]):
    start = VERIFY_CONFIG["asymptotic_min"]
    bound_from = VERIFY_CONFIG["asymptotic_bound_from"]
    slack = VERIFY_CONFIG["asymptotic_slack"]
    rtol = VERIFY_CONFIG["agreement_rtol"]

    previous = None
    for x, reference_log in zip(grid, reference_logs):
        if x < start:
            continue
        ratio = math.exp(reference_log + 0.5 * x * x) * math.hypot(1.0, x)
        family.check(ratio < 1.0, _x_label(x), "渐近比 < 1")
        if previous is not None:
            family.check(ratio >= previous * (1.0 - rtol), _x_label(x), "渐近比单调不减")
        if x >= bound_from:
            family.check(abs(ratio - 1.0) <= slack / (2.0 * x * x), _x_label(x),
                         f"|渐近比 - 1| <= {slack}/(2x²)")
        family.check(0.0 < limiting_ratio(x) < 1.0, _x_label(x), "新界前因子之比在 (0, 1) 内")
        previous = ratio

    for x, limit in VERIFY_CONFIG["asymptotic_spot_checks"]:
        ratio = asymptotic_ratio(x)
        family.check(abs(ratio - 1.0) <= limit, _x_label(x), f"|渐近比 - 1| <= {limit}")


def _certified_point(alpha: float) -> Optional[Tuple[float, float, float]]:
    try:
        return (invert_bound(BoundId.THM3_LOWER, alpha), inverse_q(alpha),
                invert_bound(BoundId.THM3_UPPER, alpha))
    except BoundsToolkitError as e:
        logger.debug(f"alpha={alpha!r} 证书界不可求: {e}")
        return None


def _check_certified_inverse(family: FamilyResult):
    alphas = [float(a) for a in np.geomspace(VERIFY_CONFIG["inverse_alpha_min"],
                                             VERIFY_CONFIG["inverse_alpha_max"],
                                             VERIFY_CONFIG["inverse_points"])]
    points = get_thread_manager().map_ordered("certified_inverse", _certified_point, alphas)
    for alpha, point in zip(alphas, points):
        if point is None:
            family.check(False, f"alpha={alpha!r}", "证书界在该 α 处可求")
            continue
        lower, reference, upper = point
        family.check(lower <= reference <= upper, f"alpha={alpha!r}",
                     "invert_bound(thm3_lower) <= inverse_q <= invert_bound(thm3_upper)")


def _run_family(middleware: OperationMiddleware, family: FamilyResult, runner: Callable, *args):
    with middleware.operation_context(family.name, family.description) as operation_id:
        try:
            runner(family, *args)
        except BoundsToolkitError as e:
            # 求值中断记为该族失败，其余族照常运行
            family.check(False, family.name, f"检查中断: {e}")
        if family.passed:
            middleware.update_operation(operation_id, OperationStatus.SUCCESS,
                                        message=f"{family.checked} 项检查全部通过",
                                        checked=family.checked, failed=0)
        else:
            details = "\n".join(f"{where}: {invariant}" for where, invariant
                                in family.failures[:VERIFY_CONFIG["max_failures"]])
            middleware.log_step(operation_id, f"{len(family.failures)} 项失败", "ERROR", details)
            middleware.update_operation(operation_id, OperationStatus.FAILED,
                                        message=f"{len(family.failures)}/{family.checked} 项失败",
                                        checked=family.checked, failed=len(family.failures))


def cmd_verify(config: CommandConfig, middleware: Optional[OperationMiddleware] = None) -> VerifyOutcome:
    """
    运行完整不变量套件

    九个不变量族决定退出码；猜想扫描只作为提示输出，不影响退出码。
    """
    config.validate()
    middleware = middleware or get_middleware()
    grid_points = config.grid_points or VERIFY_CONFIG["grid_points"]
    grid = [float(x) for x in mixed_grid(ORACLE_CONFIG["x_max"], grid_points,
                                         VERIFY_CONFIG["grid_log_min"])]
    logger.info(f"验证网格: {len(grid)} 点, ({grid[0]}, {grid[-1]}]")

    reference_logs = _reference_logs("verify_reference", grid)
    rows = [compare_at(x, reference_log=reference_log)
            for x, reference_log in zip(grid, reference_logs)]

    families = [
        FamilyResult("oracle", "两种参考值求值方法一致"),
        FamilyResult("gordon", "Gordon 夹逼"),
        FamilyResult("bs", "Birnbaum–Sampford 夹逼"),
        FamilyResult("thm3", "新 Mill 比不等式夹逼与经验交叉点"),
        FamilyResult("corollary", "拼接界夹逼"),
        FamilyResult("ordering", "界之间的紧致性排序"),
        FamilyResult("identity", "积分恒等式与 g₃ 阈值"),
        FamilyResult("asymptotic", "渐近比趋于 1"),
        FamilyResult("certified_inverse", "证书界夹逼精确反 Q"),
    ]
    runners = {
        "oracle": (_check_oracle, grid, reference_logs),
        "gordon": (_check_sandwich(BOUND_FAMILIES["gordon"]), rows),
        "bs": (_check_sandwich(BOUND_FAMILIES["bs"]), rows),
        "thm3": (_check_new_bound_sandwich, rows),
        "corollary": (_check_sandwich(BOUND_FAMILIES["corollary"]), rows),
        "ordering": (_check_orderings, rows),
        "identity": (_check_identity, grid),
        "asymptotic": (_check_asymptotic, grid, reference_logs),
        "certified_inverse": (_check_certified_inverse,),
    }
    for family in families:
        runner, *args = runners[family.name]
        _run_family(middleware, family, runner, *args)

    # 猜想只做提示
    scan = GRID_CONFIG["scan"]
    conjecture = serialize_report(conjecture_scan(scan["alpha_min"], scan["alpha_max"],
                                                  scan["points_per_decade"]))
    for item in conjecture["results"]:
        status = "INFO" if not item["violations"] else "WARNING"
        middleware.log_step("conjecture",
                            f"{item['name']}: 成立 {item['holds_at']}/{conjecture['grid']['size']}，"
                            f"违反 {len(item['violations'])}", status)

    middleware.print_summary()
    outcome = VerifyOutcome(families=families, conjecture=conjecture)
    logger.info(f"验证完成，退出码 {outcome.exit_status}")
    return outcome
