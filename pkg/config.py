"""
配置文件 - 高斯尾积分界工具全局配置
"""

import math
import logging

logger = logging.getLogger(__name__)

# 参考值（oracle）配置
ORACLE_CONFIG = {
    "method": "quadrature",  # 默认求值方法: 'quadrature' / 'continued_fraction'
    "x_max": 40.0,  # 横坐标上限，超过后 e^(-x²/2) 连对数比较也无意义
    "eval_rtol": 1e-12,  # 求值相对误差目标
    "quad_epsrel": 1e-13,  # scipy quad 相对容差（比求值目标严一个数量级）
    "quad_limit": 200,  # quad 最大子区间数
    "log_cutoff": 750.0,  # 被积函数指数低于 -750 时视为 0，截断积分上限
    "cf_switch": 2.0,  # 低于此点用正项级数，高于此点用连分式
    "cf_max_iter": 5000,  # 连分式 / 级数最大迭代次数
    "cf_eps": 1e-15,  # 级数 / Lentz 算法收敛阈值
    "inverse_rtol": 1e-10,  # 反 Q 函数相对容差
    "inverse_max_iter": 200,  # 安全牛顿法最大迭代次数
    "alpha_floor": 1e-300,  # 反 Q 函数允许的最小 α
}

# 界目录配置
BOUNDS_CONFIG = {
    "log_domain_threshold": 30.0,  # x 超过此值时在对数域比较
    "min_abscissa": 1e-8,  # 闭式界在 0 处发散时的搜索下限
    "crossover_tol": 1e-4,  # 经验交叉点默认容差
    "identity_tol": 1e-10,  # 积分恒等式残差上限
}

# 反 Q 函数近似配置
INVERSE_CONFIG = {
    "alpha_min": 1e-15,  # 小 α 区间下限
    "alpha_max": 1e-2,  # 小 α 区间上限（只考虑很小的 α）
    "invert_xtol": 1e-12,  # 界反演 brentq 绝对容差
    "invert_rtol": 1e-12,  # 界反演 brentq 相对容差
}

# 默认网格（四组对比图数据的取值范围）
GRID_CONFIG = {
    "fig1": {"x_min": 0.1, "x_max": 1.5, "step": 0.1},
    "fig2": {"x_min": 1.5, "x_max": 6.0, "step": 0.5},
    "fig3": {"x_min": 0.5, "x_max": 6.0, "step": 0.25},
    "fig4": {"alpha_min": 1e-10, "alpha_max": 1e-2, "points_per_decade": 10},
    "scan": {"alpha_min": 1e-12, "alpha_max": 1e-2, "points_per_decade": 10},
}

# 验证套件配置
VERIFY_CONFIG = {
    "grid_points": 2000,  # (0, 40] 上的混合网格点数
    "grid_log_min": 1e-3,  # 对数段最小点
    "agreement_rtol": 1e-11,  # 两种求值方法一致性
    "identity_points": [0.0, 0.5, 1.0, 2.0, 4.0, 8.0],
    "asymptotic_min": 2.0,  # 渐近比单调区间起点
    "asymptotic_bound_from": 5.0,  # |ratio-1| <= 1.2/(2x²) 的起点
    "asymptotic_slack": 1.2,
    "inverse_points": 50,  # 证书夹逼检查的 α 点数
    "inverse_alpha_min": 1e-12,
    "inverse_alpha_max": 1e-2,
    "max_failures": 10,  # 失败时列出的最大条目数
    # 经验交叉点: (搜索起点, 期望所在区间)，搜索终点为证明阈值
    "crossover_windows": {
        "thm3_upper": (0.1, (0.42, 0.44)),
        "thm3_lower": (1.0, (1.16, 1.17)),
    },
    "asymptotic_spot_checks": ((10.0, 6e-3), (30.0, 7e-4)),  # (x, |ratio - 1| 上限)
}

# 日志配置
LOG_CONFIG = {
    "level": "INFO",
    "format": "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
}

# 线程管理配置
THREAD_CONFIG = {
    "max_workers": 4,  # 最大工作线程数
    "task_timeout": 300,  # 任务超时时间（秒）
    "shutdown_timeout": 30,  # 关闭超时时间（秒）
    "show_progress": False,  # 网格扫描进度条（输出到 stderr）
}

# 中间件配置
MIDDLEWARE_CONFIG = {
    "show_details": True,  # 显示详细信息
    "color_output": True,  # 彩色输出
}

# 输出配置
OUTPUT_CONFIG = {
    "formats": ("csv", "json"),
    "default_format": "csv",
    "csv_delimiter": ",",
    "line_terminator": "\n",
    "json_indent": 2,
    "missing_value": "nan",  # 不可达的证书值写成 nan，float() 可直接解析
}


# 验证配置
def validate_config():
    """验证配置参数的有效性"""
    errors = []

    # 验证求值配置
    if ORACLE_CONFIG["method"] not in ("quadrature", "continued_fraction"):
        errors.append("ORACLE_CONFIG.method 必须是 quadrature 或 continued_fraction")

    for key in ("eval_rtol", "quad_epsrel", "cf_eps", "inverse_rtol", "alpha_floor"):
        if not (0 < ORACLE_CONFIG[key] < 1):
            errors.append(f"ORACLE_CONFIG.{key} 必须在 (0, 1) 之间")

    # QUADPACK 要求 epsrel >= 50 * 机器精度
    if ORACLE_CONFIG["quad_epsrel"] < 50 * 2.220446049250313e-16:
        errors.append("ORACLE_CONFIG.quad_epsrel 不能小于 50 倍机器精度")

    if ORACLE_CONFIG["quad_epsrel"] > ORACLE_CONFIG["eval_rtol"]:
        errors.append("ORACLE_CONFIG.quad_epsrel 必须不大于 eval_rtol")

    if ORACLE_CONFIG["x_max"] <= 0 or not math.isfinite(ORACLE_CONFIG["x_max"]):
        errors.append("ORACLE_CONFIG.x_max 必须是正的有限数")

    if ORACLE_CONFIG["cf_switch"] <= 0:
        errors.append("ORACLE_CONFIG.cf_switch 必须大于 0")

    for key in ("quad_limit", "cf_max_iter", "inverse_max_iter"):
        if ORACLE_CONFIG[key] <= 0:
            errors.append(f"ORACLE_CONFIG.{key} 必须大于 0")

    # 验证界配置
    if not (0 < BOUNDS_CONFIG["log_domain_threshold"] <= ORACLE_CONFIG["x_max"]):
        errors.append("BOUNDS_CONFIG.log_domain_threshold 必须在 (0, x_max] 之间")

    for key in ("min_abscissa", "crossover_tol", "identity_tol"):
        if BOUNDS_CONFIG[key] <= 0:
            errors.append(f"BOUNDS_CONFIG.{key} 必须大于 0")

    # 验证反 Q 配置
    if not (0 < INVERSE_CONFIG["alpha_min"] < INVERSE_CONFIG["alpha_max"] <= 0.5):
        errors.append("INVERSE_CONFIG 必须满足 0 < alpha_min < alpha_max <= 0.5")

    # 验证验证套件配置
    if VERIFY_CONFIG["grid_points"] < 2:
        errors.append("VERIFY_CONFIG.grid_points 至少为 2")

    if VERIFY_CONFIG["max_failures"] <= 0:
        errors.append("VERIFY_CONFIG.max_failures 必须大于 0")

    if not (0 < VERIFY_CONFIG["inverse_alpha_min"] < VERIFY_CONFIG["inverse_alpha_max"]):
        errors.append("VERIFY_CONFIG.inverse_alpha_min 必须小于 inverse_alpha_max")

    # 验证线程配置
    if THREAD_CONFIG["max_workers"] <= 0:
        errors.append("THREAD_CONFIG.max_workers 必须大于 0")

    if THREAD_CONFIG["task_timeout"] <= 0:
        errors.append("THREAD_CONFIG.task_timeout 必须大于 0")

    if OUTPUT_CONFIG["default_format"] not in OUTPUT_CONFIG["formats"]:
        errors.append("OUTPUT_CONFIG.default_format 必须是 csv 或 json")

    if errors:
        raise ValueError("配置验证失败:\n" + "\n".join(f"  - {error}" for error in errors))

    logger.debug("配置验证通过")


# 获取完整配置
def get_full_config():
    """获取完整的配置字典"""
    return {
        "oracle": ORACLE_CONFIG,
        "bounds": BOUNDS_CONFIG,
        "inverse": INVERSE_CONFIG,
        "grid": GRID_CONFIG,
        "verify": VERIFY_CONFIG,
        "thread": THREAD_CONFIG,
        "middleware": MIDDLEWARE_CONFIG,
        "output": OUTPUT_CONFIG,
        "log": LOG_CONFIG,
    }
