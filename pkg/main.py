"""
高斯尾积分界工具 - 主程序
"""

import sys
import logging
from pathlib import Path

# 设置 Windows 控制台编码为 UTF-8
if sys.platform == 'win32':
    try:
        import ctypes
        kernel32 = ctypes.windll.kernel32
        kernel32.SetConsoleCP(65001)
        kernel32.SetConsoleOutputCP(65001)
    except Exception:
        pass

import click
from colorama import init, Fore, Style

# 导入配置
from config import (
    validate_config,
    GRID_CONFIG,
    LOG_CONFIG,
    OUTPUT_CONFIG,
    VERIFY_CONFIG,
)

# 导入核心模块
from src.bounds import (
    BoundId,
    bound_catalog,
    empirical_crossover,
    evaluate_bound,
    identity_residual,
    log_evaluate_bound,
)
from src.cli_report import (
    CommandConfig,
    CsvTable,
    cmd_bounds_table,
    cmd_conjecture_scan,
    cmd_inverse_table,
    cmd_verify,
    conjecture_summary_table,
)
from src.errors import BoundsToolkitError, ConfigError
from src.gauss_core import METHODS, inverse_q, mills_ratio, q_value, tail_integral
from src.operation_middleware import get_middleware
from src.thread_manager import shutdown_thread_manager
from src.utils import dumps_json, setup_logger, write_text

# 初始化
init()  # colorama

logger = setup_logger('main', LOG_CONFIG['level'])
package_logger = setup_logger('src', LOG_CONFIG['level'])

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_CONFIG = 2


def print_banner():
    """打印程序横幅（只用于面向人的命令，表格输出不带横幅）"""
    banner = f"""
{Fore.CYAN}╔═══════════════════════════════════════════════════════╗
║                                                       ║
║          高斯尾积分界工具                             ║
║                                                       ║
║     Mill 比界对比、反 Q 函数估计、不变量验证          ║
║                                                       ║
╚═══════════════════════════════════════════════════════╝{Style.RESET_ALL}
"""
    click.echo(banner)


def fail(e: Exception):
    """打印错误并按类型退出: 配置/输入错误为 2，其他为 1"""
    if isinstance(e, ConfigError):
        click.echo(f"{Fore.RED}[ERROR] {e}{Style.RESET_ALL}", err=True)
        sys.exit(EXIT_CONFIG)
    if isinstance(e, (BoundsToolkitError, ValueError)):
        click.echo(f"{Fore.RED}[ERROR] 参数错误: {e}{Style.RESET_ALL}", err=True)
        sys.exit(EXIT_CONFIG)
    click.echo(f"{Fore.RED}[ERROR] 错误: {e}{Style.RESET_ALL}", err=True)
    logger.exception("执行过程中发生错误")
    sys.exit(EXIT_VIOLATION)


def parse_bounds(value: str):
    return [item for item in value.split(",") if item.strip()]


format_option = click.option('--format', 'fmt', type=click.Choice(list(OUTPUT_CONFIG['formats'])),
                             default=None, help='输出格式')
out_option = click.option('--out', '-o', type=click.Path(dir_okay=False, path_type=Path),
                          default=None, help='输出文件（默认写到标准输出）')


@click.group()
@click.version_option(version='1.0.0')
@click.option('--verbose', '-v', is_flag=True, help='输出 DEBUG 日志')
@click.pass_context
def cli(ctx, verbose):
    """高斯尾积分界工具 - 命令行界面"""
    level = 'DEBUG' if verbose else LOG_CONFIG['level']
    logger.setLevel(getattr(logging, level))
    package_logger.setLevel(getattr(logging, level))

    # 验证配置
    try:
        validate_config()
    except ValueError as e:
        click.echo(f"{Fore.RED}[ERROR] {e}{Style.RESET_ALL}", err=True)
        sys.exit(EXIT_CONFIG)

    ctx.call_on_close(shutdown_thread_manager)


@cli.command('bounds-table')
@click.option('--figure', type=click.Choice(['fig1', 'fig2', 'fig3']), default='fig1',
              help='默认网格: fig1 (0,1.5]、fig2 [1.5,6]、fig3 归一化 [0.5,6]')
@click.option('--x-min', type=float, default=None, help='x 起点')
@click.option('--x-max', type=float, default=None, help='x 终点')
@click.option('--step', type=float, default=None, help='x 步长')
@click.option('--bounds', 'bounds', default='all',
              help='逗号分隔的界族或界标识: gordon,bs,thm3,corollary,all 或 gordon_lower 等')
@click.option('--normalized/--absolute', default=None, help='除以参考值（fig3 默认归一化）')
@click.option('--q-scale', is_flag=True, help='报告 Q(x) 尺度而不是 M(x)')
@format_option
@out_option
def bounds_table(figure, x_min, x_max, step, bounds, normalized, q_scale, fmt, out):
    """输出参考值与各界的对比表"""
    if normalized is None:
        normalized = figure == 'fig3' and not q_scale
    try:
        config = CommandConfig.for_figure('bounds-table', figure, x_min=x_min, x_max=x_max,
                                          step=step, bounds=parse_bounds(bounds),
                                          normalized=normalized, q_scale=q_scale, out=out,
                                          fmt=fmt)
        table = cmd_bounds_table(config)
        write_text(table.render(config.fmt), config.out)
    except Exception as e:
        fail(e)


@cli.command('inverse-table')
@click.option('--alpha-min', type=float, default=None, help='α 下限')
@click.option('--alpha-max', type=float, default=None, help='α 上限')
@click.option('--points-per-decade', type=int, default=None, help='每十倍程点数')
@click.option('--alpha', 'alphas', type=float, multiple=True, help='指定 α（可重复，优先于范围）')
@format_option
@out_option
def inverse_table(alpha_min, alpha_max, points_per_decade, alphas, fmt, out):
    """输出精确反 Q 值、闭式估计与证书界"""
    try:
        config = CommandConfig.for_figure('inverse-table', 'fig4', alpha_min=alpha_min,
                                          alpha_max=alpha_max,
                                          points_per_decade=points_per_decade,
                                          alphas=list(alphas), out=out, fmt=fmt)
        table = cmd_inverse_table(config)
        write_text(table.render(config.fmt), config.out)
    except Exception as e:
        fail(e)


@cli.command('conjecture-scan')
@click.option('--alpha-min', type=float, default=None, help='α 下限')
@click.option('--alpha-max', type=float, default=None, help='α 上限')
@click.option('--points-per-decade', type=int, default=None, help='每十倍程点数')
@format_option
@out_option
def conjecture_scan_command(alpha_min, alpha_max, points_per_decade, fmt, out):
    """扫描反 Q 猜想中的三个不等式（JSON 报告，csv 为摘要）"""
    try:
        config = CommandConfig.for_figure('conjecture-scan', 'scan', alpha_min=alpha_min,
                                          alpha_max=alpha_max,
                                          points_per_decade=points_per_decade,
                                          out=out, fmt=fmt or 'json')
        payload = cmd_conjecture_scan(config)
        if config.fmt == 'csv':
            text = conjecture_summary_table(payload).to_csv()
        else:
            text = dumps_json(payload)
        write_text(text, config.out)
    except Exception as e:
        fail(e)


@cli.command()
@click.option('--grid-points', type=int, default=VERIFY_CONFIG['grid_points'], show_default=True,
              help='(0, 40] 上的网格点数')
@click.option('--no-color', is_flag=True, help='关闭彩色输出')
def verify(grid_points, no_color):
    """运行完整不变量套件；退出码 0 表示全部通过"""
    print_banner()

    try:
        config = CommandConfig('verify', grid_points=grid_points)
        outcome = cmd_verify(config, get_middleware(color_output=not no_color))
    except Exception as e:
        fail(e)
        return

    click.echo()
    for line in outcome.summary_lines():
        if line.startswith('[PASS]'):
            color = Fore.GREEN
        elif line.startswith('[FAIL]'):
            color = Fore.RED
        else:
            color = Fore.CYAN
        click.echo(line if no_color else f"{color}{line}{Style.RESET_ALL}")

    if outcome.exit_status == EXIT_OK:
        click.echo(f"\n{Fore.GREEN}[SUCCESS] 全部 {len(outcome.families)} 个不变量族通过{Style.RESET_ALL}\n")
    else:
        click.echo(f"\n{Fore.RED}[FAILED] 存在不变量违反{Style.RESET_ALL}\n")
    sys.exit(outcome.exit_status)


@cli.command('eval')
@click.argument('quantity', type=click.Choice(['q', 'mills', 'tail', 'inverse']))
@click.argument('value', type=float)
@click.option('--method', type=click.Choice(list(METHODS)), default=None, help='参考值求值方法')
@click.option('--normalized', is_flag=True, help='tail 输出 Q(x) 而不是 M(x)')
def eval_command(quantity, value, method, normalized):
    """
    单点求值

    QUANTITY: q / mills / tail / inverse；VALUE: x 或 α
    """
    try:
        if quantity == 'q':
            result = q_value(value, method)
        elif quantity == 'mills':
            result = mills_ratio(value, method)
        elif quantity == 'tail':
            tail = tail_integral(value, normalized=normalized, method=method)
            click.echo(f"{tail.linear!r}\tlog={tail.log_value!r}")
            return
        else:
            result = inverse_q(value, method)
        click.echo(repr(result))
    except Exception as e:
        fail(e)


@cli.command()
@click.argument('bound_id', type=click.Choice([b.value for b in BoundId]))
@click.argument('x', type=float)
@click.option('--force', is_flag=True, help='允许在已证明的有效区间外求值')
def bound(bound_id, x, force):
    """单点求界值（线性值与对数值）"""
    try:
        log_value = log_evaluate_bound(bound_id, x, force=force)
        click.echo(f"{evaluate_bound(bound_id, x, force=force)!r}\tlog={log_value!r}")
    except Exception as e:
        fail(e)


@cli.command()
@click.argument('bound_id', type=click.Choice([b.value for b in BoundId]))
@click.argument('lo', type=float)
@click.argument('hi', type=float)
@click.option('--tol', type=float, default=None, help='二分容差')
def crossover(bound_id, lo, hi, tol):
    """在 [LO, HI] 内搜索界开始成立的位置"""
    try:
        click.echo(repr(empirical_crossover(bound_id, lo, hi, tol)))
    except Exception as e:
        fail(e)


@cli.command()
@click.argument('xs', type=float, nargs=-1, required=True)
def identity(xs):
    """积分恒等式的相对残差"""
    try:
        table = CsvTable(['x', 'residual'], [[x, identity_residual(x)] for x in xs])
        write_text(table.to_csv(), None)
    except Exception as e:
        fail(e)


@cli.command()
@format_option
def catalog(fmt):
    """列出全部界及其已证明的有效区间"""
    table = CsvTable(['id', 'side', 'validity', 'decreasing_from', 'source', 'formula'])
    for spec in bound_catalog():
        table.add_row([spec.id.value, spec.side.value, spec.proven_validity.describe(),
                       spec.decreasing_from, spec.source, spec.formula])
    write_text(table.render(fmt or OUTPUT_CONFIG['default_format']), None)


@cli.command()
def info():
    """显示工具信息"""
    print_banner()

    fig = GRID_CONFIG
    info_text = f"""
{Fore.CYAN}工具信息:{Style.RESET_ALL}

名称: 高斯尾积分界工具
版本: 1.0.0
描述: 高精度 Q 函数参考值、Mill 比上下界对比、反 Q 函数闭式估计与证书界

{Fore.CYAN}核心功能:{Style.RESET_ALL}
  - 两种独立方法求 Mill 比（自适应求积 / 级数 + 连分式），对数域求值到 x = 40
  - Gordon、Birnbaum–Sampford、新 Mill 比不等式及拼接界
  - 反 Q 函数的闭式估计、证书界与猜想扫描
  - 九个不变量族的验证套件

{Fore.CYAN}默认网格:{Style.RESET_ALL}
  - fig1: x ∈ [{fig['fig1']['x_min']}, {fig['fig1']['x_max']}] 步长 {fig['fig1']['step']}
  - fig2: x ∈ [{fig['fig2']['x_min']}, {fig['fig2']['x_max']}] 步长 {fig['fig2']['step']}
  - fig3: x ∈ [{fig['fig3']['x_min']}, {fig['fig3']['x_max']}] 步长 {fig['fig3']['step']}（归一化）
  - fig4: α ∈ [{fig['fig4']['alpha_min']}, {fig['fig4']['alpha_max']}]，每十倍程 {fig['fig4']['points_per_decade']} 点

{Fore.CYAN}使用示例:{Style.RESET_ALL}
  # 小 x 区间的界对比
  python main.py bounds-table --figure fig1 --bounds gordon,thm3

  # 归一化对比写到文件
  python main.py bounds-table --figure fig3 --bounds bs,thm3 -o fig3.csv

  # 反 Q 对比表
  python main.py inverse-table --alpha 1e-3 --alpha 1e-6

  # 猜想扫描
  python main.py conjecture-scan --points-per-decade 10

  # 验证套件
  python main.py verify --grid-points 200
"""
    click.echo(info_text)


if __name__ == '__main__':
    cli()
