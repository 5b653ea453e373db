"""
工具函数模块
"""

import io
import csv
import json
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence
import logging

import click
import numpy as np

from config import LOG_CONFIG, OUTPUT_CONFIG

logger = logging.getLogger(__name__)


def setup_logger(name: str, level: str = "INFO") -> logging.Logger:
    """设置日志记录器"""
    logger = logging.getLogger(name)
    logger.setLevel(getattr(logging, level))

    if not logger.handlers:
        handler = logging.StreamHandler()
        formatter = logging.Formatter(LOG_CONFIG["format"])
        handler.setFormatter(formatter)
        logger.addHandler(handler)

    return logger


def format_number(value: Any) -> str:
    """格式化单元格: 浮点数用最短可往返十进制表示"""
    if value is None:
        return OUTPUT_CONFIG["missing_value"]
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        # repr 即最短往返表示，与 locale 无关
        return repr(float(value))
    return str(value)


def to_jsonable(data: Any) -> Any:
    """把 numpy 标量、元组等转换为 json 可序列化对象（保持键顺序）"""
    if isinstance(data, dict):
        return {str(k): to_jsonable(v) for k, v in data.items()}
    if isinstance(data, (list, tuple)):
        return [to_jsonable(v) for v in data]
    if isinstance(data, (bool, np.bool_)):
        return bool(data)
    if isinstance(data, (int, np.integer)):
        return int(data)
    if isinstance(data, (float, np.floating)):
        value = float(data)
        # json 规范里没有 nan/inf
        return value if math.isfinite(value) else None
    return data


def dumps_json(data: Any) -> str:
    """序列化为 JSON 文本（稳定键顺序，以换行结尾）"""
    return json.dumps(to_jsonable(data), indent=OUTPUT_CONFIG["json_indent"],
                      ensure_ascii=False) + "\n"


def render_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """渲染 CSV 文本，逗号分隔、`\\n` 换行、不加引号"""
    buffer = io.StringIO()
    writer = csv.writer(
        buffer,
        delimiter=OUTPUT_CONFIG["csv_delimiter"],
        lineterminator=OUTPUT_CONFIG["line_terminator"],
        quoting=csv.QUOTE_MINIMAL,
    )
    writer.writerow(list(header))
    for row in rows:
        writer.writerow([format_number(v) for v in row])
    return buffer.getvalue()


def parse_csv(text: str) -> Dict[str, List[str]]:
    """解析 CSV 文本为按列存放的字典"""
    reader = csv.reader(io.StringIO(text), delimiter=OUTPUT_CONFIG["csv_delimiter"])
    header = next(reader)
    columns: Dict[str, List[str]] = {name: [] for name in header}
    for row in reader:
        for name, cell in zip(header, row):
            columns[name].append(cell)
    return columns


def write_text(text: str, file_path: Optional[Path]) -> None:
    """写出文本；未指定路径时写到标准输出"""
    if file_path is None:
        click.echo(text, nl=False)
        return

    file_path = Path(file_path)
    file_path.parent.mkdir(parents=True, exist_ok=True)
    # newline='' 保证 Windows 下也是 \n
    with open(file_path, 'w', encoding='utf-8', newline='') as f:
        f.write(text)
    logger.info(f"已写出 {file_path}")


def linear_grid(x_min: float, x_max: float, step: float) -> np.ndarray:
    """等步长网格，包含两端点（步长整除时）"""
    count = int(math.floor((x_max - x_min) / step + 1e-9)) + 1
    grid = x_min + step * np.arange(count)
    # 去掉 0.1 * 3 = 0.30000000000000004 这类累积误差
    return np.round(grid, 12)


def log_grid(v_min: float, v_max: float, points_per_decade: int) -> np.ndarray:
    """对数网格，每十倍程 points_per_decade 个点，包含两端点"""
    decades = math.log10(v_max) - math.log10(v_min)
    count = int(round(decades * points_per_decade)) + 1
    return np.logspace(math.log10(v_min), math.log10(v_max), max(count, 2))


def mixed_grid(x_max: float, total_points: int, log_min: float = 1e-3) -> np.ndarray:
    """(0, x_max] 上对数段 + 线性段混合网格，兼顾小 x 交叉区和大 x 渐近区"""
    half = max(total_points // 2, 1)
    # 对数段不含右端点，避免与线性段重复
    log_part = np.logspace(math.log10(log_min), math.log10(x_max), half, endpoint=False)
    lin_part = np.linspace(x_max / (total_points - half), x_max, total_points - half)
    return np.unique(np.concatenate([log_part, lin_part]))
