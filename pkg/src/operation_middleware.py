"""
操作中间件 - 验证套件的步骤追踪与终端输出

每个不变量族是一个操作；中间件只负责展示与统计，退出码由调用方
根据检查结果决定。
"""

import time
import logging
from contextlib import contextmanager
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterator, List, Optional

import click
from colorama import Fore, Style

from config import MIDDLEWARE_CONFIG

logger = logging.getLogger(__name__)


class OperationStatus(Enum):
    RUNNING = "running"
    SUCCESS = "success"
    FAILED = "failed"
    WARNING = "warning"


_STATUS_COLORS = {
    OperationStatus.RUNNING: Fore.BLUE,
    OperationStatus.SUCCESS: Fore.GREEN,
    OperationStatus.FAILED: Fore.RED,
    OperationStatus.WARNING: Fore.YELLOW,
}

_STEP_STYLES = {
    'INFO': ('→', Fore.CYAN),
    'SUCCESS': ('✓', Fore.GREEN),
    'WARNING': ('⚠', Fore.YELLOW),
    'ERROR': ('✗', Fore.RED),
}


@dataclass
class OperationResult:
    """一个不变量族的运行记录"""
    operation_id: str
    name: str
    status: OperationStatus = OperationStatus.RUNNING
    start_time: float = 0.0
    duration: Optional[float] = None
    checked: int = 0
    failed: int = 0
    message: str = ""


class OperationMiddleware:
    """验证步骤追踪器"""

    def __init__(self, color_output: Optional[bool] = None, show_details: Optional[bool] = None):
        self.color_output = (MIDDLEWARE_CONFIG["color_output"]
                             if color_output is None else color_output)
        self.show_details = (MIDDLEWARE_CONFIG["show_details"]
                             if show_details is None else show_details)
        self._operations: Dict[str, OperationResult] = {}

    def _echo(self, text: str, color: str = ""):
        click.echo(f"{color}{text}{Style.RESET_ALL}" if self.color_output and color else text)

    @property
    def stats(self) -> Dict[str, int]:
        """按状态统计的操作数"""
        statuses = [op.status for op in self._operations.values()]
        return {
            'total_operations': len(statuses),
            'successful': statuses.count(OperationStatus.SUCCESS),
            'failed': statuses.count(OperationStatus.FAILED),
            'warnings': statuses.count(OperationStatus.WARNING),
        }

    @contextmanager
    def operation_context(self, operation_id: str, name: str) -> Iterator[str]:
        """追踪一个不变量族；块内异常记为失败并继续抛出"""
        operation = OperationResult(operation_id=operation_id, name=name, start_time=time.time())
        self._operations[operation_id] = operation
        self._echo(f"→ {name}", Fore.CYAN)
        try:
            yield operation_id
        except Exception as e:
            self.update_operation(operation_id, OperationStatus.FAILED, message=f"{name} 中断: {e}")
            raise
        finally:
            operation.duration = time.time() - operation.start_time
            logger.debug(f"[{operation_id}] {operation.status.value}, 用时 {operation.duration:.3f}s")

    def update_operation(self, operation_id: str, status: OperationStatus, message: str = "",
                         checked: Optional[int] = None, failed: Optional[int] = None):
        """更新状态与检查计数"""
        operation = self._operations.get(operation_id)
        if operation is None:
            logger.debug(f"忽略未登记的操作 {operation_id}")
            return

        operation.status = status
        operation.message = message
        if checked is not None:
            operation.checked = checked
        if failed is not None:
            operation.failed = failed

        if message:
            self._echo(f"  [{status.value.upper()}] {message}", _STATUS_COLORS[status])

    def log_step(self, operation_id: str, step: str, status: str = "INFO", details: str = ""):
        """
        输出一步检查信息

        Args:
            operation_id: 所属操作
            step: 步骤描述
            status: INFO / SUCCESS / WARNING / ERROR
            details: 逐行缩进输出，show_details 为 False 时省略
        """
        symbol, color = _STEP_STYLES.get(status, _STEP_STYLES['INFO'])
        logger.debug(f"[{operation_id}] {step}")
        self._echo(f"  {symbol} {step}", color)

        if self.show_details:
            for line in filter(str.strip, details.splitlines()):
                self._echo(f"      {line}")

    def get_operation(self, operation_id: str) -> Optional[OperationResult]:
        return self._operations.get(operation_id)

    def get_all_operations(self) -> List[OperationResult]:
        return list(self._operations.values())

    def print_summary(self):
        """打印各不变量族的检查数、失败数与用时"""
        self._echo('=' * 60, Fore.CYAN)
        for op in self._operations.values():
            self._echo(f"  {op.name:<28} {op.status.value:<8} {op.failed}/{op.checked} "
                       f"({op.duration or 0.0:.2f}s)", _STATUS_COLORS[op.status])
        stats = self.stats
        self._echo(f"  通过 {stats['successful']} / 失败 {stats['failed']} / "
                   f"共 {stats['total_operations']}", Fore.CYAN)
        self._echo('=' * 60, Fore.CYAN)


def get_middleware(color_output: Optional[bool] = None) -> OperationMiddleware:
    """每次验证运行使用独立的中间件实例"""
    return OperationMiddleware(color_output=color_output)
