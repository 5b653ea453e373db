"""
线程管理模块 - 网格扫描的线程池分发与任务记录

网格上的每个点都是纯函数求值，互不依赖；结果按输入顺序合并，
与线程调度无关。
"""

import sys
import time
import logging
import threading
from concurrent.futures import Future, ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, List, Optional, Sequence

from colorama import Fore, Style
from tqdm import tqdm

from config import THREAD_CONFIG

logger = logging.getLogger(__name__)


@dataclass
class TaskInfo:
    """一次网格扫描的记录"""
    task_id: str
    name: str
    size: int  # 网格点数
    status: str = 'running'  # 'running' / 'completed' / 'failed'
    start_time: float = 0.0
    end_time: Optional[float] = None
    done: int = 0  # 已完成的点数
    error: Optional[BaseException] = None

    @property
    def elapsed(self) -> float:
        return (self.end_time or time.time()) - self.start_time


class ThreadManager:
    """网格扫描线程池"""

    def __init__(self, max_workers: int = 4):
        self.max_workers = max_workers
        self._executor: Optional[ThreadPoolExecutor] = None
        self._tasks: List[TaskInfo] = []
        self._lock = threading.Lock()
        self._closed = False

    def start(self):
        """按需创建线程池"""
        if self._closed:
            raise RuntimeError("ThreadManager 已关闭")
        if self._executor is None:
            self._executor = ThreadPoolExecutor(max_workers=self.max_workers,
                                                thread_name_prefix="GridScan")
            logger.debug(f"[ThreadManager] 线程池已启动，{self.max_workers} 个工作线程")

    def stop(self, timeout: Optional[float] = None):
        """关闭线程池；未开始的点直接取消"""
        self._closed = True
        executor, self._executor = self._executor, None
        if executor is None:
            return

        waiter = threading.Thread(target=executor.shutdown,
                                  kwargs={"wait": True, "cancel_futures": True}, daemon=True)
        waiter.start()
        waiter.join(THREAD_CONFIG["shutdown_timeout"] if timeout is None else timeout)
        if waiter.is_alive():
            logger.warning("[ThreadManager] 线程池关闭超时，剩余任务在后台结束")
        logger.debug("[ThreadManager] 线程池已关闭")

    def _register(self, name: str, size: int) -> TaskInfo:
        with self._lock:
            task = TaskInfo(task_id=f"{name}-{len(self._tasks) + 1}", name=name, size=size,
                            start_time=time.time())
            self._tasks.append(task)
        return task

    def _settle(self, task: TaskInfo, error: Optional[BaseException] = None):
        with self._lock:
            task.status = 'failed' if error else 'completed'
            task.error = error
            task.end_time = time.time()

    def map_ordered(self, name: str, func: Callable[[Any], Any], items: Sequence[Any],
                    show_progress: Optional[bool] = None) -> List[Any]:
        """
        在线程池上对每个网格点求值，按输入顺序返回结果

        任一点抛出异常时取消其余点并重新抛出；需要逐点容错的调用方
        应在 func 内部自行捕获。
        """
        self.start()
        items = list(items)
        task = self._register(name, len(items))
        show = THREAD_CONFIG["show_progress"] if show_progress is None else show_progress
        logger.debug(f"[ThreadManager] {task.task_id}: {len(items)} 点")

        futures: List[Future] = []
        results: List[Any] = []
        try:
            futures = [self._executor.submit(func, item) for item in items]
            with tqdm(total=len(futures), desc=name, disable=not show,
                      file=sys.stderr, leave=False) as progress:
                for future in futures:
                    results.append(future.result(timeout=THREAD_CONFIG["task_timeout"]))
                    task.done += 1
                    progress.update(1)
        except BaseException as e:
            for future in futures:
                future.cancel()
            self._settle(task, e)
            raise

        self._settle(task)
        logger.debug(f"[ThreadManager] {task.task_id} 完成，用时 {task.elapsed:.3f}s")
        return results

    def get_task_status(self, task_id: str) -> Optional[TaskInfo]:
        with self._lock:
            return next((task for task in self._tasks if task.task_id == task_id), None)

    def get_all_tasks(self) -> List[TaskInfo]:
        with self._lock:
            return list(self._tasks)

    def print_status(self):
        """打印网格扫描记录"""
        colors = {'running': Fore.YELLOW, 'completed': Fore.GREEN, 'failed': Fore.RED}
        print(f"{Fore.CYAN}[ThreadManager] 网格扫描 {len(self._tasks)} 次{Style.RESET_ALL}")
        for task in self.get_all_tasks():
            color = colors.get(task.status, Fore.WHITE)
            print(f"  {color}{task.name}: {task.status}, {task.done}/{task.size} 点, "
                  f"{task.elapsed:.2f}s{Style.RESET_ALL}")


# 全局线程管理器实例
_manager: Optional[ThreadManager] = None
_manager_lock = threading.Lock()


def get_thread_manager() -> ThreadManager:
    """获取全局线程管理器（关闭后再次调用会新建）"""
    global _manager
    with _manager_lock:
        if _manager is None:
            _manager = ThreadManager(max_workers=THREAD_CONFIG["max_workers"])
        return _manager


def shutdown_thread_manager():
    """关闭全局线程管理器"""
    global _manager
    with _manager_lock:
        if _manager is not None:
            _manager.stop()
            _manager = None
