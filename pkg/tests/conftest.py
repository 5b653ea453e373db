"""
测试公共夹具
"""

import math

import pytest
from scipy import special

from src.thread_manager import shutdown_thread_manager


@pytest.fixture
def erfcx_mills_ratio():
    """独立参考: R(x) = √(π/2)·erfcx(x/√2)"""
    def ratio(x: float) -> float:
        return math.sqrt(0.5 * math.pi) * float(special.erfcx(x / math.sqrt(2.0)))
    return ratio


@pytest.fixture(autouse=True)
def fresh_thread_manager():
    """每个测试结束后关闭全局线程池"""
    yield
    shutdown_thread_manager()
