"""
异常定义模块
"""

from typing import List, Optional


class BoundsToolkitError(Exception):
    """工具内所有异常的基类"""


class DomainError(BoundsToolkitError, ValueError):
    """输入超出数学定义域（负 x、非有限值、α 不在 (0, 0.5] 等）"""


class ValidityError(DomainError):
    """严格模式下在已证明的有效区间之外求界"""


class AttainabilityError(DomainError):
    """界在其有效区间上取不到反演目标值"""


class BracketError(BoundsToolkitError, ValueError):
    """区间两端没有符号变化，无法求根或定位交叉点"""


class ConfigError(BoundsToolkitError, ValueError):
    """命令配置无效，携带全部错误信息"""

    def __init__(self, errors: List[str], message: Optional[str] = None):
        self.errors = list(errors)
        super().__init__(message or "配置无效:\n" + "\n".join(f"  - {e}" for e in self.errors))
