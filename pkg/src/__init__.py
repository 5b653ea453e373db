"""
高斯尾积分界工具
"""

__version__ = "1.0.0"
__author__ = "Your Name"
__description__ = "高斯尾积分的高精度参考值、Mill 比上下界对比与反 Q 函数估计"
