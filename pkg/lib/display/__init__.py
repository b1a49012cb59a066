"""
Display模組 - 訓練、實驗與驗證結果的終端輸出
"""

from .core import Display, format_loss

__all__ = [
    'Display',
    'format_loss',
]
