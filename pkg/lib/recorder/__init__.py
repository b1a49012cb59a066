"""
Recorder模組 - 訓練歷程記錄與 CSV / JSON 輸出
"""

from .core import Recorder, write_csv, write_json, read_csv, reemit_csv, format_cell, HISTORY_FIELDS

__all__ = [
    'Recorder',
    'write_csv',
    'write_json',
    'read_csv',
    'reemit_csv',
    'format_cell',
    'HISTORY_FIELDS',
]
