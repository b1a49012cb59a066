"""
配置模組 - 處理配置文件解析和數據結構定義
"""

from .models import ProjectileTask, RotvecTask, RunConfig, TaskConfig, TASK_NAMES
from .parser import parse_config, parse_config_dict
from .display import display_config

__all__ = [
    'ProjectileTask',
    'RotvecTask',
    'RunConfig',
    'TaskConfig',
    'TASK_NAMES',
    'parse_config',
    'parse_config_dict',
    'display_config',
]
