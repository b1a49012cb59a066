"""
Experiments 模組 - 拋體與旋轉向量兩個桌面規模的端到端實驗
"""

import threading
from typing import Optional

from ..config_module import RunConfig
from ..core import UnknownExperiment
from ..recorder import Recorder
from . import projectile, rotvec
from .common import Extrapolation, TaskSetup, profile_records, run_task

EXPERIMENTS = {
    "projectile": projectile,
    "rotvec": rotvec,
}


def build_task(config: RunConfig, seed: int) -> TaskSetup:
    name = config.task.name
    if name not in EXPERIMENTS:
        raise UnknownExperiment(f"unknown task '{name}'. Available: {', '.join(EXPERIMENTS)}")
    return EXPERIMENTS[name].build(config.task, config.train, seed)


def default_config(name: str) -> RunConfig:
    if name not in EXPERIMENTS:
        raise UnknownExperiment(f"unknown experiment '{name}'. Available: {', '.join(EXPERIMENTS)}")
    return EXPERIMENTS[name].default_config()


def run_experiment(name: str, seed: int, out_dir: str, epochs: Optional[int] = None,
                   stop_flag: Optional[threading.Event] = None, recorder: Optional[Recorder] = None) -> dict:
    """資料生成 → 訓練 → 評估 → 輸出"""
    config = default_config(name)
    config.train.seed = seed
    if epochs is not None:
        config.train.epochs = epochs
    setup = build_task(config, seed)
    return run_task(setup, config.train, out_dir, seed, stop_flag=stop_flag, recorder=recorder)


__all__ = [
    'EXPERIMENTS',
    'Extrapolation',
    'TaskSetup',
    'build_task',
    'default_config',
    'profile_records',
    'run_experiment',
    'run_task',
]
