"""
Train 模組 - 訓練設定、最佳化器、參數梯度與訓練迴圈
"""

from .config import TrainConfig, LrSchedule, TRAIN_MODES, OPTIMIZERS, SHARING_MODES, LR_SCHEDULES
from .optim import Optimizer, SGD, Adam, make_optimizer
from .gradient import Sample, sample_loss, grad_through_system, grad_adjoint_update
from .runner import BatchRunner
from .loop import EpochReport, TrainResult, evaluate_sample, sample_bundles, train_loop, extrapolation_report

__all__ = [
    'TrainConfig',
    'LrSchedule',
    'TRAIN_MODES',
    'OPTIMIZERS',
    'SHARING_MODES',
    'LR_SCHEDULES',
    'Optimizer',
    'SGD',
    'Adam',
    'make_optimizer',
    'Sample',
    'sample_loss',
    'grad_through_system',
    'grad_adjoint_update',
    'BatchRunner',
    'EpochReport',
    'TrainResult',
    'evaluate_sample',
    'sample_bundles',
    'train_loop',
    'extrapolation_report',
]
