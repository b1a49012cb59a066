"""
訓練設定的資料模型
"""

import os
from dataclasses import dataclass, field
from typing import List, Literal, Optional, Tuple

from ..core import JacobianScheme, SCHEME_MODES

TrainMode = Literal["through_system", "adjoint_update"]
OptimizerName = Literal["sgd", "adam"]

TRAIN_MODES = ("through_system", "adjoint_update")
OPTIMIZERS = ("sgd", "adam")
SHARING_MODES = ("per_layer", "shared")
LR_SCHEDULES = ("constant", "exp_decay")


@dataclass
class LrSchedule:
    """
    學習率排程

    - constant: 固定 base
    - exp_decay: base · factor^(epoch // step_epochs)
    """
    kind: Literal["constant", "exp_decay"] = "constant"
    factor: float = 1.0
    step_epochs: int = 1

    def rate(self, base: float, epoch: int) -> float:
        if self.kind == "constant":
            return base
        return base * self.factor ** (int(epoch) // self.step_epochs)

    def validate(self) -> List[str]:
        errors = []
        if self.kind not in LR_SCHEDULES:
            errors.append(f"lr_schedule must be one of {', '.join(LR_SCHEDULES)}, got '{self.kind}'")
        if self.kind == "exp_decay":
            if not (0.0 < self.factor <= 1.0):
                errors.append(f"lr_schedule factor must be in (0, 1], got {self.factor}")
            if self.step_epochs < 1:
                errors.append(f"lr_schedule step_epochs must be >= 1, got {self.step_epochs}")
        return errors


@dataclass
class TrainConfig:
    mode: TrainMode = "through_system"
    optimizer: OptimizerName = "sgd"
    learning_rate: float = 1e-3
    epochs: int = 10
    batch_size: int = 1
    parameter_sharing: Literal["per_layer", "shared"] = "shared"
    scheme: str = "cropped"
    deltas: Optional[Tuple[float, ...]] = None
    newton_shift_sign: float = 1.0
    implicit_adjoint: bool = False
    lr_schedule: LrSchedule = field(default_factory=LrSchedule)
    seed: int = 0
    substeps: int = 1
    # 0 代表依 INIMNET_THREADS 或 CPU 數量決定
    threads: int = 0
    log_interval: int = 1
    # False 時 history 的 seconds 欄為 nan，輸出可逐位元重現
    record_timing: bool = False

    def validate(self) -> List[str]:
        """回傳所有問題；空 list 代表設定合法"""
        errors = []
        if self.mode not in TRAIN_MODES:
            errors.append(f"mode must be one of {', '.join(TRAIN_MODES)}, got '{self.mode}'")
        if self.optimizer not in OPTIMIZERS:
            errors.append(f"optimizer must be one of {', '.join(OPTIMIZERS)}, got '{self.optimizer}'")
        if not (isinstance(self.learning_rate, (int, float)) and self.learning_rate > 0):
            errors.append(f"learning_rate must be > 0, got {self.learning_rate}")
        if not (isinstance(self.epochs, int) and self.epochs >= 1):
            errors.append(f"epochs must be an integer >= 1, got {self.epochs}")
        if not (isinstance(self.batch_size, int) and self.batch_size >= 1):
            errors.append(f"batch_size must be an integer >= 1, got {self.batch_size}")
        if self.parameter_sharing not in SHARING_MODES:
            errors.append(f"parameter_sharing must be one of {', '.join(SHARING_MODES)}, got '{self.parameter_sharing}'")
        if self.scheme not in SCHEME_MODES:
            errors.append(f"scheme must be one of {', '.join(SCHEME_MODES)}, got '{self.scheme}'")
        if self.mode == "adjoint_update" and self.parameter_sharing != "shared":
            errors.append("adjoint_update requires parameter_sharing: shared")
        if not (isinstance(self.substeps, int) and self.substeps >= 1):
            errors.append(f"substeps must be an integer >= 1, got {self.substeps}")
        if not (isinstance(self.threads, int) and self.threads >= 0):
            errors.append(f"threads must be an integer >= 0, got {self.threads}")
        if not (isinstance(self.log_interval, int) and self.log_interval >= 1):
            errors.append(f"log_interval must be an integer >= 1, got {self.log_interval}")
        if self.deltas is not None and any(d <= 0 for d in self.deltas):
            errors.append(f"deltas must be positive, got {list(self.deltas)}")
        errors.extend(self.lr_schedule.validate())
        return errors

    def jacobian_scheme(self) -> JacobianScheme:
        return JacobianScheme(
            mode=self.scheme,
            deltas=self.deltas,
            newton_shift_sign=self.newton_shift_sign,
            implicit_adjoint=self.implicit_adjoint,
        )

    def worker_count(self) -> int:
        """threads 設定、INIMNET_THREADS 與 CPU 數量三者取最小"""
        limit = os.cpu_count() or 1
        env = os.environ.get("INIMNET_THREADS")
        if env:
            try:
                limit = min(limit, max(1, int(env)))
            except ValueError:
                pass
        if self.threads > 0:
            limit = min(limit, self.threads)
        return max(1, limit)
