"""
配置數據模型定義
"""

from dataclasses import dataclass, field
from typing import List, Literal, Union

from ..train import TrainConfig

TASK_NAMES = ("projectile", "rotvec")


@dataclass
class ProjectileTask:
    """
    拋體端點觀測

    每筆資料的輸入 x = [h0, v0]，h0 ~ U[h0_min, h0_max]、v0 固定；
    深度 p_k 的目標為 z(q; p_k, x) 的解析解。
    """
    name: Literal["projectile"] = "projectile"
    samples: int = 4
    gravity: float = 9.81
    v0: float = 5.0
    h0_min: float = 0.0
    h0_max: float = 10.0
    # 回報深度；最後一點即 q
    depths: List[float] = field(default_factory=lambda: [0.0, 0.25, 0.5, 0.75, 1.0])
    hidden: int = 8

    def validate(self) -> List[str]:
        errors = []
        if self.samples < 1:
            errors.append(f"task.samples must be >= 1, got {self.samples}")
        if not self.gravity > 0:
            errors.append(f"task.gravity must be > 0, got {self.gravity}")
        if not self.h0_min <= self.h0_max:
            errors.append(f"task.h0_min ({self.h0_min}) must not exceed task.h0_max ({self.h0_max})")
        if len(self.depths) < 2 or any(b <= a for a, b in zip(self.depths, self.depths[1:])):
            errors.append(f"task.depths must be at least 2 strictly increasing values, got {self.depths}")
        if self.hidden < 1:
            errors.append(f"task.hidden must be >= 1, got {self.hidden}")
        return errors


@dataclass
class RotvecTask:
    """
    旋轉向量

    輸入為單位向量，深度 p 的目標是把輸入旋轉 ω(q − p)；frames 個等距深度都有監督。
    """
    name: Literal["rotvec"] = "rotvec"
    samples: int = 16
    frames: int = 16
    p_min: float = -4.0
    q: float = 0.0
    omega: float = 0.5
    hidden: int = 16
    # 外插評估額外加入的深度
    extrapolate: List[float] = field(default_factory=lambda: [-5.0, -4.5, -3.0])

    def validate(self) -> List[str]:
        errors = []
        if self.samples < 1:
            errors.append(f"task.samples must be >= 1, got {self.samples}")
        if self.frames < 2:
            errors.append(f"task.frames must be >= 2, got {self.frames}")
        if not self.p_min < self.q:
            errors.append(f"task.p_min ({self.p_min}) must be below task.q ({self.q})")
        if self.hidden < 1:
            errors.append(f"task.hidden must be >= 1, got {self.hidden}")
        if any(p > self.q for p in self.extrapolate):
            errors.append(f"task.extrapolate depths must not exceed q = {self.q}")
        return errors


TaskConfig = Union[ProjectileTask, RotvecTask]


@dataclass
class RunConfig:
    task: TaskConfig
    train: TrainConfig
