"""
旋轉向量實驗

輸入為 2 維單位向量，深度 p 的目標是輸入旋轉 ω(q − p) 的結果，
frames 個等距深度都有監督。真正的動態 ż = ω·[[0, −1], [1, 0]] z 與 p 無關，
所以共用參數的模型可以往 p_min 以外外插。
"""

import numpy as np

from ..config_module import RotvecTask, RunConfig
from ..core import DepthGrid, LayerParams, mse_cost
from ..dynamics import MlpDynamics
from ..train import LrSchedule, Sample, TrainConfig
from .common import Extrapolation, TaskSetup


def rotate(x: np.ndarray, angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([c * x[0] - s * x[1], s * x[0] + c * x[1]])


def default_config() -> RunConfig:
    return RunConfig(
        task=RotvecTask(),
        train=TrainConfig(
            mode="through_system",
            optimizer="adam",
            learning_rate=0.01,
            epochs=500,
            batch_size=4,
            parameter_sharing="shared",
            scheme="cropped",
            lr_schedule=LrSchedule(kind="exp_decay", factor=0.5, step_epochs=30),
            log_interval=25,
        ),
    )


def build(task: RotvecTask, train: TrainConfig, seed: int) -> TaskSetup:
    rng = np.random.default_rng(seed)
    grid = DepthGrid.uniform(task.p_min, task.q, task.frames - 1)
    q = grid.terminal
    model = MlpDynamics([2, task.hidden, 2])
    layers = LayerParams.broadcast(model.init_params(rng), grid.layers, train.parameter_sharing)

    def target_fn(x, p):
        return rotate(x, task.omega * (q - p))

    angles = rng.uniform(0.0, 2.0 * np.pi, size=task.samples)
    dataset = []
    for angle in angles:
        x = np.array([np.cos(angle), np.sin(angle)])
        dataset.append(Sample(x, {k: target_fn(x, float(p)) for k, p in enumerate(grid.points)}))

    extra = [p for p in task.extrapolate if grid.index_of(p) is None]
    ext_grid = DepthGrid(np.sort(np.concatenate([grid.points, extra])))
    extrapolation = Extrapolation(grid=ext_grid, inputs=[s.x for s in dataset], target_fn=target_fn)
    return TaskSetup(name="rotvec", model=model, layers=layers, grid=grid, dataset=dataset,
                     cost=mse_cost(2), extrapolation=extrapolation)
