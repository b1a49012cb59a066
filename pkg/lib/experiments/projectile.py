"""
拋體實驗：以 MLP 從端點觀測學習 ż = [v, −g]

資料只有 z(q; p_k, x)，不同 p_k 代表從不同水平位置出發的拋體。
預設以 adjoint_update (time-series Λθ) 訓練。
"""

import numpy as np

from ..config_module import ProjectileTask, RunConfig
from ..core import DepthGrid, LayerParams, mse_cost
from ..dynamics import MlpDynamics, projectile_closed_form
from ..train import Sample, TrainConfig
from .common import Extrapolation, TaskSetup


def default_config() -> RunConfig:
    return RunConfig(
        task=ProjectileTask(),
        train=TrainConfig(
            mode="adjoint_update",
            optimizer="sgd",
            learning_rate=1e-3,
            epochs=10,
            batch_size=1,
            parameter_sharing="shared",
            scheme="cropped",
            substeps=4,
        ),
    )


def build(task: ProjectileTask, train: TrainConfig, seed: int) -> TaskSetup:
    rng = np.random.default_rng(seed)
    grid = DepthGrid(task.depths)
    q = grid.terminal
    model = MlpDynamics([2, task.hidden, 2])
    layers = LayerParams.broadcast(model.init_params(rng), grid.layers, train.parameter_sharing)

    def target_fn(x, p):
        return projectile_closed_form(task.gravity, x, p, q)

    dataset = []
    for _ in range(task.samples):
        x = np.array([rng.uniform(task.h0_min, task.h0_max), task.v0])
        targets = {k: target_fn(x, float(p)) for k, p in enumerate(grid.points)}
        dataset.append(Sample(x, targets))

    step = float(grid.steps[0])
    ext_grid = DepthGrid(np.concatenate([[grid.p_min - 2 * step, grid.p_min - step], grid.points]))
    extrapolation = Extrapolation(grid=ext_grid, inputs=[s.x for s in dataset], target_fn=target_fn)
    return TaskSetup(name="projectile", model=model, layers=layers, grid=grid, dataset=dataset,
                     cost=mse_cost(2), extrapolation=extrapolation)
