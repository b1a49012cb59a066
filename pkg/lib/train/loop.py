"""
訓練迴圈與深度外插報表
"""

import logging
import threading
import time
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from ..adjoint import backward_imbed, backward_timeseries, optimality_residual
from ..core import (
    DepthGrid,
    DivergedTraining,
    DynamicsModel,
    InImNetError,
    JacobianScheme,
    LayerParams,
    LossSpec,
    NonFinite,
    PointCost,
    SharingRequired,
)
from ..propagate import forward_imbed
from ..recorder import Recorder
from .config import TrainConfig
from .gradient import Sample, grad_adjoint_update, grad_through_system, sample_loss
from .optim import make_optimizer
from .runner import BatchRunner

logger = logging.getLogger("InImNet")


@dataclass
class EpochReport:
    epoch: int
    loss: float                 # 平均訓練目標函數 (所有觀測的成本總和)
    profile: np.ndarray         # 每個深度的平均成本
    residual: float
    seconds: float

    @property
    def p_min_loss(self) -> float:
        return float(self.profile[0])


@dataclass
class TrainResult:
    layers: LayerParams
    recorder: Recorder
    reports: List[EpochReport]
    stopped: bool = False

    @property
    def final_loss(self) -> float:
        return self.reports[-1].loss


def _depth_costs(outputs: np.ndarray, sample: Sample, cost: PointCost) -> np.ndarray:
    """單一目標時每個深度都和它比較；time-series 時只比較有觀測的深度"""
    out = np.full(outputs.shape[0], np.nan)
    if not sample.is_series:
        y = sample.targets[0]
        for i in range(outputs.shape[0]):
            out[i] = float(cost.value(outputs[i], y))
        return out
    for idx, y in sample.targets.items():
        out[idx] = float(cost.value(outputs[idx], y))
    return out


def sample_bundles(model: DynamicsModel, layers: LayerParams, grid: DepthGrid, sample: Sample,
                   cost: PointCost, scheme: JacobianScheme, substeps: int = 1):
    """
    單筆資料的 forward bundle、每深度成本、adjoint bundle 與每深度 optimality residual

    模型沒有參數時 adjoint 與 residual 為 None；time-series 資料搭配 exact scheme 時改用 cropped。
    """
    eval_scheme = scheme if scheme.mode != "exact" or not sample.is_series else JacobianScheme()
    bundle = forward_imbed(model, layers, sample.x, grid, eval_scheme, substeps)
    profile = _depth_costs(bundle.outputs, sample, cost)
    if not (model.param_count and model.has_d_dtheta):
        return bundle, profile, None, None
    if sample.is_series:
        adj = backward_timeseries(model, layers, grid, sample.x, sample.observations(grid), cost,
                                  eval_scheme, substeps, with_theta=False)
    else:
        adj = backward_imbed(model, layers, grid, sample.x, LossSpec.from_cost(cost, sample.targets[0]),
                             eval_scheme, substeps)
    # 沒有 running loss，∇_θR = 0
    terminal_only = LossSpec.from_cost(cost, sample.targets[min(sample.targets)])
    residual = optimality_residual(model, layers, grid, sample.x, terminal_only, adj)
    return bundle, profile, adj, residual


def evaluate_sample(model: DynamicsModel, layers: LayerParams, grid: DepthGrid, sample: Sample,
                    cost: PointCost, scheme: JacobianScheme, substeps: int = 1):
    """(目標函數, 每深度成本, p_min 的 optimality residual)"""
    bundle, profile, _, residual = sample_bundles(model, layers, grid, sample, cost, scheme, substeps)
    loss = sample_loss(bundle.outputs, sample, cost)
    return loss, profile, float(residual[0]) if residual is not None else float("nan")


def _mean_profile(profiles: List[np.ndarray]) -> np.ndarray:
    stacked = np.vstack(profiles)
    counts = np.sum(~np.isnan(stacked), axis=0)
    sums = np.nansum(stacked, axis=0)
    out = np.full(stacked.shape[1], np.nan)
    out[counts > 0] = sums[counts > 0] / counts[counts > 0]
    return out


def train_loop(model: DynamicsModel, layers: LayerParams, grid: DepthGrid, dataset: Sequence[Sample],
               cost: PointCost, config: TrainConfig, recorder: Optional[Recorder] = None,
               stop_flag: Optional[threading.Event] = None,
               on_epoch: Optional[Callable[[EpochReport], None]] = None) -> TrainResult:
    """
    以 TrainConfig 訓練層參數

    每個 epoch 以 default_rng(seed) 打亂資料，批次內每筆資料交給 worker 執行緒，
    結果依資料順序加總後平均。epoch 0 記錄未訓練的模型。

    Raises:
        DivergedTraining: loss 或梯度出現 NaN / Inf
        InImNetError: 設定不合法
    """
    problems = config.validate()
    if problems:
        raise InImNetError("; ".join(problems))
    if not dataset:
        raise InImNetError("training needs at least one sample")
    if config.mode == "adjoint_update" and layers.sharing != "shared":
        raise SharingRequired("adjoint_update requires shared parameters")

    scheme = config.jacobian_scheme()
    rng = np.random.default_rng(config.seed)
    optimizer = make_optimizer(config.optimizer)
    stop_flag = stop_flag or threading.Event()
    runner = BatchRunner(config.worker_count(), stop_flag)
    # 評估一定要跑完，不受 stop flag 影響
    evaluator = BatchRunner(config.worker_count())
    recorder = recorder or Recorder()
    reports: List[EpochReport] = []

    def evaluate(epoch: int, current: LayerParams, seconds: float) -> EpochReport:
        try:
            rows = evaluator.map(
                lambda s: evaluate_sample(model, current, grid, s, cost, scheme, config.substeps), dataset
            )
        except NonFinite as e:
            raise DivergedTraining(f"evaluation diverged at epoch {epoch}: {e}") from e
        loss = sum(r[0] for r in rows) / len(rows)
        profile = _mean_profile([r[1] for r in rows])
        residuals = [r[2] for r in rows if np.isfinite(r[2])]
        residual = sum(residuals) / len(residuals) if residuals else float("nan")
        if not np.isfinite(loss):
            raise DivergedTraining(f"loss became non-finite at epoch {epoch}")
        report = EpochReport(epoch=epoch, loss=float(loss), profile=profile, residual=float(residual), seconds=seconds)
        recorder.record_epoch(epoch, grid.points, profile, residual,
                              seconds if config.record_timing else float("nan"), report.p_min_loss)
        reports.append(report)
        if on_epoch is not None:
            on_epoch(report)
        return report

    def per_sample(current: LayerParams):
        if config.mode == "through_system":
            return lambda s: grad_through_system(model, current, grid, [s], cost, scheme, config.substeps)
        return lambda s: grad_adjoint_update(model, current, grid, s, cost, scheme, config.substeps)

    report = evaluate(0, layers, 0.0)
    logger.info(f"Epoch 0: loss={report.loss:.6g}")

    current = layers
    stopped = False
    for epoch in range(1, config.epochs + 1):
        start = time.perf_counter()
        order = rng.permutation(len(dataset))
        lr = config.lr_schedule.rate(config.learning_rate, epoch - 1)
        for b in range(0, len(order), config.batch_size):
            if stop_flag.is_set():
                stopped = True
                break
            batch = [dataset[k] for k in order[b:b + config.batch_size]]
            try:
                results = runner.map(per_sample(current), batch)
            except NonFinite as e:
                raise DivergedTraining(f"training diverged at epoch {epoch}: {e}") from e
            if stop_flag.is_set():
                stopped = True
                break
            grad = np.zeros_like(current.values)
            batch_loss = 0.0
            for loss, g in results:
                batch_loss += loss
                grad += g
            grad /= len(results)
            if not (np.isfinite(batch_loss) and np.all(np.isfinite(grad))):
                raise DivergedTraining(f"non-finite loss or gradient at epoch {epoch}")
            current = current.with_flat(optimizer.step(current.flat(), grad.reshape(-1), lr))
        if stopped:
            logger.warning(f"Training stopped during epoch {epoch}")
            break
        report = evaluate(epoch, current, time.perf_counter() - start)
        if epoch % config.log_interval == 0 or epoch == config.epochs:
            logger.info(f"Epoch {epoch}/{config.epochs}: loss={report.loss:.6g} residual={report.residual:.3g} lr={lr:.3g}")
        else:
            logger.debug(f"Epoch {epoch}: loss={report.loss:.6g}")

    return TrainResult(layers=current, recorder=recorder, reports=reports, stopped=stopped)


def extrapolation_report(model: DynamicsModel, layers: LayerParams, grid_extended: DepthGrid,
                         samples: Sequence[np.ndarray], target_fn: Callable[[np.ndarray, float], np.ndarray],
                         cost: PointCost, scheme: Optional[JacobianScheme] = None,
                         substeps: int = 1) -> List[Dict]:
    """
    以共用 θ 在更深 (或更淺) 的網格上評估每個深度的平均成本

    Raises:
        SharingRequired: per-layer 參數無法延伸到訓練網格以外
    """
    if layers.sharing != "shared":
        raise SharingRequired("depth extrapolation needs shared parameters")
    scheme = scheme or JacobianScheme()
    totals = np.zeros(grid_extended.size)
    for x in samples:
        bundle = forward_imbed(model, layers, x, grid_extended, scheme, substeps)
        for i, p in enumerate(grid_extended.points):
            totals[i] += float(cost.value(bundle.outputs[i], target_fn(x, float(p))))
    count = max(len(samples), 1)
    return [{"depth": float(p), "loss": float(totals[i] / count)} for i, p in enumerate(grid_extended.points)]
