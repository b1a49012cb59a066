"""
實驗共用流程：訓練 → 評估 → 輸出 CSV / JSON
"""

import logging
import os
import threading
import time
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np

from ..adjoint import save_adjoint_bundle_csv
from ..core import DepthGrid, DynamicsModel, LayerParams, PointCost
from ..dynamics import save_checkpoint
from ..propagate import save_state_bundle_csv
from ..recorder import Recorder, write_csv, write_json
from ..train import Sample, TrainConfig, TrainResult, extrapolation_report, sample_bundles, train_loop

logger = logging.getLogger("InImNet")


@dataclass
class Extrapolation:
    grid: DepthGrid
    inputs: List[np.ndarray]
    target_fn: Callable[[np.ndarray, float], np.ndarray]


@dataclass
class TaskSetup:
    name: str
    model: DynamicsModel
    layers: LayerParams
    grid: DepthGrid
    dataset: Sequence[Sample]
    cost: PointCost
    extrapolation: Optional[Extrapolation] = None


def profile_records(result: TrainResult, grid: DepthGrid) -> List[dict]:
    """epoch 0 與最後一個 epoch 的每深度成本"""
    snapshots = [result.reports[0]]
    if len(result.reports) > 1:
        snapshots.append(result.reports[-1])
    rows = []
    for report in snapshots:
        for depth, loss in zip(grid.points, report.profile):
            rows.append({"epoch": report.epoch, "depth": float(depth), "loss": float(loss)})
    return rows


def run_task(setup: TaskSetup, train: TrainConfig, out_dir: str, seed: int,
             stop_flag: Optional[threading.Event] = None, write_checkpoint: bool = True,
             recorder: Optional[Recorder] = None) -> dict:
    """
    訓練並把結果寫到 out_dir

    輸出：history.csv、depth_profile.csv、checkpoint.json、
    第一筆資料的 bundle.csv / adjoint.csv (繪圖用)、
    extrapolation.csv (共用參數且有外插設定時) 與 summary.json

    Returns:
        summary dict (同 summary.json 內容)
    """
    logger.info(f"Task '{setup.name}': {len(setup.dataset)} samples, {setup.grid.size} depths, "
                f"{setup.model.param_count} parameters per layer ({setup.layers.sharing})")
    start = time.perf_counter()
    recorder = recorder or Recorder()
    recorder.csv_path = os.path.join(out_dir, "history.csv")
    result = train_loop(setup.model, setup.layers, setup.grid, setup.dataset, setup.cost, train,
                        recorder=recorder, stop_flag=stop_flag)
    runtime = time.perf_counter() - start

    os.makedirs(out_dir, exist_ok=True)
    recorder.save_csv()
    write_csv(os.path.join(out_dir, "depth_profile.csv"), profile_records(result, setup.grid),
              fieldnames=["epoch", "depth", "loss"])
    if write_checkpoint:
        save_checkpoint(os.path.join(out_dir, "checkpoint.json"), setup.model, result.layers,
                        extra={"seed": seed, "task": setup.name, "depths": setup.grid.points.tolist()})

    sample = setup.dataset[0]
    bundle, profile, adjoint, residual = sample_bundles(setup.model, result.layers, setup.grid, sample, setup.cost,
                                                        train.jacobian_scheme(), train.substeps)
    save_state_bundle_csv(os.path.join(out_dir, "bundle.csv"), bundle, profile)
    if adjoint is not None:
        save_adjoint_bundle_csv(os.path.join(out_dir, "adjoint.csv"), adjoint, residual)

    extrapolation = None
    if setup.extrapolation is not None and result.layers.sharing == "shared":
        ext = setup.extrapolation
        extrapolation = extrapolation_report(setup.model, result.layers, ext.grid, ext.inputs, ext.target_fn,
                                             setup.cost, train.jacobian_scheme(), train.substeps)
        write_csv(os.path.join(out_dir, "extrapolation.csv"), extrapolation, fieldnames=["depth", "loss"])

    first, last = result.reports[0], result.reports[-1]
    summary = {
        "task": setup.name,
        "seed": seed,
        "epochs": last.epoch,
        "stopped": result.stopped,
        "initial_loss": first.loss,
        "final_loss": last.loss,
        "initial_p_min_loss": first.p_min_loss,
        "final_p_min_loss": last.p_min_loss,
        "final_residual": last.residual,
        "runtime_seconds": runtime,
        "depth_table": [{"depth": float(p), "loss": float(v)} for p, v in zip(setup.grid.points, last.profile)],
    }
    if extrapolation is not None:
        summary["extrapolation"] = extrapolation
    write_json(os.path.join(out_dir, "summary.json"), _json_safe(summary))
    logger.info(f"Task '{setup.name}' finished in {runtime:.1f}s: loss {first.loss:.6g} -> {last.loss:.6g}")
    return summary


def _json_safe(value):
    """NaN / Inf 轉成 None，使輸出為合法 JSON"""
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_json_safe(v) for v in value]
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value
