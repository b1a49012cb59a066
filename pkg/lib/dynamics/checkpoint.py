"""
JSON checkpoint：模型描述 + 每層攤平的 θ (row-major)
"""

import json
import logging
import os
from typing import Optional, Tuple

from ..core import InImNetError, LayerParams, DynamicsModel
from .linear import LinearParamDynamics, ScalarControlDynamics
from .mlp import MlpDynamics

logger = logging.getLogger("InImNet")


def describe_model(model: DynamicsModel) -> dict:
    if isinstance(model, MlpDynamics):
        return model.describe()
    if isinstance(model, LinearParamDynamics):
        return {"type": "linear_param", "state_dim": model.state_dim}
    if isinstance(model, ScalarControlDynamics):
        return {"type": "scalar_control", "state_dim": model.state_dim}
    raise InImNetError(f"model {type(model).__name__} has no trainable checkpoint form")


def build_model(spec: dict) -> DynamicsModel:
    kind = spec.get("type")
    if kind == "mlp":
        return MlpDynamics(spec["sizes"], time_feature=spec.get("time_feature", False))
    if kind == "linear_param":
        return LinearParamDynamics(spec["state_dim"])
    if kind == "scalar_control":
        return ScalarControlDynamics(spec["state_dim"])
    raise InImNetError(f"unknown model type '{kind}' in checkpoint")


def save_checkpoint(path: str, model: DynamicsModel, layers: LayerParams, extra: Optional[dict] = None) -> None:
    if layers.sharing == "shared":
        theta = [layers.values.tolist()]
    else:
        theta = [row.tolist() for row in layers.values]
    payload = {
        "model": describe_model(model),
        "sharing": layers.sharing,
        "theta": theta,
    }
    if extra:
        payload.update(extra)
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2)
    logger.info(f"Checkpoint saved to {path}")


def load_checkpoint(path: str) -> Tuple[DynamicsModel, LayerParams, dict]:
    with open(path, "r", encoding="utf-8") as f:
        payload = json.load(f)
    model = build_model(payload["model"])
    sharing = payload.get("sharing", "shared")
    theta = payload["theta"]
    layers = LayerParams.shared(theta[0]) if sharing == "shared" else LayerParams.per_layer(theta)
    if layers.param_count != model.param_count:
        raise InImNetError(
            f"checkpoint has {layers.param_count} parameters per layer, model expects {model.param_count}"
        )
    extra = {k: v for k, v in payload.items() if k not in ("model", "sharing", "theta")}
    return model, layers, extra
