"""
配置文件解析器
"""

from dataclasses import fields
from typing import Dict, List, Tuple

import yaml

from ..core import ConfigParseError
from ..train import LrSchedule, TrainConfig
from .models import TASK_NAMES, ProjectileTask, RotvecTask, RunConfig

TASK_MODELS = {"projectile": ProjectileTask, "rotvec": RotvecTask}

# 欄位型別：YAML 1.1 會把 1e-3 讀成字串，所以數值欄位一律再轉一次
_FLOAT_KEYS = {"learning_rate", "newton_shift_sign", "gravity", "v0", "h0_min", "h0_max",
               "p_min", "q", "omega", "factor"}
_INT_KEYS = {"epochs", "batch_size", "seed", "substeps", "threads", "log_interval",
             "samples", "frames", "hidden", "step_epochs"}
_BOOL_KEYS = {"implicit_adjoint", "record_timing"}
_FLOAT_LIST_KEYS = {"deltas", "depths", "extrapolate"}


def _coerce(key: str, value, errors: List[str], section: str):
    where = f"{section}.{key}"
    try:
        if key in _FLOAT_KEYS:
            if isinstance(value, bool):
                raise ValueError
            return float(value)
        if key in _INT_KEYS:
            if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
                raise ValueError
            return int(value)
        if key in _BOOL_KEYS:
            if not isinstance(value, bool):
                raise ValueError
            return value
        if key in _FLOAT_LIST_KEYS:
            if value is None:
                return None
            items = value if isinstance(value, (list, tuple)) else [value]
            return [float(v) for v in items]
    except (TypeError, ValueError):
        errors.append(f"{where}: invalid value {value!r}")
        return None
    return value


def _section(raw: Dict, name: str, allowed: set, errors: List[str]) -> Dict:
    body = raw.get(name)
    if body is None:
        errors.append(f"missing section '{name}:'")
        return {}
    if not isinstance(body, dict):
        errors.append(f"section '{name}:' must be a mapping")
        return {}
    unknown = sorted(set(body) - allowed)
    for key in unknown:
        errors.append(f"{name}.{key}: unknown key")
    return {key: _coerce(key, value, errors, name) for key, value in body.items() if key in allowed}


def _lr_schedule(value, errors: List[str]) -> LrSchedule:
    if value is None or value == "constant":
        return LrSchedule()
    if isinstance(value, str):
        errors.append(f"train.lr_schedule: unknown schedule '{value}'")
        return LrSchedule()
    if not isinstance(value, dict):
        errors.append("train.lr_schedule must be 'constant' or a mapping with kind/factor/step_epochs")
        return LrSchedule()
    allowed = {f.name for f in fields(LrSchedule)}
    for key in sorted(set(value) - allowed):
        errors.append(f"train.lr_schedule.{key}: unknown key")
    kwargs = {k: _coerce(k, v, errors, "train.lr_schedule") for k, v in value.items() if k in allowed}
    return LrSchedule(**{k: v for k, v in kwargs.items() if v is not None})


def parse_config_dict(raw) -> RunConfig:
    """
    由已載入的 dict 建立 RunConfig

    Raises:
        ConfigParseError: 列出所有問題，以 "; " 串接
    """
    errors: List[str] = []
    if not isinstance(raw, dict):
        raise ConfigParseError("config must be a mapping with 'task:' and 'train:' sections")
    for key in sorted(set(raw) - {"task", "train"}):
        errors.append(f"{key}: unknown section")

    task_raw = raw.get("task") if isinstance(raw.get("task"), dict) else {}
    task_name = task_raw.get("name")
    task_model = TASK_MODELS.get(task_name)
    if task_model is None:
        errors.append(f"task.name must be one of {', '.join(TASK_NAMES)}, got {task_name!r}")
        task_model = ProjectileTask
    task_kwargs = _section(raw, "task", {f.name for f in fields(task_model)}, errors)
    task_kwargs.pop("name", None)

    train_kwargs = _section(raw, "train", {f.name for f in fields(TrainConfig)}, errors)
    train_kwargs["lr_schedule"] = _lr_schedule(train_kwargs.get("lr_schedule"), errors)
    if train_kwargs.get("deltas") is not None:
        train_kwargs["deltas"] = tuple(train_kwargs["deltas"])

    task = task_model(**{k: v for k, v in task_kwargs.items() if v is not None})
    train = TrainConfig(**{k: v for k, v in train_kwargs.items() if v is not None or k == "deltas"})
    errors.extend(task.validate())
    errors.extend(train.validate())
    if errors:
        raise ConfigParseError("; ".join(errors))
    return RunConfig(task=task, train=train)


def parse_config(path: str = "config/projectile.yaml") -> RunConfig:
    """
    解析配置文件

    Args:
        path: 配置文件路徑（相對或絕對路徑）

    Returns:
        RunConfig: 解析後的配置對象

    Raises:
        FileNotFoundError / OSError: 檔案無法讀取
        ConfigParseError: YAML 格式錯誤或設定值不合法
    """
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigParseError(f"配置文件 {path} 格式錯誤: {e}")
    return parse_config_dict(raw)
