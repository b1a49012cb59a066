"""
動態模組 - 內建 training function 與解析解 oracle
"""

from .linear import LinearDynamics, LinearParamDynamics, ScalarControlDynamics
from .projectile import ProjectileDynamics, GRAVITY
from .mlp import MlpDynamics, mlp_eval
from .closed_form import linear_closed_form, projectile_closed_form
from .checkpoint import save_checkpoint, load_checkpoint, build_model, describe_model

__all__ = [
    'LinearDynamics',
    'LinearParamDynamics',
    'ScalarControlDynamics',
    'ProjectileDynamics',
    'GRAVITY',
    'MlpDynamics',
    'mlp_eval',
    'linear_closed_form',
    'projectile_closed_form',
    'save_checkpoint',
    'load_checkpoint',
    'build_model',
    'describe_model',
]
