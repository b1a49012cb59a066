"""
Propagate 模組 - 直接 t 積分 oracle 與 invariant imbedding forward pass
"""

from .direct import Trajectory, integrate_direct, forward_direct, compose_imbedding
from .engine import ImbeddedField, FieldTrace, integrate_field, check_layers
from .imbed import StateField, forward_imbed, depth_profile, theorem1_residual
from .dump import save_state_bundle_csv, state_bundle_records

__all__ = [
    'Trajectory',
    'integrate_direct',
    'forward_direct',
    'compose_imbedding',
    'ImbeddedField',
    'FieldTrace',
    'integrate_field',
    'check_layers',
    'StateField',
    'forward_imbed',
    'depth_profile',
    'theorem1_residual',
    'save_state_bundle_csv',
    'state_bundle_records',
]
