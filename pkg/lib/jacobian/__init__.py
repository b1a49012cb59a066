"""
Jacobian 模組 - ∇_x 的精確傳遞與三種近似
"""

from .steps import exact_sensitivity_step, cropped_jacobian_step, field_jacobian_step
from .difference import CoStateBundle, symmetric_diff_bundle, newton_diff_bundle
from .oracle import OracleSweep, exact_sweep

__all__ = [
    'exact_sensitivity_step',
    'cropped_jacobian_step',
    'field_jacobian_step',
    'CoStateBundle',
    'symmetric_diff_bundle',
    'newton_diff_bundle',
    'OracleSweep',
    'exact_sweep',
]
