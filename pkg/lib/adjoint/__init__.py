"""
Adjoint 模組 - 直接 Euler–Lagrange oracle 與 imbedded backward pass
"""

from .direct import DirectAdjoint, adjoint_direct
from .fields import AdjointField, TimeSeriesField
from .imbed import (
    backward_imbed,
    backward_augmented,
    backward_timeseries,
    map_observations,
    optimality_residual,
)
from .dump import save_adjoint_bundle_csv, adjoint_bundle_records

__all__ = [
    'DirectAdjoint',
    'adjoint_direct',
    'AdjointField',
    'TimeSeriesField',
    'backward_imbed',
    'backward_augmented',
    'backward_timeseries',
    'map_observations',
    'optimality_residual',
    'save_adjoint_bundle_csv',
    'adjoint_bundle_records',
]
