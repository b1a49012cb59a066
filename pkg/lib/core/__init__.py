"""
核心模組 - 各模組共用的型別、模型介面、損失與錯誤
"""

from .errors import (
    InImNetError,
    NonMonotoneGrid,
    TooFewPoints,
    NonFiniteEntry,
    NonFinite,
    LengthMismatch,
    ParamLengthMismatch,
    SchemeUnavailable,
    AssumptionViolated,
    ObservationOffGrid,
    DivergedTraining,
    SharingRequired,
    UnknownSuite,
    UnknownExperiment,
    ConfigParseError,
)
from .types import (
    as_state,
    as_params,
    validate_grid,
    DepthGrid,
    RefinedGrid,
    LayerParams,
    JacobianScheme,
    StateBundle,
    AdjointBundle,
    constant_schedule,
    SCHEME_MODES,
)
from .model import DynamicsModel, ContractReport, phi, check_partials, central_jacobian
from .loss import PointCost, LossSpec, mse_cost, squared_cost, check_loss_gradient, COSTS

__all__ = [
    'InImNetError', 'NonMonotoneGrid', 'TooFewPoints', 'NonFiniteEntry', 'NonFinite',
    'LengthMismatch', 'ParamLengthMismatch', 'SchemeUnavailable', 'AssumptionViolated',
    'ObservationOffGrid', 'DivergedTraining', 'SharingRequired', 'UnknownSuite',
    'UnknownExperiment', 'ConfigParseError',
    'as_state', 'as_params', 'validate_grid', 'DepthGrid', 'RefinedGrid', 'LayerParams',
    'JacobianScheme', 'StateBundle', 'AdjointBundle', 'constant_schedule', 'SCHEME_MODES',
    'DynamicsModel', 'ContractReport', 'phi', 'check_partials', 'central_jacobian',
    'PointCost', 'LossSpec', 'mse_cost', 'squared_cost', 'check_loss_gradient', 'COSTS',
]
