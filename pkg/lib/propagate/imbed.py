"""
Forward imbedded pass：z(q; p_i, x) 從 p = q 的 trivial network 往深處展開
"""

import logging
from typing import Optional, Sequence

import numpy as np

from ..core import (
    DepthGrid,
    DynamicsModel,
    JacobianScheme,
    LayerParams,
    LengthMismatch,
    LossSpec,
    StateBundle,
    as_state,
)
from ..jacobian import exact_sweep
from .engine import ImbeddedField, integrate_field

logger = logging.getLogger("InImNet")


class StateField(ImbeddedField):
    """z(q; p, x)：S = 0，初始值 x，初始 Jacobian I"""

    def __init__(self, model: DynamicsModel):
        super().__init__(model)
        self.dim = model.state_dim

    def initial(self, X, t_q, theta_q):
        return np.array(X, dtype=float)

    def initial_jacobian(self, x, t_q, theta_q):
        return np.eye(x.size)

    def source(self, t, X, theta, Q):
        return np.zeros_like(Q)

    def source_jacobians(self, t, x, theta, Q):
        return np.zeros((self.dim, self.dim)), np.zeros((self.dim, x.size))

    def exact_jacobians(self, layers, fine, x):
        return exact_sweep(self.model, layers, fine, x).jacobians


def forward_imbed(model: DynamicsModel, layers: LayerParams, x, grid: DepthGrid,
                  scheme: Optional[JacobianScheme] = None, substeps: int = 1) -> StateBundle:
    """
    Invariant imbedding forward pass

    z_n = x、J_n = I，往深處每層：
        z_i = z_{i+1} + h_i · J_{i+1} · Φ(p_i, x)，h_i = p_{i+1} − p_i

    Args:
        model: training function f
        layers: 每層的 Ψ(p_i, x)
        x: 不變的輸入
        grid: 回報深度
        scheme: ∇_x z 的估計方式 (預設 cropped)
        substeps: 每個區間的 Euler 子步數

    Returns:
        StateBundle: 每個深度的 z(q; p_i, x) 與 J_i
    """
    x = as_state(x, "x")
    if x.size != model.state_dim:
        raise LengthMismatch(f"input has length {x.size}, model state is {model.state_dim}")
    scheme = scheme or JacobianScheme()
    trace = integrate_field(model, layers, grid, x, StateField(model), scheme, substeps)
    bundle = StateBundle(depths=trace.depths, outputs=trace.values, jacobians=trace.jacobians, inputs=x)
    bundle.check_trivial()
    return bundle


def depth_profile(bundle: StateBundle, loss: LossSpec, targets: Sequence) -> np.ndarray:
    """
    每個深度的 C(z_i, y_i)；target 為 None 的深度回傳 NaN

    Raises:
        LengthMismatch: targets 長度與 bundle 深度數不同
    """
    if len(targets) != bundle.depths.size:
        raise LengthMismatch(f"{len(targets)} targets for {bundle.depths.size} depths")
    out = np.full(bundle.depths.size, np.nan)
    for i, y in enumerate(targets):
        if y is None:
            continue
        out[i] = float(loss.retarget(y).terminal(bundle.outputs[i]))
    return out


def theorem1_residual(bundle: StateBundle, model: DynamicsModel, layers: LayerParams) -> np.ndarray:
    """
    內部深度上 ∂_p z (中央差分) 與 −J·Φ 的差的範數

    回傳長度 n − 2 的陣列 (對應 p_1 ... p_{n-2})。
    """
    p = bundle.depths
    z = bundle.outputs
    out = np.empty(max(p.size - 2, 0))
    for i in range(1, p.size - 1):
        dz_dp = (z[i + 1] - z[i - 1]) / (p[i + 1] - p[i - 1])
        drift = model.eval(float(p[i]), bundle.inputs, layers.at(i))
        out[i - 1] = float(np.linalg.norm(dz_dp + bundle.jacobians[i] @ drift))
    return out
