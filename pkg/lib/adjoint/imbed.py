"""
Backward imbedded pass：Λ(p, x) = ∇_x J(p, x) 不需要任何 forward z pass

    Λ_n = ∇T(x)
    Λ_i = Λ_{i+1} + h_i [∇_xΛ_{i+1} · Φ_i + ∇_zf_iᵀ Λ_{i+1} + ∇_zR(p_i, x, θ_i)]

其中 f、R 與 Φ 都在 (p_i, x, Ψ(p_i, x)) 求值。
"""

import logging
from typing import Optional, Sequence, Tuple

import numpy as np

from ..core import (
    AdjointBundle,
    AssumptionViolated,
    DepthGrid,
    DynamicsModel,
    InImNetError,
    JacobianScheme,
    LayerParams,
    LengthMismatch,
    LossSpec,
    ObservationOffGrid,
    PointCost,
    SchemeUnavailable,
    SharingRequired,
    as_state,
)
from ..propagate import integrate_field
from .fields import AdjointField, TimeSeriesField

logger = logging.getLogger("InImNet")


def _prepare(model: DynamicsModel, x) -> np.ndarray:
    x = as_state(x, "x")
    if x.size != model.state_dim:
        raise LengthMismatch(f"input has length {x.size}, model state is {model.state_dim}")
    return x


def backward_imbed(model: DynamicsModel, layers: LayerParams, grid: DepthGrid, x, loss: LossSpec,
                   scheme: Optional[JacobianScheme] = None, substeps: int = 1) -> AdjointBundle:
    """
    Imbedded adjoint Λ(p_i, x) 在每個回報深度的值

    Args:
        model: training function f
        layers: 每層的 Ψ(p_i, x)
        grid: 回報深度
        x: 輸入
        loss: T 與 (可選) R
        scheme: ∇_xΛ 的估計方式 (預設 cropped)
        substeps: 每個區間的 Euler 子步數

    Returns:
        AdjointBundle: Λ_i 與 ∇_xΛ_i
    """
    x = _prepare(model, x)
    scheme = scheme or JacobianScheme()
    field = AdjointField(model, loss)
    trace = integrate_field(model, layers, grid, x, field, scheme, substeps)
    bundle = AdjointBundle(depths=trace.depths, lam=trace.values, lam_jacobians=trace.jacobians, inputs=x)
    bundle.check_trivial(np.asarray(loss.terminal_grad(x[None, :]), dtype=float)[0])
    return bundle


def backward_augmented(model: DynamicsModel, layers: LayerParams, grid: DepthGrid, x, loss: LossSpec,
                       scheme: Optional[JacobianScheme] = None, substeps: int = 1,
                       with_theta: bool = True, with_t: bool = True) -> AdjointBundle:
    """
    Augmented adjoint：Λ 加上 Λθ = ∇_θJ 與 Λt = −∂_pJ

    Λt 的起始值為 ⟨Λ(q,x), Φ(q,x)⟩ + R(q,x)；沒有 running loss (R ≡ 0) 時就是 ⟨Λ, Φ⟩。

    Raises:
        SharingRequired: Λθ 需要所有層共用 θ
        AssumptionViolated: Λt 需要 f 與 R 都不顯式依賴 t
    """
    x = _prepare(model, x)
    scheme = scheme or JacobianScheme()
    if with_theta and layers.sharing != "shared":
        raise SharingRequired("Λθ is the gradient of a single shared θ; per-layer parameters are not supported")
    if with_t and not (model.autonomous and loss.running_autonomous):
        raise AssumptionViolated("Λt requires f and R without explicit t dependence")

    field = AdjointField(model, loss, with_theta=with_theta, with_t=with_t)
    trace = integrate_field(model, layers, grid, x, field, scheme, substeps)
    n = model.state_dim
    lam_theta = trace.values[:, field.theta_slice].copy() if with_theta else None
    lam_t = trace.values[:, -1].copy() if with_t else None
    bundle = AdjointBundle(
        depths=trace.depths,
        lam=trace.values[:, :n].copy(),
        lam_jacobians=trace.jacobians[:, :n].copy(),
        lam_theta=lam_theta,
        lam_t=lam_t,
        inputs=x,
    )
    t_q = grid.terminal
    theta_q = layers.at(grid.layers - 1)
    X = x[None, :]
    bundle.check_trivial(
        np.asarray(loss.terminal_grad(X), dtype=float)[0],
        phi_q=model.eval(t_q, X, theta_q)[0] if with_t else None,
        running_q=float(loss.R(t_q, X, theta_q)[0]),
    )
    return bundle


def map_observations(grid: DepthGrid, observations: Sequence[Tuple[float, np.ndarray]]) -> dict:
    """(p_k, y_k) → {網格索引: y_k}"""
    targets = {}
    for p, y in observations:
        idx = grid.index_of(float(p))
        if idx is None:
            raise ObservationOffGrid(f"observation depth {p} is not a grid point")
        if idx in targets:
            raise InImNetError(f"more than one observation at depth {p}")
        targets[idx] = np.asarray(y, dtype=float)
    return targets


def backward_timeseries(model: DynamicsModel, layers: LayerParams, grid: DepthGrid, x,
                        observations: Sequence[Tuple[float, np.ndarray]], cost: PointCost,
                        scheme: Optional[JacobianScheme] = None, substeps: int = 1,
                        with_theta: bool = True) -> AdjointBundle:
    """
    端點觀測 {y_k = z(q; p_k, x)} 的 adjoint

    Λ 在觀測深度加上 J_kᵀ ∇C(z_k, y_k)，z 與 J 來自同時演化的 forward 量。
    Λθ (共用 θ 時) 為每筆觀測各自一段 augmented adjoint 的總和：
    從 q 以 C(·, y_k) 為 terminal loss 積分到 p_k，Λθ_i 加總所有 p_k ≥ p_i 的貢獻。

    Raises:
        ObservationOffGrid: 觀測深度不在網格上
        SchemeUnavailable: exact scheme
    """
    x = _prepare(model, x)
    scheme = scheme or JacobianScheme()
    if scheme.mode == "exact":
        raise SchemeUnavailable("exact scheme is not available for time-series adjoints")
    targets = map_observations(grid, observations)

    n = model.state_dim
    field = TimeSeriesField(model, cost, targets)
    trace = integrate_field(model, layers, grid, x, field, scheme, substeps)

    lam_theta = None
    if with_theta and layers.sharing == "shared" and model.param_count:
        contrib = np.zeros((grid.size, model.param_count))
        for idx, y in targets.items():
            if idx == grid.size - 1:
                continue
            sub_grid = DepthGrid(grid.points[idx:])
            block = backward_augmented(model, layers, sub_grid, x, LossSpec.from_cost(cost, y),
                                       scheme, substeps, with_theta=True, with_t=False)
            contrib[idx] = block.lam_theta[0]
        lam_theta = np.cumsum(contrib[::-1], axis=0)[::-1].copy()

    bundle = AdjointBundle(
        depths=trace.depths,
        lam=trace.values[:, n:].copy(),
        lam_jacobians=trace.jacobians[:, n:].copy(),
        lam_theta=lam_theta,
        inputs=x,
        outputs=trace.values[:, :n].copy(),
    )
    last = grid.size - 1
    grad_q = np.asarray(cost.grad(x[None, :], targets[last]), dtype=float)[0] if last in targets else np.zeros(n)
    bundle.check_trivial(grad_q)
    return bundle


def optimality_residual(model: DynamicsModel, layers: LayerParams, grid: DepthGrid, x, loss: LossSpec,
                        adjoint: AdjointBundle) -> np.ndarray:
    """
    每個深度的 ‖∇_θR + ∇_θfᵀ Λ‖，最佳控制時為 0

    Raises:
        SchemeUnavailable: M = 0 或模型沒有 d_dtheta
    """
    x = _prepare(model, x)
    if model.param_count == 0 or not model.has_d_dtheta:
        raise SchemeUnavailable(f"{type(model).__name__} has no parameters to test optimality against")
    if adjoint.lam.shape[0] != grid.size:
        raise LengthMismatch(f"adjoint has {adjoint.lam.shape[0]} depths, grid has {grid.size}")
    out = np.empty(grid.size)
    for i, p in enumerate(grid.points):
        theta = layers.at(min(i, grid.layers - 1))
        B = model.d_dtheta(float(p), x, theta)
        out[i] = float(np.linalg.norm(loss.grad_R_theta(float(p), x, theta) + B.T @ adjoint.lam[i]))
    return out
