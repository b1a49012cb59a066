"""
參數梯度的兩種算法

- through_system: 手寫 reverse mode，穿過 forward imbedded 遞迴 (含 scheme 的 Jacobian 遞迴)
- adjoint_update: 共用 θ 時直接讀 augmented adjoint 的 Λθ(p_min, x)
"""

from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from ..adjoint import backward_augmented, backward_timeseries
from ..core import (
    DepthGrid,
    DynamicsModel,
    JacobianScheme,
    LayerParams,
    LossSpec,
    NonFinite,
    PointCost,
    SchemeUnavailable,
    SharingRequired,
    as_state,
)
from ..jacobian import CoStateBundle
from ..propagate import check_layers, forward_imbed


@dataclass(frozen=True, eq=False)
class Sample:
    """一筆訓練資料：輸入 x 與各回報深度 (網格索引) 的目標"""
    x: np.ndarray
    targets: Dict[int, np.ndarray] = field(default_factory=dict)

    @classmethod
    def supervised(cls, x, y) -> "Sample":
        """只在 p_min (索引 0) 有目標"""
        return cls(as_state(x, "x"), {0: np.asarray(y, dtype=float)})

    @property
    def is_series(self) -> bool:
        return set(self.targets) != {0}

    def observations(self, grid: DepthGrid) -> List[Tuple[float, np.ndarray]]:
        return [(float(grid.points[idx]), y) for idx, y in sorted(self.targets.items())]


def sample_loss(outputs: np.ndarray, sample: Sample, cost: PointCost) -> float:
    """Σ_k C(z_k, y_k)，outputs 為各回報深度的 z"""
    return float(sum(cost.value(outputs[idx], y) for idx, y in sorted(sample.targets.items())))


@dataclass
class _Step:
    t: float
    h: float
    layer: int
    theta: np.ndarray
    K: np.ndarray        # 步前的 Jacobian J_{i+1}
    drift: np.ndarray    # Φ_i (cropped: (N,)；co-state: (K, N))
    A: np.ndarray = None


def _forward_tape(model, layers, grid, x, scheme, substeps):
    fine = grid.refine(substeps)
    pts = fine.points
    n = fine.size
    N = x.size
    co = None
    if scheme.mode in ("symmetric", "newton"):
        co = CoStateBundle.build(scheme.mode, x, scheme.resolve_deltas(x))
        X = co.inputs
        weights = co.closure_weights(scheme.newton_shift_sign)
        Q = X.copy()
    else:
        X = x[None, :]
        weights = np.ones(1)
        Q = X.copy()
    J = np.eye(N)
    fine_out = np.empty((n, N))
    fine_out[n - 1] = x
    tape: List[_Step] = [None] * (n - 1)

    for i in range(n - 2, -1, -1):
        t = float(pts[i])
        h = float(pts[i + 1] - pts[i])
        layer = int(fine.layer_of[i])
        theta = layers.at(layer)
        if co is not None:
            drift = model.eval(t, X, theta)
            tape[i] = _Step(t, h, layer, theta, J, drift)
            Q = Q + h * weights[:, None] * (drift @ J.T)
            J = co.jacobian(Q)
        else:
            drift = model.eval(t, x, theta)
            A = model.d_dz(t, x, theta)
            tape[i] = _Step(t, h, layer, theta, J, drift, A)
            Q = Q + h * (J @ drift)[None, :]
            J = J + h * (J @ A)
        if not np.all(np.isfinite(Q)) or not np.all(np.isfinite(J)):
            raise NonFinite(f"forward pass diverged at depth p={t}")
        fine_out[i] = Q[0]
    return fine, fine_out, tape, co, X, weights


def _sample_gradient(model, layers, grid, sample, cost, scheme, substeps):
    x = as_state(sample.x, "x")
    fine, fine_out, tape, co, X, weights = _forward_tape(model, layers, grid, x, scheme, substeps)
    coarse = fine.coarse_index
    outputs = fine_out[coarse]
    loss = sample_loss(outputs, sample, cost)

    N = x.size
    n = fine.size
    grad = np.zeros_like(layers.values)
    seed = np.zeros((n, N))
    for idx, y in sample.targets.items():
        seed[int(coarse[idx])] += cost.grad(outputs[idx], y)

    def accumulate(layer: int, g: np.ndarray):
        if layers.sharing == "shared":
            grad[:] += g
        else:
            grad[layer] += g

    if co is None:
        z_bar = np.zeros(N)
        J_bar = np.zeros((N, N))
        for i in range(n - 1):
            z_bar = z_bar + seed[i]
            st = tape[i]
            phi_bar = st.h * (st.K.T @ z_bar)
            A_bar = st.h * (st.K.T @ J_bar)
            B = model.d_dtheta(st.t, x, st.theta)
            accumulate(st.layer, B.T @ phi_bar + model.jac_z_vjp_theta(st.t, x, st.theta, A_bar))
            J_bar = st.h * np.outer(z_bar, st.drift) + J_bar @ (np.eye(N) + st.h * st.A).T
    else:
        Q_bar = np.zeros_like(X)
        for i in range(n - 1):
            Q_bar[0] += seed[i]
            st = tape[i]
            wq = weights[:, None] * Q_bar
            J_bar = st.h * (wq.T @ st.drift)
            F_bar = st.h * (wq @ st.K)
            B = model.d_dtheta(st.t, X, st.theta)
            accumulate(st.layer, np.einsum("kjm,kj->m", B, F_bar))
            Q_bar = Q_bar + co.vjp(J_bar)
    return loss, grad, outputs


def grad_through_system(model: DynamicsModel, layers: LayerParams, grid: DepthGrid, batch: Sequence[Sample],
                        cost: PointCost, scheme: JacobianScheme, substeps: int = 1) -> Tuple[float, np.ndarray]:
    """
    Batch 平均 loss 對所有層參數的梯度 (reverse mode 穿過 forward 遞迴)

    Returns:
        (平均 loss, 與 layers.values 同形狀的梯度)

    Raises:
        SchemeUnavailable: exact scheme 或 cropped 但模型沒有 d_dz
    """
    if scheme.mode == "exact":
        raise SchemeUnavailable("exact scheme has no differentiable forward recursion")
    if scheme.mode == "cropped" and not model.has_d_dz:
        raise SchemeUnavailable(f"cropped scheme needs d_dz, which {type(model).__name__} does not provide")
    check_layers(model, layers, grid)
    total = 0.0
    grad = np.zeros_like(layers.values)
    for sample in batch:
        loss, g, _ = _sample_gradient(model, layers, grid, sample, cost, scheme, substeps)
        total += loss
        grad += g
    count = max(len(batch), 1)
    return total / count, grad / count


def grad_adjoint_update(model: DynamicsModel, layers: LayerParams, grid: DepthGrid, sample: Sample,
                        cost: PointCost, scheme: JacobianScheme, substeps: int = 1) -> Tuple[float, np.ndarray]:
    """
    單筆資料的 (loss, ∇_θ loss)，梯度取自 Λθ(p_min, x)

    Raises:
        SharingRequired: per-layer 參數
    """
    if layers.sharing != "shared":
        raise SharingRequired("adjoint updates need a single shared θ")
    if sample.is_series:
        bundle = backward_timeseries(model, layers, grid, sample.x, sample.observations(grid), cost, scheme, substeps)
        return sample_loss(bundle.outputs, sample, cost), bundle.lam_theta[0].copy()
    y = sample.targets[0]
    bundle = backward_augmented(model, layers, grid, sample.x, LossSpec.from_cost(cost, y), scheme, substeps,
                                with_theta=True, with_t=False)
    z = forward_imbed(model, layers, sample.x, grid, scheme, substeps).outputs
    return sample_loss(z, sample, cost), bundle.lam_theta[0].copy()
