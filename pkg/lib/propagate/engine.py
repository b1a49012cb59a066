"""
p 方向 (深度) 的 invariant imbedding 積分器

任何 imbedded 量 Q(p, x) 都滿足
    −∂_pQ = ∇_xQ · Φ(p, x) + S(x, Q)
z (S = 0)、Λ、Λθ、Λt 只差在 source S 與初始值。積分從 p = q 往深處走，
每步使用 Φ(p_i, x) 與 Q_{i+1}：
    Q_i = Q_{i+1} + h_i [∇_xQ_{i+1} · Φ_i + S(p_i, x, θ_i, Q_{i+1})]
∇_xQ 由 JacobianScheme 維護。
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..core import (
    DepthGrid,
    DynamicsModel,
    JacobianScheme,
    LayerParams,
    LengthMismatch,
    NonFinite,
    ParamLengthMismatch,
    RefinedGrid,
    SchemeUnavailable,
)
from ..jacobian import CoStateBundle, field_jacobian_step


class ImbeddedField(ABC):
    """一個沿深度傳遞的量 Q 及其 source"""

    dim: int
    # True 時 JacobianScheme.implicit_adjoint 生效
    adjoint: bool = False
    has_jumps: bool = False
    supports_exact: bool = True

    def __init__(self, model: DynamicsModel):
        self.model = model

    @abstractmethod
    def initial(self, X: np.ndarray, t_q: float, theta_q: np.ndarray) -> np.ndarray:
        """p = q 的值，X 為一批輸入 (K, N)，回傳 (K, dim)"""

    @abstractmethod
    def initial_jacobian(self, x: np.ndarray, t_q: float, theta_q: np.ndarray) -> np.ndarray:
        """p = q 的 ∇_xQ，(dim, N)"""

    @abstractmethod
    def source(self, t: float, X: np.ndarray, theta: np.ndarray, Q: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def source_jacobians(self, t: float, x: np.ndarray, theta: np.ndarray, Q: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """(∂S/∂Q (dim, dim), ∂S/∂x (dim, N))"""

    def exact_jacobians(self, layers: LayerParams, fine: RefinedGrid, x: np.ndarray) -> np.ndarray:
        raise SchemeUnavailable(f"{type(self).__name__} has no exact Jacobian oracle")

    def jump(self, coarse_index: int, X: np.ndarray, Q: np.ndarray, K: np.ndarray) -> np.ndarray:
        return Q

    def jump_jacobian(self, coarse_index: int, x: np.ndarray, Q: np.ndarray, K: np.ndarray) -> np.ndarray:
        return K


@dataclass(frozen=True, eq=False)
class FieldTrace:
    depths: np.ndarray
    values: np.ndarray       # (n, dim)
    jacobians: np.ndarray    # (n, dim, N)


def check_layers(model: DynamicsModel, layers: LayerParams, grid: DepthGrid) -> None:
    if layers.param_count != model.param_count:
        raise ParamLengthMismatch(
            f"layer parameters have length {layers.param_count}, model expects {model.param_count}"
        )
    if layers.sharing == "per_layer" and layers.layer_count != grid.layers:
        raise LengthMismatch(f"{layers.layer_count} per-layer parameter sets for a grid with {grid.layers} layers")


def integrate_field(model: DynamicsModel, layers: LayerParams, grid: DepthGrid, x: np.ndarray,
                    field: ImbeddedField, scheme: JacobianScheme, substeps: int = 1) -> FieldTrace:
    """
    從 p = q 往 p_min 積分一個 imbedded 量

    Returns:
        FieldTrace: 每個回報深度的 Q 與 ∇_xQ
    """
    check_layers(model, layers, grid)
    mode = scheme.mode
    if mode in ("exact", "cropped") and not model.has_d_dz:
        raise SchemeUnavailable(f"{mode} scheme needs d_dz, which {type(model).__name__} does not provide")
    if mode == "exact" and not field.supports_exact:
        raise SchemeUnavailable(f"exact scheme is not available for {type(field).__name__}")

    fine = grid.refine(substeps)
    pts = fine.points
    n = fine.size
    coarse_of = {int(pos): idx for idx, pos in enumerate(fine.coarse_index)}
    implicit = scheme.implicit_adjoint and field.adjoint

    values = np.empty((grid.size, field.dim))
    jacs = np.empty((grid.size, field.dim, x.size))

    t_q = float(pts[-1])
    theta_q = layers.at(grid.layers - 1)
    K = np.asarray(field.initial_jacobian(x, t_q, theta_q), dtype=float)

    co = None
    if mode in ("symmetric", "newton"):
        co = CoStateBundle.build(mode, x, scheme.resolve_deltas(x))
        X = co.inputs
        weights = co.closure_weights(scheme.newton_shift_sign)
    else:
        X = x[None, :]
        weights = np.ones(1)
    Q = np.asarray(field.initial(X, t_q, theta_q), dtype=float)

    oracle = field.exact_jacobians(layers, fine, x) if mode == "exact" else None

    def settle(pos: int):
        nonlocal Q, K
        idx = coarse_of.get(pos)
        if idx is None:
            return
        if field.has_jumps:
            Q_before = Q
            Q = field.jump(idx, X, Q, K)
            if co is None or pos == n - 1:
                K = field.jump_jacobian(idx, x, Q_before[0], K)
            else:
                K = co.jacobian(Q)
        values[idx] = Q[0]
        jacs[idx] = K

    settle(n - 1)

    for i in range(n - 2, -1, -1):
        t = float(pts[i])
        h = float(pts[i + 1] - pts[i])
        theta = layers.at(int(fine.layer_of[i]))
        drift = model.eval(t, X, theta)
        src = field.source(t, X, theta, Q)

        if co is not None:
            transport = weights[:, None] * np.einsum("dn,kn->kd", K, drift)
            Q_new = Q + h * (transport + src)
            K_new = co.jacobian(Q_new)
            if implicit:
                transport = weights[:, None] * np.einsum("dn,kn->kd", K_new, drift)
                Q_new = Q + h * (transport + src)
                K_new = co.jacobian(Q_new)
        else:
            if oracle is not None:
                K_new = oracle[i]
            else:
                s_q, s_x = field.source_jacobians(t, x, theta, Q[0])
                K_new = field_jacobian_step(K, model.d_dz(t, x, theta), s_q, s_x, h)
            K_use = K_new if implicit else K
            Q_new = Q + h * (drift @ K_use.T + src)

        if not np.all(np.isfinite(Q_new)) or not np.all(np.isfinite(K_new)):
            raise NonFinite(f"{type(field).__name__} diverged at depth p={t}")
        Q, K = Q_new, K_new
        settle(i)

    return FieldTrace(depths=grid.points.copy(), values=values, jacobians=jacs)
