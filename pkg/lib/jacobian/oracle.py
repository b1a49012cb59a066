"""
Exact scheme：從每個起始深度同時做直接 Euler 求解

對細網格上每個 p_k 都從 x 出發積分到 q (以 numpy 批次處理同一組中仍在進行中的軌跡)，
沿途以 exact_sensitivity_step 推進 variational equation 得到 J_k。
給定 loss 時再做一次離散 adjoint 反向掃描，得到
  λ_k = ∇_x J(p_k, x)、W_k = ∇_x λ_k (離散 Riccati / Hessian 遞迴)、
  g_k = ∇_θ J(p_k, x) 與 C_k = ∇_x g_k。
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..core import DynamicsModel, LayerParams, LossSpec, NonFinite, RefinedGrid
from .steps import exact_sensitivity_step


@dataclass(frozen=True, eq=False)
class OracleSweep:
    points: np.ndarray
    outputs: np.ndarray          # (n, N) 直接解 z(q; p_k, x)
    jacobians: np.ndarray        # (n, N, N)
    lam: Optional[np.ndarray] = None          # (n, N)
    lam_hess: Optional[np.ndarray] = None     # (n, N, N)
    theta_grad: Optional[np.ndarray] = None   # (n, M)
    theta_jac: Optional[np.ndarray] = None    # (n, M, N)


# 每個 block 的 history 陣列 (長度 × block 寬度 × N) 上限，約 32 MB float64
_BLOCK_ELEMENTS = 1 << 22


def _default_block(n: int, dim: int) -> int:
    return int(min(n, max(1, _BLOCK_ELEMENTS // max(n * dim, 1))))


def exact_sweep(model: DynamicsModel, layers: LayerParams, fine: RefinedGrid, x: np.ndarray,
                loss: Optional[LossSpec] = None, want_theta: bool = False,
                block_size: Optional[int] = None) -> OracleSweep:
    """
    起始深度每 block_size 個一組處理

    給定 loss 時反向掃描需要每條軌跡在每一步的狀態，每組的記憶體為
    O(n · block_size · N)，時間總計仍是 O(n²)。block_size 預設依 _BLOCK_ELEMENTS 決定，
    1000 層的 2 維模型只有一組。
    """
    pts = fine.points
    n = fine.size
    dim = x.size
    if block_size is None:
        block_size = _default_block(n, dim)
    if block_size < 1:
        raise ValueError("block_size must be positive")

    outputs = np.empty((n, dim))
    jacobians = np.empty((n, dim, dim))
    with_loss = loss is not None
    m = layers.param_count
    lam = np.empty((n, dim)) if with_loss else None
    hess = np.empty((n, dim, dim)) if with_loss else None
    theta_grad = np.zeros((n, m)) if with_loss and want_theta else None
    theta_jac = np.zeros((n, m, dim)) if with_loss and want_theta else None

    for k0 in range(0, n, block_size):
        k1 = min(n, k0 + block_size)
        block = _sweep_block(model, layers, fine, x, loss, want_theta, k0, k1)
        outputs[k0:k1], jacobians[k0:k1] = block[0], block[1]
        if with_loss:
            lam[k0:k1], hess[k0:k1] = block[2], block[3]
            if want_theta:
                theta_grad[k0:k1], theta_jac[k0:k1] = block[4], block[5]

    if not with_loss:
        return OracleSweep(points=pts, outputs=outputs, jacobians=jacobians)
    return OracleSweep(points=pts, outputs=outputs, jacobians=jacobians, lam=lam, lam_hess=hess,
                       theta_grad=theta_grad, theta_jac=theta_jac)


def _sweep_block(model, layers, fine, x, loss, want_theta, k0, k1):
    """起始深度 p_k0 … p_{k1−1} 的 forward 與 (可選) adjoint 掃描"""
    pts = fine.points
    n = fine.size
    dim = x.size
    eye = np.eye(dim)
    width = k1 - k0

    # 尚未開始的軌跡停在 x、J = I
    states = np.tile(np.asarray(x, dtype=float), (width, 1))
    sens = np.tile(eye, (width, 1, 1))
    history = np.empty((n - k0, width, dim)) if loss is not None else None

    for j in range(k0, n - 1):
        act = slice(0, min(j, k1 - 1) - k0 + 1)
        t = float(pts[j])
        h = float(pts[j + 1] - pts[j])
        theta = layers.at(int(fine.layer_of[j]))
        if history is not None:
            history[j - k0, act] = states[act]
        grad_f = model.d_dz(t, states[act], theta)
        drift = model.eval(t, states[act], theta)
        sens[act] = exact_sensitivity_step(sens[act], grad_f, h)
        states[act] = states[act] + h * drift
        if not np.all(np.isfinite(states[act])):
            raise NonFinite(f"direct sweep diverged at t={t}")

    if loss is None:
        return states, sens

    lam = np.asarray(loss.terminal_grad(states), dtype=float).copy()
    hess = np.asarray(loss.hess_T(states), dtype=float).copy()
    m = layers.param_count
    theta_grad = np.zeros((width, m)) if want_theta else None
    theta_jac = np.zeros((width, m, dim)) if want_theta else None

    for j in range(n - 2, k0 - 1, -1):
        act = slice(0, min(j, k1 - 1) - k0 + 1)
        t = float(pts[j])
        h = float(pts[j + 1] - pts[j])
        theta = layers.at(int(fine.layer_of[j]))
        zj = history[j - k0, act]
        lam_next = lam[act]
        hess_next = hess[act]
        grad_f = model.d_dz(t, zj, theta)
        step = eye + h * grad_f
        if want_theta:
            B = model.d_dtheta(t, zj, theta)
            Bt = np.swapaxes(B, -1, -2)
            theta_jac[act] = (theta_jac[act] + h * (Bt @ hess_next)) @ step + h * (
                model.hess_theta_z(t, zj, theta, lam_next) + loss.hess_R_theta_z(t, zj, theta)
            )
            theta_grad[act] += h * (np.einsum("kjm,kj->km", B, lam_next) + loss.grad_R_theta(t, zj, theta))
        hess[act] = np.swapaxes(step, -1, -2) @ hess_next @ step + h * (
            model.hess_z(t, zj, theta, lam_next) + loss.hess_R_z(t, zj, theta)
        )
        lam[act] = lam_next + h * (np.einsum("kji,kj->ki", grad_f, lam_next) + loss.grad_R_z(t, zj, theta))

    return states, sens, lam, hess, theta_grad, theta_jac
