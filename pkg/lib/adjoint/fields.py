"""
Adjoint 的 imbedded 量

AdjointField 把 [Λ; Λθ; Λt] 疊成一個向量，使用 propagate.engine 的同一個積分器：
    S_Λ  = ∇_zfᵀΛ + ∇_zR
    S_Λθ = ∇_θfᵀΛ + ∇_θR
    S_Λt = 0
TimeSeriesField 則把 [z; Λ] 疊在一起，在觀測深度上加入跳躍 J_iᵀ∇C(z_i, y_i)。
"""

from typing import Dict

import numpy as np

from ..core import DynamicsModel, LossSpec, PointCost
from ..jacobian import exact_sweep
from ..propagate import ImbeddedField


class AdjointField(ImbeddedField):
    adjoint = True

    def __init__(self, model: DynamicsModel, loss: LossSpec, with_theta: bool = False, with_t: bool = False):
        super().__init__(model)
        self.loss = loss
        self.n = model.state_dim
        self.m = model.param_count if with_theta else 0
        self.with_theta = with_theta
        self.with_t = with_t
        self.dim = self.n + self.m + (1 if with_t else 0)

    # === 切片 ===

    @property
    def lam_slice(self) -> slice:
        return slice(0, self.n)

    @property
    def theta_slice(self) -> slice:
        return slice(self.n, self.n + self.m)

    def initial(self, X, t_q, theta_q):
        Q = np.zeros((X.shape[0], self.dim))
        lam = np.asarray(self.loss.terminal_grad(X), dtype=float)
        Q[:, :self.n] = lam
        if self.with_t:
            drift = self.model.eval(t_q, X, theta_q)
            Q[:, -1] = np.sum(lam * drift, axis=-1) + self.loss.R(t_q, X, theta_q)
        return Q

    def initial_jacobian(self, x, t_q, theta_q):
        K = np.zeros((self.dim, self.n))
        H = self.loss.hess_T(x)
        K[:self.n] = H
        if self.with_t:
            drift = self.model.eval(t_q, x, theta_q)
            A = self.model.d_dz(t_q, x, theta_q)
            K[-1] = H.T @ drift + A.T @ self.loss.terminal_grad(x) + self.loss.grad_R_z(t_q, x, theta_q)
        return K

    def source(self, t, X, theta, Q):
        S = np.zeros_like(Q)
        lam = Q[:, :self.n]
        A = self.model.d_dz(t, X, theta)
        S[:, :self.n] = np.einsum("kji,kj->ki", A, lam) + self.loss.grad_R_z(t, X, theta)
        if self.m:
            B = self.model.d_dtheta(t, X, theta)
            S[:, self.theta_slice] = np.einsum("kjm,kj->km", B, lam) + self.loss.grad_R_theta(t, X, theta)
        return S

    def source_jacobians(self, t, x, theta, Q):
        n, m = self.n, self.m
        lam = Q[:n]
        s_q = np.zeros((self.dim, self.dim))
        s_x = np.zeros((self.dim, n))
        s_q[:n, :n] = self.model.d_dz(t, x, theta).T
        s_x[:n] = self.model.hess_z(t, x, theta, lam) + self.loss.hess_R_z(t, x, theta)
        if m:
            s_q[n:n + m, :n] = self.model.d_dtheta(t, x, theta).T
            s_x[n:n + m] = self.model.hess_theta_z(t, x, theta, lam) + self.loss.hess_R_theta_z(t, x, theta)
        return s_q, s_x

    def exact_jacobians(self, layers, fine, x):
        sweep = exact_sweep(self.model, layers, fine, x, self.loss, want_theta=self.m > 0)
        n, m = self.n, self.m
        out = np.zeros((fine.size, self.dim, n))
        out[:, :n] = sweep.lam_hess
        if m:
            out[:, n:n + m] = sweep.theta_jac
        if self.with_t:
            last = int(fine.layer_of[-1])
            for k in range(fine.size):
                layer = int(fine.layer_of[k]) if k < fine.size - 1 else last
                t = float(fine.points[k])
                theta = layers.at(layer)
                drift = self.model.eval(t, x, theta)
                A = self.model.d_dz(t, x, theta)
                out[k, -1] = sweep.lam_hess[k].T @ drift + A.T @ sweep.lam[k] + self.loss.grad_R_z(t, x, theta)
        return out


class TimeSeriesField(ImbeddedField):
    """[z; Λ]：z 為 forward imbedded 輸出，Λ 在觀測深度跳躍"""

    adjoint = True
    has_jumps = True
    supports_exact = False

    def __init__(self, model: DynamicsModel, cost: PointCost, targets: Dict[int, np.ndarray]):
        super().__init__(model)
        self.cost = cost
        self.targets = targets
        self.n = model.state_dim
        self.dim = 2 * self.n

    def initial(self, X, t_q, theta_q):
        return np.concatenate([np.array(X, dtype=float), np.zeros_like(X)], axis=-1)

    def initial_jacobian(self, x, t_q, theta_q):
        return np.vstack([np.eye(self.n), np.zeros((self.n, self.n))])

    def source(self, t, X, theta, Q):
        S = np.zeros_like(Q)
        A = self.model.d_dz(t, X, theta)
        S[:, self.n:] = np.einsum("kji,kj->ki", A, Q[:, self.n:])
        return S

    def source_jacobians(self, t, x, theta, Q):
        n = self.n
        s_q = np.zeros((2 * n, 2 * n))
        s_x = np.zeros((2 * n, n))
        s_q[n:, n:] = self.model.d_dz(t, x, theta).T
        s_x[n:] = self.model.hess_z(t, x, theta, Q[n:])
        return s_q, s_x

    def jump(self, coarse_index, X, Q, K):
        y = self.targets.get(coarse_index)
        if y is None:
            return Q
        n = self.n
        J = K[:n]
        g = self.cost.grad(Q[:, :n], y)
        out = Q.copy()
        out[:, n:] += g @ J
        return out

    def jump_jacobian(self, coarse_index, x, Q, K):
        y = self.targets.get(coarse_index)
        if y is None:
            return K
        n = self.n
        J = K[:n]
        H = self.cost.hess(Q[:n], y)
        out = K.copy()
        out[n:] += J.T @ H @ J
        return out
