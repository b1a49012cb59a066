"""
線性動態：f = A z + b，以及把 A、b 放進 θ 的可訓練版本
"""

import numpy as np

from ..core import DynamicsModel, LengthMismatch, ParamLengthMismatch


class LinearDynamics(DynamicsModel):
    """f(t, z) = A z + b，θ 不使用 (M = 0)"""

    def __init__(self, A, b=None):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        if A.shape[0] != A.shape[1]:
            raise LengthMismatch(f"A must be square, got {A.shape}")
        self.A = A
        self.b = np.zeros(A.shape[0]) if b is None else np.asarray(b, dtype=float).reshape(-1)
        if self.b.size != A.shape[0]:
            raise LengthMismatch(f"b has length {self.b.size}, expected {A.shape[0]}")
        self.state_dim = A.shape[0]
        self.param_count = 0

    @classmethod
    def scalar(cls, a: float, b: float = 0.0) -> "LinearDynamics":
        return cls([[a]], [b])

    def eval(self, t, z, theta):
        return np.asarray(z, dtype=float) @ self.A.T + self.b

    def d_dz(self, t, z, theta):
        z = np.asarray(z, dtype=float)
        return np.broadcast_to(self.A, z.shape + (self.state_dim,)).copy()

    def hess_z(self, t, z, theta, w):
        z = np.asarray(z, dtype=float)
        return np.zeros(z.shape + (self.state_dim,))

    def hess_theta_z(self, t, z, theta, w):
        z = np.asarray(z, dtype=float)
        return np.zeros(z.shape[:-1] + (0, self.state_dim))

    def jac_z_vjp_theta(self, t, z, theta, G):
        z = np.asarray(z, dtype=float)
        return np.zeros(z.shape[:-1] + (0,))


class LinearParamDynamics(DynamicsModel):
    """
    f(t, z, θ) = A z + b，θ = [vec(A) (row-major), b]，M = N² + N
    """

    def __init__(self, state_dim: int):
        self.state_dim = int(state_dim)
        self.param_count = self.state_dim ** 2 + self.state_dim

    def pack(self, A, b) -> np.ndarray:
        return np.concatenate([np.asarray(A, dtype=float).reshape(-1), np.asarray(b, dtype=float).reshape(-1)])

    def unpack(self, theta):
        theta = np.asarray(theta, dtype=float).reshape(-1)
        if theta.size != self.param_count:
            raise ParamLengthMismatch(f"expected {self.param_count} parameters, got {theta.size}")
        n = self.state_dim
        return theta[: n * n].reshape(n, n), theta[n * n:]

    def eval(self, t, z, theta):
        A, b = self.unpack(theta)
        return np.asarray(z, dtype=float) @ A.T + b

    def d_dz(self, t, z, theta):
        A, _ = self.unpack(theta)
        z = np.asarray(z, dtype=float)
        return np.broadcast_to(A, z.shape + (self.state_dim,)).copy()

    def d_dtheta(self, t, z, theta):
        z = np.asarray(z, dtype=float)
        n = self.state_dim
        out = np.zeros(z.shape[:-1] + (n, self.param_count))
        for j in range(n):
            out[..., j, j * n:(j + 1) * n] = z
            out[..., j, n * n + j] = 1.0
        return out

    def hess_z(self, t, z, theta, w):
        z = np.asarray(z, dtype=float)
        return np.zeros(z.shape + (self.state_dim,))

    def hess_theta_z(self, t, z, theta, w):
        n = self.state_dim
        w = np.asarray(w, dtype=float)
        block = np.einsum("...a,bc->...abc", w, np.eye(n)).reshape(w.shape[:-1] + (n * n, n))
        return np.concatenate([block, np.zeros(w.shape[:-1] + (n, n))], axis=-2)

    def jac_z_vjp_theta(self, t, z, theta, G):
        n = self.state_dim
        G = np.asarray(G, dtype=float)
        lead = G.shape[:-2]
        return np.concatenate([G.reshape(lead + (n * n,)), np.zeros(lead + (n,))], axis=-1)


class ScalarControlDynamics(DynamicsModel):
    """f(t, z, θ) = θ：狀態只受控制驅動 (N = M)"""

    def __init__(self, state_dim: int = 1):
        self.state_dim = int(state_dim)
        self.param_count = int(state_dim)

    def eval(self, t, z, theta):
        z = np.asarray(z, dtype=float)
        return np.broadcast_to(np.asarray(theta, dtype=float), z.shape).copy()

    def d_dz(self, t, z, theta):
        z = np.asarray(z, dtype=float)
        return np.zeros(z.shape + (self.state_dim,))

    def d_dtheta(self, t, z, theta):
        z = np.asarray(z, dtype=float)
        return np.broadcast_to(np.eye(self.state_dim), z.shape + (self.state_dim,)).copy()

    def hess_z(self, t, z, theta, w):
        z = np.asarray(z, dtype=float)
        return np.zeros(z.shape + (self.state_dim,))

    def hess_theta_z(self, t, z, theta, w):
        z = np.asarray(z, dtype=float)
        return np.zeros(z.shape[:-1] + (self.param_count, self.state_dim))

    def jac_z_vjp_theta(self, t, z, theta, G):
        z = np.asarray(z, dtype=float)
        return np.zeros(z.shape[:-1] + (self.param_count,))
