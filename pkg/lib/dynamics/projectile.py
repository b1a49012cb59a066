"""
拋體動態 z = [h, v]，ż = [v, −g]
"""

import numpy as np

from ..core import InImNetError, DynamicsModel

GRAVITY = 9.81


class ProjectileDynamics(DynamicsModel):
    def __init__(self, g: float = GRAVITY):
        if not (np.isfinite(g) and g > 0.0):
            raise InImNetError(f"gravitational constant must be positive, got {g}")
        self.g = float(g)
        self.state_dim = 2
        self.param_count = 0
        self._A = np.array([[0.0, 1.0], [0.0, 0.0]])

    def eval(self, t, z, theta):
        z = np.asarray(z, dtype=float)
        out = np.empty_like(z)
        out[..., 0] = z[..., 1]
        out[..., 1] = -self.g
        return out

    def d_dz(self, t, z, theta):
        z = np.asarray(z, dtype=float)
        return np.broadcast_to(self._A, z.shape + (2,)).copy()

    def hess_z(self, t, z, theta, w):
        z = np.asarray(z, dtype=float)
        return np.zeros(z.shape + (2,))

    def hess_theta_z(self, t, z, theta, w):
        z = np.asarray(z, dtype=float)
        return np.zeros(z.shape[:-1] + (0, 2))

    def jac_z_vjp_theta(self, t, z, theta, G):
        z = np.asarray(z, dtype=float)
        return np.zeros(z.shape[:-1] + (0,))
