"""
損失定義：terminal loss T、running loss R 與點成本 C(z, y)
"""

from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .errors import InImNetError
from .model import batched_central_jacobian, central_jacobian


@dataclass(frozen=True)
class PointCost:
    """C(z, y) 及其對 z 的梯度、Hessian"""
    name: str
    value: Callable[[np.ndarray, np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray, np.ndarray], np.ndarray]
    hess: Callable[[np.ndarray, np.ndarray], np.ndarray]


def mse_cost(state_dim: int) -> PointCost:
    """C(z, y) = ½‖z − y‖² / N"""
    n = float(state_dim)
    return PointCost(
        name="mse",
        value=lambda z, y: 0.5 * np.sum((np.asarray(z) - y) ** 2, axis=-1) / n,
        grad=lambda z, y: (np.asarray(z) - y) / n,
        hess=lambda z, y: np.broadcast_to(np.eye(state_dim) / n, np.shape(z) + (state_dim,)).copy(),
    )


def squared_cost(state_dim: int) -> PointCost:
    """C(z, y) = ½‖z − y‖²"""
    return PointCost(
        name="squared",
        value=lambda z, y: 0.5 * np.sum((np.asarray(z) - y) ** 2, axis=-1),
        grad=lambda z, y: np.asarray(z) - y,
        hess=lambda z, y: np.broadcast_to(np.eye(state_dim), np.shape(z) + (state_dim,)).copy(),
    )


COSTS = {"mse": mse_cost, "squared": squared_cost}


@dataclass(frozen=True, eq=False)
class LossSpec:
    """
    J = T(z(q)) + ∫_p^q R(t, z, θ) dt

    running 為 None 時代表純 Mayer 問題 (R ≡ 0)。所有函式都接受批次 z (..., N)。
    """
    terminal: Callable[[np.ndarray], np.ndarray]
    terminal_grad: Callable[[np.ndarray], np.ndarray]
    terminal_hess: Optional[Callable[[np.ndarray], np.ndarray]] = None
    running: Optional[Callable] = None
    running_grad_z: Optional[Callable] = None
    running_grad_theta: Optional[Callable] = None
    running_hess_z: Optional[Callable] = None
    running_hess_theta_z: Optional[Callable] = None
    # R 是否顯式依賴 t
    running_autonomous: bool = True
    observations: Tuple[Tuple[float, np.ndarray], ...] = ()
    cost: Optional[PointCost] = None
    target: Optional[np.ndarray] = None

    @classmethod
    def from_cost(cls, cost: PointCost, y, **running) -> "LossSpec":
        y = np.asarray(y, dtype=float)
        return cls(
            terminal=lambda z: cost.value(z, y),
            terminal_grad=lambda z: cost.grad(z, y),
            terminal_hess=lambda z: cost.hess(z, y),
            cost=cost,
            target=y,
            **running,
        )

    @classmethod
    def mse(cls, y, **running) -> "LossSpec":
        y = np.asarray(y, dtype=float)
        return cls.from_cost(mse_cost(y.size), y, **running)

    @classmethod
    def quadratic_control(cls, y, weight: float = 1.0) -> "LossSpec":
        """T = ½‖z − y‖²，R = ½·weight·‖θ‖² (只依賴控制)"""
        y = np.asarray(y, dtype=float)
        return cls.from_cost(
            squared_cost(y.size), y,
            running=lambda t, z, th: 0.5 * weight * float(np.dot(th, th)) * np.ones(np.shape(z)[:-1]),
            running_grad_z=lambda t, z, th: np.zeros_like(np.asarray(z, dtype=float)),
            running_grad_theta=lambda t, z, th: weight * np.broadcast_to(th, np.shape(z)[:-1] + th.shape).copy(),
            running_hess_z=lambda t, z, th: np.zeros(np.shape(z) + (np.shape(z)[-1],)),
            running_hess_theta_z=lambda t, z, th: np.zeros(np.shape(z)[:-1] + (th.size, np.shape(z)[-1])),
        )

    def retarget(self, y) -> "LossSpec":
        if self.cost is None:
            raise InImNetError("loss has no point cost; cannot retarget")
        y = np.asarray(y, dtype=float)
        cost = self.cost
        return replace(
            self,
            terminal=lambda z: cost.value(z, y),
            terminal_grad=lambda z: cost.grad(z, y),
            terminal_hess=lambda z: cost.hess(z, y),
            target=y,
        )

    def with_observations(self, observations: Sequence[Tuple[float, np.ndarray]]) -> "LossSpec":
        obs = tuple((float(p), np.asarray(y, dtype=float)) for p, y in observations)
        return replace(self, observations=obs)

    # === 取值輔助 (R ≡ 0 時回傳零) ===

    @property
    def has_running(self) -> bool:
        return self.running is not None

    def hess_T(self, z: np.ndarray) -> np.ndarray:
        if self.terminal_hess is not None:
            return np.asarray(self.terminal_hess(z), dtype=float)
        return batched_central_jacobian(self.terminal_grad, z)

    def R(self, t: float, z: np.ndarray, theta: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        if self.running is None:
            return np.zeros(z.shape[:-1])
        return np.asarray(self.running(t, z, theta), dtype=float)

    def grad_R_z(self, t: float, z: np.ndarray, theta: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        if self.running is None:
            return np.zeros_like(z)
        if self.running_grad_z is None:
            return batched_central_jacobian(lambda v: self.running(t, v, theta)[..., None], z)[..., 0, :]
        return np.asarray(self.running_grad_z(t, z, theta), dtype=float)

    def grad_R_theta(self, t: float, z: np.ndarray, theta: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        theta = np.asarray(theta, dtype=float)
        if self.running is None or self.running_grad_theta is None:
            return np.zeros(z.shape[:-1] + (theta.size,))
        return np.asarray(self.running_grad_theta(t, z, theta), dtype=float)

    def hess_R_z(self, t: float, z: np.ndarray, theta: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        if self.running is None:
            return np.zeros(z.shape + (z.shape[-1],))
        if self.running_hess_z is not None:
            return np.asarray(self.running_hess_z(t, z, theta), dtype=float)
        return batched_central_jacobian(lambda v: self.grad_R_z(t, v, theta), z)

    def hess_R_theta_z(self, t: float, z: np.ndarray, theta: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        theta = np.asarray(theta, dtype=float)
        if self.running is None or self.running_grad_theta is None:
            return np.zeros(z.shape[:-1] + (theta.size, z.shape[-1]))
        if self.running_hess_theta_z is not None:
            return np.asarray(self.running_hess_theta_z(t, z, theta), dtype=float)
        return batched_central_jacobian(lambda v: self.grad_R_theta(t, v, theta), z)


def check_loss_gradient(loss: LossSpec, z, rtol: float = 1e-4, atol: float = 1e-8) -> bool:
    """terminal_grad 與 terminal 的中央差分是否一致"""
    z = np.asarray(z, dtype=float)
    fd = central_jacobian(lambda v: np.atleast_1d(loss.terminal(v)), z)[0]
    return bool(np.allclose(loss.terminal_grad(z), fd, rtol=rtol, atol=atol))
