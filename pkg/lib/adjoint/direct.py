"""
Euler–Lagrange oracle：沿直接解的軌跡反向解離散 adjoint

λ_N = ∇T(z_N)
λ_j = λ_{j+1} + h (∇_z f_jᵀ λ_{j+1} + ∇_z R_j)

對 forward-Euler 軌跡而言 λ_0 正是離散 loss 對 x 的精確梯度；
θ 的梯度同時累加 h (∇_θ f_jᵀ λ_{j+1} + ∇_θ R_j)。
"""

from dataclasses import dataclass

import numpy as np

from ..core import DynamicsModel, LossSpec, NonFinite
from ..propagate import Trajectory


@dataclass(frozen=True, eq=False)
class DirectAdjoint:
    times: np.ndarray
    lam: np.ndarray          # (steps + 1, N)
    theta_grad: np.ndarray   # (M,)
    loss: float

    @property
    def input_grad(self) -> np.ndarray:
        return self.lam[0]


def adjoint_direct(model: DynamicsModel, theta_schedule, trajectory: Trajectory, loss: LossSpec) -> DirectAdjoint:
    times = trajectory.times
    states = trajectory.states
    steps = times.size - 1
    lam = np.empty_like(states)
    lam[-1] = loss.terminal_grad(states[-1])
    m = model.param_count
    theta_grad = np.zeros(m)
    total = float(loss.terminal(states[-1]))
    for j in range(steps - 1, -1, -1):
        t = float(times[j])
        h = float(times[j + 1] - times[j])
        theta = trajectory.thetas[j] if trajectory.thetas else theta_schedule(t + 0.5 * h)
        z = states[j]
        A = model.d_dz(t, z, theta)
        nxt = lam[j + 1]
        if m:
            theta_grad += h * (model.d_dtheta(t, z, theta).T @ nxt + loss.grad_R_theta(t, z, theta))
        lam[j] = nxt + h * (A.T @ nxt + loss.grad_R_z(t, z, theta))
        total += h * float(loss.R(t, z, theta))
        if not np.all(np.isfinite(lam[j])):
            raise NonFinite(f"adjoint sweep diverged at t={t}")
    return DirectAdjoint(times=times, lam=lam, theta_grad=theta_grad, loss=total)
