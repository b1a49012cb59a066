"""
直接 t 方向積分 (oracle)：ż = f(t, z, θ(t))，z(p) = x
"""

from dataclasses import dataclass
from typing import Callable, Literal, Tuple

import numpy as np

from ..core import DynamicsModel, InImNetError, NonFinite, as_state

ThetaSchedule = Callable[[float], np.ndarray]
Method = Literal["euler", "rk4"]


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray    # (steps + 1,)
    states: np.ndarray   # (steps + 1, N)
    thetas: list         # 每一步使用的 θ

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


def integrate_direct(model: DynamicsModel, theta_schedule: ThetaSchedule, x, p: float, q: float,
                     steps: int, method: Method = "euler") -> Trajectory:
    """
    固定步長積分並保留整條軌跡

    θ 在每一步內為常數，取該步中點的 θ_schedule 值 (避開區間端點的浮點誤差)。
    """
    if steps < 1:
        raise InImNetError(f"steps must be >= 1, got {steps}")
    if method not in ("euler", "rk4"):
        raise InImNetError(f"unknown integration method '{method}'")
    x = as_state(x, "x")
    times = np.linspace(p, q, steps + 1)
    states = np.empty((steps + 1, x.size))
    states[0] = x
    thetas = []
    z = x.copy()
    for j in range(steps):
        t = float(times[j])
        h = float(times[j + 1] - times[j])
        theta = theta_schedule(t + 0.5 * h)
        thetas.append(theta)
        if method == "euler":
            z = z + h * model.eval(t, z, theta)
        else:
            k1 = model.eval(t, z, theta)
            k2 = model.eval(t + 0.5 * h, z + 0.5 * h * k1, theta)
            k3 = model.eval(t + 0.5 * h, z + 0.5 * h * k2, theta)
            k4 = model.eval(t + h, z + h * k3, theta)
            z = z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(z)):
            raise NonFinite(f"direct solve blew up at t={t}")
        states[j + 1] = z
    return Trajectory(times=times, states=states, thetas=thetas)


def forward_direct(model: DynamicsModel, theta_schedule: ThetaSchedule, x, p: float, q: float,
                   steps: int, method: Method = "euler") -> np.ndarray:
    """z(q; p, x) 的直接解 (Euler 或 RK4)"""
    if q == p:
        return as_state(x, "x").copy()
    return integrate_direct(model, theta_schedule, x, p, q, steps, method).final


def compose_imbedding(model: DynamicsModel, theta_schedule: ThetaSchedule, x, p2: float, p1: float,
                      q: float, steps: int, method: Method = "euler") -> Tuple[np.ndarray, np.ndarray]:
    """
    imbedding rule 的兩側：z(q; p2, x) 與 z(q; p1, z(p1; p2, x))

    總步數依區間長度比例分配給兩段，使步長盡量一致。
    """
    if not (p2 < p1 < q):
        raise InImNetError(f"compose_imbedding needs p2 < p1 < q, got {p2}, {p1}, {q}")
    lhs = forward_direct(model, theta_schedule, x, p2, q, steps, method)
    first = max(1, int(round(steps * (p1 - p2) / (q - p2))))
    second = max(1, steps - first)
    mid = forward_direct(model, theta_schedule, x, p2, p1, first, method)
    rhs = forward_direct(model, theta_schedule, mid, p1, q, second, method)
    return lhs, rhs
