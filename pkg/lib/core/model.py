"""
Training function f(t, z, θ) 的介面

所有模型都接受批次狀態 z.shape == (..., N)，θ 為單一向量 (M,)。
二階量 (hess_z, hess_theta_z, jac_z_vjp_theta) 預設以一階偏導的中央差分計算，
有解析式的模型可覆寫。
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from .types import LayerParams

FD_EPS = 1e-5


def _fd_steps(z: np.ndarray, eps: float) -> np.ndarray:
    return eps * (1.0 + np.abs(z))


class DynamicsModel(ABC):
    """f(t, z, θ) 以及它的偏導數"""

    state_dim: int
    param_count: int = 0
    # False 時 f 顯式依賴 t (Λt 需要 autonomous)
    autonomous: bool = True
    has_d_dz: bool = True
    has_d_dtheta: bool = True

    @abstractmethod
    def eval(self, t: float, z: np.ndarray, theta: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def d_dz(self, t: float, z: np.ndarray, theta: np.ndarray) -> np.ndarray:
        ...

    def d_dtheta(self, t: float, z: np.ndarray, theta: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        return np.zeros(z.shape + (self.param_count,))

    def d_dt(self, t: float, z: np.ndarray, theta: np.ndarray) -> np.ndarray:
        return np.zeros_like(np.asarray(z, dtype=float))

    # === 二階量 (中央差分預設) ===

    def hess_z(self, t: float, z: np.ndarray, theta: np.ndarray, w: np.ndarray) -> np.ndarray:
        """Σ_j w_j ∇²_z f_j，shape (..., N, N)"""
        z = np.asarray(z, dtype=float)
        w = np.asarray(w, dtype=float)
        n = z.shape[-1]
        steps = _fd_steps(z, FD_EPS)
        out = np.empty(z.shape + (n,))
        for b in range(n):
            dz = np.zeros_like(z)
            dz[..., b] = steps[..., b]
            plus = np.einsum("...ji,...j->...i", self.d_dz(t, z + dz, theta), w)
            minus = np.einsum("...ji,...j->...i", self.d_dz(t, z - dz, theta), w)
            out[..., :, b] = (plus - minus) / (2.0 * steps[..., b, None])
        return 0.5 * (out + np.swapaxes(out, -1, -2))

    def hess_theta_z(self, t: float, z: np.ndarray, theta: np.ndarray, w: np.ndarray) -> np.ndarray:
        """∂_z (∇_θ f^T w)，shape (..., M, N)"""
        z = np.asarray(z, dtype=float)
        w = np.asarray(w, dtype=float)
        n = z.shape[-1]
        steps = _fd_steps(z, FD_EPS)
        out = np.empty(z.shape[:-1] + (self.param_count, n))
        for b in range(n):
            dz = np.zeros_like(z)
            dz[..., b] = steps[..., b]
            plus = np.einsum("...jm,...j->...m", self.d_dtheta(t, z + dz, theta), w)
            minus = np.einsum("...jm,...j->...m", self.d_dtheta(t, z - dz, theta), w)
            out[..., :, b] = (plus - minus) / (2.0 * steps[..., b, None])
        return out

    def jac_z_vjp_theta(self, t: float, z: np.ndarray, theta: np.ndarray, G: np.ndarray) -> np.ndarray:
        """∂_θ Σ_ab G_ab ∂f_a/∂z_b，shape (..., M)"""
        z = np.asarray(z, dtype=float)
        G = np.asarray(G, dtype=float)
        n = z.shape[-1]
        steps = _fd_steps(z, FD_EPS)
        out = np.zeros(z.shape[:-1] + (self.param_count,))
        for b in range(n):
            dz = np.zeros_like(z)
            dz[..., b] = steps[..., b]
            diff = self.d_dtheta(t, z + dz, theta) - self.d_dtheta(t, z - dz, theta)
            out += np.einsum("...jm,...j->...m", diff, G[..., :, b]) / (2.0 * steps[..., b, None])
        return out


def phi(model: DynamicsModel, layers: LayerParams, t: float, layer: int, x: np.ndarray) -> np.ndarray:
    """Φ(p, x) = f(p, x, Ψ(p, x))，Ψ 為該層的參數"""
    return model.eval(float(t), x, layers.at(layer))


@dataclass
class ContractReport:
    d_dz_error: float
    d_dtheta_error: float
    samples: int
    ok: bool


def central_jacobian(fn, z: np.ndarray, eps: float = 1e-6) -> np.ndarray:
    """fn: R^N -> R^K 的中央差分 Jacobian (K, N)"""
    z = np.asarray(z, dtype=float)
    cols = []
    for b in range(z.size):
        step = eps * (1.0 + abs(z[b]))
        dz = np.zeros_like(z)
        dz[b] = step
        cols.append((np.atleast_1d(fn(z + dz)) - np.atleast_1d(fn(z - dz))) / (2.0 * step))
    return np.stack(cols, axis=-1)


def check_partials(model: DynamicsModel, rng: np.random.Generator, samples: int = 100,
                   rtol: float = 1e-4, atol: float = 1e-8, theta_scale: float = 0.5) -> ContractReport:
    """
    以中央差分檢查 d_dz / d_dtheta

    每個樣本在 (t, z, θ) 隨機取點；報告最大絕對誤差，ok 以 allclose(rtol, atol) 判定。
    """
    worst_z = 0.0
    worst_theta = 0.0
    ok = True
    for _ in range(samples):
        t = float(rng.uniform(-1.0, 0.0))
        z = rng.normal(size=model.state_dim)
        theta = theta_scale * rng.normal(size=model.param_count)

        fd_z = central_jacobian(lambda v: model.eval(t, v, theta), z)
        an_z = model.d_dz(t, z, theta)
        err_z = float(np.max(np.abs(an_z - fd_z)))
        worst_z = max(worst_z, err_z)
        ok &= bool(np.allclose(an_z, fd_z, rtol=rtol, atol=atol))

        if model.param_count:
            fd_th = central_jacobian(lambda v: model.eval(t, z, v), theta)
            an_th = model.d_dtheta(t, z, theta)
            err_th = float(np.max(np.abs(an_th - fd_th)))
            worst_theta = max(worst_theta, err_th)
            ok &= bool(np.allclose(an_th, fd_th, rtol=rtol, atol=atol))
    return ContractReport(d_dz_error=worst_z, d_dtheta_error=worst_theta, samples=samples, ok=ok)


def batched_central_jacobian(fn, z: np.ndarray, eps: float = FD_EPS) -> np.ndarray:
    """批次版本：fn 把 (..., N) 映到 (..., K)，回傳 (..., K, N)"""
    z = np.asarray(z, dtype=float)
    steps = _fd_steps(z, eps)
    cols = []
    for b in range(z.shape[-1]):
        dz = np.zeros_like(z)
        dz[..., b] = steps[..., b]
        cols.append((np.asarray(fn(z + dz)) - np.asarray(fn(z - dz))) / (2.0 * steps[..., b, None]))
    return np.stack(cols, axis=-1)
