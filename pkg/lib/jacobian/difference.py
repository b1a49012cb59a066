"""
差分商 Jacobian：對稱差分 (2N+1 co-states) 與 Newton 前向差分 (N+1 co-states)
"""

from dataclasses import dataclass
from typing import Callable, Literal, Tuple

import numpy as np

from ..core import InImNetError, NonFinite

DifferenceMode = Literal["symmetric", "newton"]


@dataclass(frozen=True, eq=False)
class CoStateBundle:
    """
    共同演化的平移輸入

    inputs 第 0 列是中心 x，接著 x + Δ_b e_b；symmetric 時再接 x − Δ_b e_b。
    """
    mode: DifferenceMode
    center: np.ndarray
    deltas: np.ndarray
    inputs: np.ndarray

    @classmethod
    def build(cls, mode: DifferenceMode, x, deltas) -> "CoStateBundle":
        if mode not in ("symmetric", "newton"):
            raise InImNetError(f"co-state bundles support symmetric/newton, got '{mode}'")
        x = np.asarray(x, dtype=float).reshape(-1)
        deltas = np.asarray(deltas, dtype=float).reshape(-1)
        if deltas.size != x.size or np.any(deltas <= 0.0) or not np.all(np.isfinite(deltas)):
            raise InImNetError(f"deltas must be {x.size} positive finite values, got {deltas}")
        shifts = np.diag(deltas)
        rows = [x[None, :], x + shifts]
        if mode == "symmetric":
            rows.append(x - shifts)
        return cls(mode=mode, center=x, deltas=deltas, inputs=np.concatenate(rows, axis=0))

    @property
    def size(self) -> int:
        return int(self.inputs.shape[0])

    def jacobian(self, values: np.ndarray) -> np.ndarray:
        """由 co-state 值 (K, dim) 組出 (dim, N) 的 Jacobian 估計"""
        n = self.center.size
        plus = values[1:n + 1]
        if self.mode == "symmetric":
            minus = values[n + 1:2 * n + 1]
            cols = (plus - minus) / (2.0 * self.deltas[:, None])
        else:
            cols = (plus - values[0][None, :]) / self.deltas[:, None]
        return cols.T

    def closure_weights(self, shift_sign: float = 1.0) -> np.ndarray:
        """
        每個 co-state 使用的 Jacobian 倍數

        symmetric：全部使用中心估計。newton：平移狀態使用 shift_sign·J。
        """
        weights = np.ones(self.size)
        if self.mode == "newton":
            weights[1:] = shift_sign
        return weights

    def vjp(self, jac_bar: np.ndarray) -> np.ndarray:
        """jacobian() 的 adjoint：把 ∂L/∂J (dim, N) 轉回 ∂L/∂values (K, dim)"""
        n = self.center.size
        out = np.zeros((self.size, jac_bar.shape[0]))
        cols = jac_bar.T
        if self.mode == "symmetric":
            out[1:n + 1] = cols / (2.0 * self.deltas[:, None])
            out[n + 1:2 * n + 1] = -cols / (2.0 * self.deltas[:, None])
        else:
            out[1:n + 1] = cols / self.deltas[:, None]
            out[0] = -np.sum(cols / self.deltas[:, None], axis=0)
        return out


def _difference_bundle(mode: DifferenceMode, evolve: Callable[[np.ndarray], np.ndarray], x, deltas) -> Tuple[np.ndarray, np.ndarray]:
    bundle = CoStateBundle.build(mode, x, deltas)
    values = np.asarray(evolve(bundle.inputs), dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    if not np.all(np.isfinite(values)):
        raise NonFinite(f"{mode} co-state diverged")
    return values[0], bundle.jacobian(values)


def symmetric_diff_bundle(evolve: Callable[[np.ndarray], np.ndarray], x, deltas) -> Tuple[np.ndarray, np.ndarray]:
    """
    對稱差分商：2N+1 個 co-state，第 i 欄 = (z(x+Δ_i e_i) − z(x−Δ_i e_i)) / 2Δ_i

    Args:
        evolve: 把一批輸入 (K, N) 映到輸出 (K, dim) 的確定性函式
        x: 中心輸入
        deltas: 每個座標的 Δ_i

    Returns:
        (中心輸出, (dim, N) Jacobian)
    """
    return _difference_bundle("symmetric", evolve, x, deltas)


def newton_diff_bundle(evolve: Callable[[np.ndarray], np.ndarray], x, deltas) -> Tuple[np.ndarray, np.ndarray]:
    """Newton 前向差分商：N+1 個 co-state，第 i 欄 = (z(x+Δ_i e_i) − z(x)) / Δ_i"""
    return _difference_bundle("newton", evolve, x, deltas)
