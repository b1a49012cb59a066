"""
解析軌跡 (測試 oracle)
"""

import numpy as np
from scipy.linalg import expm

from ..core import InImNetError, NonFinite


def linear_closed_form(A, b, x, p: float, q: float) -> np.ndarray:
    """
    ż = A z + b, z(p) = x 的精確解 z(q)

    以增廣矩陣 [[A, b], [0, 0]]·(q − p) 的 matrix exponential (scaling and squaring + Padé)
    一次算出 exp(A τ) x + ∫_0^τ exp(A s) ds · b。
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    n = A.shape[0]
    b = np.zeros(n) if b is None else np.asarray(b, dtype=float).reshape(-1)
    x = np.asarray(x, dtype=float).reshape(-1)
    if q < p:
        raise InImNetError(f"closed form needs q >= p, got p={p}, q={q}")
    aug = np.zeros((n + 1, n + 1))
    aug[:n, :n] = A
    aug[:n, n] = b
    with np.errstate(over="raise", invalid="raise"):
        try:
            flow = expm(aug * (q - p))
            out = flow[:n, :n] @ x + flow[:n, n]
        except FloatingPointError as e:
            raise NonFinite(f"matrix exponential overflowed: {e}")
    if not np.all(np.isfinite(out)):
        raise NonFinite("matrix exponential overflowed")
    return out


def projectile_closed_form(g: float, x, p: float, q: float) -> np.ndarray:
    """[h0 + v0·τ − g·τ²/2, v0 − g·τ]，τ = q − p"""
    if q < p:
        raise InImNetError(f"closed form needs q >= p, got p={p}, q={q}")
    h0, v0 = np.asarray(x, dtype=float).reshape(-1)[:2]
    tau = q - p
    return np.array([h0 + v0 * tau - 0.5 * g * tau * tau, v0 - g * tau])
