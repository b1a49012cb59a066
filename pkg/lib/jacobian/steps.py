"""
單步 Jacobian 更新
"""

import numpy as np


def exact_sensitivity_step(J: np.ndarray, grad_f: np.ndarray, h: float) -> np.ndarray:
    """
    variational equation d/dt ∇_x z = ∇_z f · ∇_x z 的一個 forward-Euler 步

    支援批次 (..., N, N)。
    """
    return J + h * (grad_f @ J)


def cropped_jacobian_step(J_prev: np.ndarray, phi_grad: np.ndarray, h: float) -> np.ndarray:
    """
    略去 ∇_x∇_x z · Φ 的 Jacobian 更新

    J(p_i) ≈ J(p_{i+1}) + h·J(p_{i+1})·∇_xΦ(p_i, x)，h = p_{i+1} − p_i > 0
    """
    J_prev = np.atleast_2d(np.asarray(J_prev, dtype=float))
    phi_grad = np.atleast_2d(np.asarray(phi_grad, dtype=float))
    return J_prev + h * (J_prev @ phi_grad)


def field_jacobian_step(K: np.ndarray, phi_grad: np.ndarray, source_q: np.ndarray,
                        source_x: np.ndarray, h: float) -> np.ndarray:
    """
    一般 imbedded 量 Q 的 cropped Jacobian 更新

    Q 滿足 −∂_pQ = ∇_xQ·Φ + S(x, Q)，故
    K_i = K_{i+1} + h [K_{i+1}∇_xΦ + S_Q K_{i+1} + S_x]
    """
    return K + h * (K @ phi_grad + source_q @ K + source_x)
