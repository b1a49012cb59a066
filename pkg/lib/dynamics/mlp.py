"""
MLP 動態 f(t, z, θ)

隱藏層使用 tanh，輸出層為 identity；θ 依序攤平 (W_1, b_1, ..., W_k, b_k)，
W 為 row-major 的 (out, in) 矩陣。time_feature=True 時把 t 接在輸入最後。
"""

from typing import List, Sequence, Tuple

import numpy as np

from ..core import DynamicsModel, InImNetError, ParamLengthMismatch


class MlpDynamics(DynamicsModel):
    def __init__(self, sizes: Sequence[int], time_feature: bool = False):
        sizes = [int(s) for s in sizes]
        if len(sizes) < 2 or any(s < 1 for s in sizes):
            raise InImNetError(f"invalid MLP layer sizes {sizes}")
        if sizes[0] != sizes[-1]:
            raise InImNetError(f"MLP must map R^N to R^N, got sizes {sizes}")
        self.sizes = sizes
        self.time_feature = bool(time_feature)
        self.autonomous = not self.time_feature
        self.state_dim = sizes[0]

        fan_in = [sizes[0] + (1 if self.time_feature else 0)] + sizes[1:-1]
        self.shapes: List[Tuple[int, int]] = list(zip(sizes[1:], fan_in))
        self.offsets = []
        offset = 0
        for out_dim, in_dim in self.shapes:
            self.offsets.append(offset)
            offset += out_dim * in_dim + out_dim
        self.param_count = offset

    def init_params(self, rng: np.random.Generator) -> np.ndarray:
        """權重與偏差 ~ U[-s, s]，s = 1/sqrt(fan_in)"""
        chunks = []
        for out_dim, in_dim in self.shapes:
            s = 1.0 / np.sqrt(in_dim)
            chunks.append(rng.uniform(-s, s, size=out_dim * in_dim))
            chunks.append(rng.uniform(-s, s, size=out_dim))
        return np.concatenate(chunks)

    def unpack(self, theta) -> List[Tuple[np.ndarray, np.ndarray]]:
        theta = np.asarray(theta, dtype=float).reshape(-1)
        if theta.size != self.param_count:
            raise ParamLengthMismatch(f"MLP {self.sizes} expects {self.param_count} parameters, got {theta.size}")
        layers = []
        for (out_dim, in_dim), offset in zip(self.shapes, self.offsets):
            W = theta[offset:offset + out_dim * in_dim].reshape(out_dim, in_dim)
            b = theta[offset + out_dim * in_dim:offset + out_dim * in_dim + out_dim]
            layers.append((W, b))
        return layers

    def _input(self, t, z):
        z = np.asarray(z, dtype=float)
        if not self.time_feature:
            return z
        return np.concatenate([z, np.full(z.shape[:-1] + (1,), float(t))], axis=-1)

    def _forward(self, t, z, theta):
        """回傳每層輸入 u_l、隱藏層 pre-activation a_l 與輸出"""
        layers = self.unpack(theta)
        u = self._input(t, z)
        inputs, preacts = [], []
        for idx, (W, b) in enumerate(layers):
            inputs.append(u)
            a = u @ W.T + b
            if idx == len(layers) - 1:
                return layers, inputs, preacts, a
            preacts.append(a)
            u = np.tanh(a)

    def eval(self, t, z, theta):
        return self._forward(t, z, theta)[3]

    def _input_jacobian(self, t, z, theta):
        layers, _, preacts, out = self._forward(t, z, theta)
        W0 = layers[0][0]
        jac = np.broadcast_to(W0, out.shape[:-1] + W0.shape).copy()
        for (W, _), a in zip(layers[1:], preacts):
            jac = (1.0 - np.tanh(a) ** 2)[..., :, None] * jac
            jac = np.einsum("oh,...hi->...oi", W, jac)
        return jac

    def d_dz(self, t, z, theta):
        return self._input_jacobian(t, z, theta)[..., :, : self.state_dim]

    def d_dt(self, t, z, theta):
        if not self.time_feature:
            return np.zeros_like(np.asarray(z, dtype=float))
        return self._input_jacobian(t, z, theta)[..., :, self.state_dim]

    def d_dtheta(self, t, z, theta):
        layers, inputs, preacts, out = self._forward(t, z, theta)
        n = self.state_dim
        lead = out.shape[:-1]
        blocks = [None] * len(layers)
        # G = ∂out/∂a_l，從輸出層往回傳
        G = np.broadcast_to(np.eye(n), lead + (n, n)).copy()
        for l in range(len(layers) - 1, -1, -1):
            W, _ = layers[l]
            u = inputs[l]
            dW = np.einsum("...no,...i->...noi", G, u).reshape(lead + (n, W.size))
            blocks[l] = np.concatenate([dW, G], axis=-1)
            if l > 0:
                G = np.einsum("...no,oi->...ni", G, W) * (1.0 - np.tanh(preacts[l - 1]) ** 2)[..., None, :]
        return np.concatenate(blocks, axis=-1)

    def describe(self) -> dict:
        return {"type": "mlp", "sizes": list(self.sizes), "time_feature": self.time_feature}


def mlp_eval(model: MlpDynamics, t: float, z, theta) -> np.ndarray:
    """前饋計算；θ 長度不符時丟出 ParamLengthMismatch"""
    return model.eval(t, z, theta)
