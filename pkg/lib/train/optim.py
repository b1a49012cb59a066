"""
一階最佳化器：SGD 與 Adam，作用在攤平的參數向量上
"""

from abc import ABC, abstractmethod

import numpy as np

from ..core import InImNetError


class Optimizer(ABC):
    @abstractmethod
    def step(self, params: np.ndarray, grad: np.ndarray, lr: float) -> np.ndarray:
        ...


class SGD(Optimizer):
    def step(self, params, grad, lr):
        return params - lr * grad


class Adam(Optimizer):
    def __init__(self, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = None
        self.v = None
        self.t = 0

    def step(self, params, grad, lr):
        if self.m is None:
            self.m = np.zeros_like(params)
            self.v = np.zeros_like(params)
        self.t += 1
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * grad * grad
        m_hat = self.m / (1.0 - self.beta1 ** self.t)
        v_hat = self.v / (1.0 - self.beta2 ** self.t)
        return params - lr * m_hat / (np.sqrt(v_hat) + self.eps)


def make_optimizer(name: str) -> Optimizer:
    if name == "sgd":
        return SGD()
    if name == "adam":
        return Adam()
    raise InImNetError(f"unknown optimizer '{name}'")
