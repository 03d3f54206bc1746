"""SGD and Adam over lists of :class:`~mimgan.tensor.Tensor` parameters."""

from __future__ import annotations

import numpy as np

from .tensor import NonFiniteError, ShapeError, Tensor


class Optimizer:
    kind = "base"

    def __init__(self, params, lr: float):
        if lr <= 0:
            raise ValueError("learning rate must be positive")
        self.params: list[Tensor] = list(params)
        self.lr = float(lr)
        self.t = 0

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()

    def _grads(self, grads):
        if grads is None:
            grads = [p.grad if p.grad is not None else np.zeros_like(p.value)
                     for p in self.params]
        grads = list(grads)
        if len(grads) != len(self.params):
            raise ShapeError("number of gradients does not match number of parameters")
        for p, g in zip(self.params, grads):
            if np.shape(g) != p.shape:
                raise ShapeError(f"gradient shape {np.shape(g)} != parameter shape {p.shape}")
            if not np.all(np.isfinite(g)):
                raise NonFiniteError("optimizer: non-finite gradient")
        return grads

    def step(self, grads=None) -> None:
        """Update parameters in place using ``grads`` (default: ``p.grad``)."""
        grads = self._grads(grads)
        self.t += 1
        for i, (p, g) in enumerate(zip(self.params, grads)):
            p.value = p.value - self._delta(i, np.asarray(g, dtype=np.float64))

    def _delta(self, i: int, g: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class SGD(Optimizer):
    kind = "sgd"

    def _delta(self, i, g):
        return self.lr * g


class Adam(Optimizer):
    kind = "adam"

    def __init__(self, params, lr: float = 1e-3, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        super().__init__(params, lr)
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.m = [np.zeros_like(p.value) for p in self.params]
        self.v = [np.zeros_like(p.value) for p in self.params]

    def _delta(self, i, g):
        b1, b2 = self.beta1, self.beta2
        self.m[i] = b1 * self.m[i] + (1 - b1) * g
        self.v[i] = b2 * self.v[i] + (1 - b2) * g * g
        m_hat = self.m[i] / (1 - b1 ** self.t)
        v_hat = self.v[i] / (1 - b2 ** self.t)
        return self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def make_optimizer(kind: str, params, lr: float, **kwargs) -> Optimizer:
    if kind == "sgd":
        return SGD(params, lr)
    if kind == "adam":
        return Adam(params, lr, **kwargs)
    raise ValueError(f"unknown optimizer {kind!r}")
