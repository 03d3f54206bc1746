"""Fully connected networks built on :mod:`mimgan.tensor`."""

from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from . import tensor as T
from ._rng import make_rng
from .tensor import ShapeError, Tensor, as_matrix

ACTIVATIONS = {
    "leaky-relu": T.leaky_relu,
    "sigmoid": T.sigmoid,
    "tanh": T.tanh,
    "identity": T.identity,
}


@dataclass(frozen=True)
class LayerSpec:
    fan_in: int
    fan_out: int
    activation: str = "leaky-relu"

    def __post_init__(self):
        if self.fan_in < 1 or self.fan_out < 1:
            raise ValueError(f"layer sizes must be positive, got {self.fan_in}->{self.fan_out}")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")


def mlp_specs(sizes, hidden_activation="leaky-relu", output_activation="identity"):
    """Layer specs for the size chain ``sizes[0] -> ... -> sizes[-1]``."""
    sizes = list(sizes)
    if len(sizes) < 2:
        raise ValueError("need at least input and output sizes")
    acts = [hidden_activation] * (len(sizes) - 2) + [output_activation]
    return [LayerSpec(a, b, act) for a, b, act in zip(sizes[:-1], sizes[1:], acts)]


@dataclass
class MlpModel:
    """A chain of dense layers.

    ``out_scale``/``out_shift`` apply a fixed affine map after the last
    activation; generators use it to stretch a tanh head over the data
    range.  They are metadata, not trained parameters.
    """

    layers: list[LayerSpec]
    weights: list[Tensor] = field(default_factory=list)
    biases: list[Tensor] = field(default_factory=list)
    out_scale: np.ndarray | None = None
    out_shift: np.ndarray | None = None

    def __post_init__(self):
        if not self.layers:
            raise ValueError("an MLP needs at least one layer")
        for a, b in zip(self.layers[:-1], self.layers[1:]):
            if a.fan_out != b.fan_in:
                raise ShapeError(f"layers do not chain: {a.fan_out} != {b.fan_in}")
        for i, spec in enumerate(self.layers):
            if i < len(self.weights):
                if self.weights[i].shape != (spec.fan_in, spec.fan_out):
                    raise ShapeError(f"layer {i}: weight shape {self.weights[i].shape}")
                if self.biases[i].shape != (1, spec.fan_out):
                    raise ShapeError(f"layer {i}: bias shape {self.biases[i].shape}")
        if len(self.weights) not in (0, len(self.layers)) or len(self.biases) != len(self.weights):
            raise ShapeError("parameter lists do not match the layer list")

    @classmethod
    def init(cls, layers, seed: int, label="mlp") -> "MlpModel":
        """Glorot-uniform weights, zero biases."""
        rng = make_rng(seed, "init", label)
        weights, biases = [], []
        for spec in layers:
            bound = math.sqrt(6.0 / (spec.fan_in + spec.fan_out))
            w = rng.uniform(-bound, bound, size=(spec.fan_in, spec.fan_out))
            weights.append(Tensor(w, requires_grad=True))
            biases.append(Tensor(np.zeros((1, spec.fan_out)), requires_grad=True))
        return cls(list(layers), weights, biases)

    @property
    def in_dim(self) -> int:
        return self.layers[0].fan_in

    @property
    def out_dim(self) -> int:
        return self.layers[-1].fan_out

    def parameters(self) -> list[Tensor]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.zero_grad()

    def set_output_range(self, low, high) -> None:
        """Map a (-1, 1) output head onto ``[low, high]`` per feature."""
        low = np.asarray(low, dtype=np.float64).reshape(1, -1)
        high = np.asarray(high, dtype=np.float64).reshape(1, -1)
        if low.shape[1] != self.out_dim or high.shape != low.shape:
            raise ShapeError("output range does not match the output dimension")
        self.out_scale = (high - low) / 2.0
        self.out_shift = (high + low) / 2.0

    def forward(self, batch) -> Tensor:
        """Run the network; the returned tensor carries the recorded graph."""
        if isinstance(batch, Tensor):
            x = batch
        else:
            x = Tensor(as_matrix(batch, "batch"))
        if x.value.ndim != 2 or x.shape[1] != self.in_dim:
            raise ShapeError(f"batch has shape {x.shape}, model expects {self.in_dim} columns")
        for spec, w, b in zip(self.layers, self.weights, self.biases):
            x = ACTIVATIONS[spec.activation](T.add_bias(T.matmul(x, w), b))
        if self.out_scale is not None:
            x = T.add(T.multiply(x, Tensor(self.out_scale)), Tensor(self.out_shift))
        return x

    __call__ = forward

    def predict(self, batch) -> np.ndarray:
        """Forward pass without keeping a graph."""
        x = as_matrix(batch, "batch")
        if x.shape[1] != self.in_dim:
            raise ShapeError(f"batch has shape {x.shape}, model expects {self.in_dim} columns")
        for spec, w, b in zip(self.layers, self.weights, self.biases):
            x = ACTIVATIONS[spec.activation](Tensor(x @ w.value + b.value)).value
        if self.out_scale is not None:
            x = x * self.out_scale + self.out_shift
        return x

    def copy(self) -> "MlpModel":
        m = MlpModel(
            list(self.layers),
            [Tensor(w.value.copy(), True) for w in self.weights],
            [Tensor(b.value.copy(), True) for b in self.biases],
        )
        if self.out_scale is not None:
            m.out_scale = self.out_scale.copy()
            m.out_shift = self.out_shift.copy()
        return m

    def state_equal(self, other: "MlpModel") -> bool:
        if self.layers != other.layers:
            return False
        pairs = zip(self.parameters(), other.parameters())
        return all(np.array_equal(a.value, b.value) for a, b in pairs)


@contextmanager
def frozen(*models: MlpModel):
    """Temporarily stop recording gradients for the models' parameters."""
    params = [p for m in models for p in m.parameters()]
    saved = [p.requires_grad for p in params]
    for p in params:
        p.requires_grad = False
    try:
        yield
    finally:
        for p, flag in zip(params, saved):
            p.requires_grad = flag
