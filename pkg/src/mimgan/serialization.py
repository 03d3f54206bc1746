"""Model files: a ``MIMGAN1`` header line followed by a JSON document.

Floats are written with their shortest round-trip repr, so a saved model
reloads bit-exactly.
"""

from __future__ import annotations

import json

import numpy as np

from .nn import LayerSpec, MlpModel
from .tensor import Tensor

MAGIC = "MIMGAN1"


class ModelFormatError(ValueError):
    pass


def model_to_dict(model: MlpModel, meta: dict | None = None) -> dict:
    return {
        "layers": [
            {"fan_in": s.fan_in, "fan_out": s.fan_out, "activation": s.activation}
            for s in model.layers
        ],
        "weights": [w.value.tolist() for w in model.weights],
        "biases": [b.value.reshape(-1).tolist() for b in model.biases],
        "out_scale": None if model.out_scale is None else model.out_scale.reshape(-1).tolist(),
        "out_shift": None if model.out_shift is None else model.out_shift.reshape(-1).tolist(),
        "meta": meta or {},
    }


def model_from_dict(d: dict) -> tuple[MlpModel, dict]:
    try:
        layers = [LayerSpec(l["fan_in"], l["fan_out"], l["activation"]) for l in d["layers"]]
        weights = [Tensor(np.asarray(w, dtype=np.float64).reshape(s.fan_in, s.fan_out), True)
                   for w, s in zip(d["weights"], layers)]
        biases = [Tensor(np.asarray(b, dtype=np.float64).reshape(1, s.fan_out), True)
                  for b, s in zip(d["biases"], layers)]
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"malformed model document: {exc}") from exc
    model = MlpModel(layers, weights, biases)
    if d.get("out_scale") is not None:
        model.out_scale = np.asarray(d["out_scale"], dtype=np.float64).reshape(1, -1)
        model.out_shift = np.asarray(d["out_shift"], dtype=np.float64).reshape(1, -1)
    return model, d.get("meta", {})


def save_model(path, model: MlpModel, meta: dict | None = None) -> None:
    with open(path, "w") as fh:
        fh.write(MAGIC + "\n")
        json.dump(model_to_dict(model, meta), fh, sort_keys=True)
        fh.write("\n")


def load_model(path) -> tuple[MlpModel, dict]:
    with open(path) as fh:
        header = fh.readline().rstrip("\n")
        if header != MAGIC:
            raise ModelFormatError(f"{path}: not a model file (header {header!r}, expected {MAGIC!r})")
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"{path}: {exc}") from exc
    return model_from_dict(doc)
