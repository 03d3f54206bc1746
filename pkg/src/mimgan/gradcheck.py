"""Central finite-difference check of reverse-mode gradients."""

from __future__ import annotations

import numpy as np


def finite_diff_check(model, loss_fn, batch, step: float = 1e-5) -> float:
    """Largest relative disagreement between backward() and central differences.

    ``model`` is anything with ``parameters()`` (or a plain list of
    tensors); ``loss_fn(model, batch)`` must return a scalar tensor.  The
    relative error per entry is ``|a - c| / (|a| + |c| + 1e-12)``.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    params = model.parameters() if hasattr(model, "parameters") else list(model)
    for p in params:
        p.zero_grad()
    loss_fn(model, batch).backward()
    analytic = [p.grad.copy() for p in params]

    worst = 0.0
    for p, a in zip(params, analytic):
        flat = p.value.reshape(-1)
        grad = a.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + step
            up = loss_fn(model, batch).item()
            flat[i] = orig - step
            down = loss_fn(model, batch).item()
            flat[i] = orig
            central = (up - down) / (2 * step)
            err = abs(grad[i] - central) / (abs(grad[i]) + abs(central) + 1e-12)
            worst = max(worst, err)
    return worst
