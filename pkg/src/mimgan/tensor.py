"""Dense float64 matrices with define-by-run reverse-mode differentiation.

A :class:`Tensor` wraps a numpy array.  Every operation on tensors that
require gradients records a node (op name, parent tensors, backward rule);
``loss.backward()`` walks those nodes once in reverse topological order and
accumulates adjoints into the leaf tensors' ``grad``.

All values are float64 and are checked for NaN/Inf after each operation.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

LEAKY_SLOPE = 0.2


class ShapeError(ValueError):
    pass


class NonFiniteError(ValueError):
    pass


class DomainError(ValueError):
    pass


class GraphError(RuntimeError):
    pass


def as_matrix(x, name: str = "matrix") -> np.ndarray:
    """Coerce *x* to a finite 2-D float64 array (rows x cols)."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(1, -1)
    elif arr.ndim != 2:
        raise ShapeError(f"{name}: expected 2-D data, got shape {arr.shape}")
    _check_finite(arr, name)
    return arr


def _check_finite(arr: np.ndarray, what: str) -> None:
    # the sum is non-finite whenever an entry is; only then pay for a full scan
    if not np.isfinite(arr.sum()) and not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"{what}: non-finite value encountered")


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    # sum out axes that numpy broadcasting introduced or stretched
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Tensor:
    """A float64 array node in the differentiation graph."""

    __slots__ = ("value", "grad", "requires_grad", "op", "_parents", "_backward")
    __array_priority__ = 100  # make ndarray <op> Tensor defer to Tensor

    def __init__(self, value, requires_grad: bool = False, *, op: str = "leaf",
                 parents: Sequence["Tensor"] = (), backward: Callable | None = None):
        arr = np.asarray(value, dtype=np.float64)
        _check_finite(arr, op)
        self.value = arr
        self.requires_grad = requires_grad
        self.grad: np.ndarray | None = None
        self.op = op
        self._parents = tuple(parents)
        self._backward = backward

    def __repr__(self) -> str:
        return f"Tensor(op={self.op}, shape={self.shape}, value={self.value!r})"

    @property
    def shape(self) -> tuple:
        return self.value.shape

    def numpy(self) -> np.ndarray:
        return self.value

    def item(self) -> float:
        return float(self.value.reshape(()))

    def detach(self) -> "Tensor":
        return Tensor(self.value)

    def zero_grad(self) -> None:
        self.grad = np.zeros_like(self.value)

    # ------------------------------------------------------------------
    # backward pass
    # ------------------------------------------------------------------
    def backward(self, seed: float = 1.0) -> None:
        """Propagate ``seed * d(self)`` to every leaf that requires grad.

        ``self`` must be a scalar produced by recorded operations.  The
        recorded graph is released afterwards, so a second call raises.
        """
        if self.value.size != 1:
            raise ShapeError(f"backward needs a scalar loss, got shape {self.shape}")
        if self._backward is None:
            if self.op == "leaf":
                raise GraphError("backward called on a leaf: no forward pass recorded")
            raise GraphError("graph already consumed by an earlier backward call")

        order = _topological(self)
        adjoints = {id(self): np.full(self.shape, float(seed))}
        for node in reversed(order):
            g = adjoints.pop(id(node), None)
            if g is None:
                continue
            if node._backward is None:
                if node.requires_grad:
                    node.grad = g.copy() if node.grad is None else node.grad + g
                continue
            needs = tuple(p.requires_grad for p in node._parents)
            for parent, pg in zip(node._parents, node._backward(g, needs)):
                if pg is None:
                    continue
                pg = _unbroadcast(pg, parent.shape)
                prev = adjoints.get(id(parent))
                adjoints[id(parent)] = pg if prev is None else prev + pg
        for node in order:
            if node._backward is not None:
                node._backward = None
                node._parents = ()

    # ------------------------------------------------------------------
    # operator sugar (all "affine-combination" nodes)
    # ------------------------------------------------------------------
    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return add(self, other, beta=-1.0)

    def __rsub__(self, other):
        return add(other, self, beta=-1.0)

    def __neg__(self):
        return scale(self, -1.0)

    def __mul__(self, other):
        if isinstance(other, Tensor):
            return multiply(self, other)
        return scale(self, float(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Tensor):
            raise TypeError("division by a Tensor is not supported")
        return scale(self, 1.0 / float(other))

    def __pow__(self, k):
        return power(self, float(k))

    def __matmul__(self, other):
        return matmul(self, other)


def _topological(root: Tensor) -> list[Tensor]:
    order: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if id(parent) not in seen and parent.requires_grad:
                stack.append((parent, False))
    return order


def _wrap(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _node(value, op: str, parents: Sequence[Tensor], backward: Callable) -> Tensor:
    needs = any(p.requires_grad for p in parents)
    if not needs:
        return Tensor(value, op=op)
    return Tensor(value, True, op=op, parents=parents, backward=backward)


# ----------------------------------------------------------------------
# primitive ops
# ----------------------------------------------------------------------
def matmul(a, b) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    if a.value.ndim != 2 or b.value.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: incompatible shapes {a.shape} and {b.shape}")
    av, bv = a.value, b.value
    return _node(av @ bv, "matmul", (a, b),
                 lambda g, n: (g @ bv.T if n[0] else None, av.T @ g if n[1] else None))


def add_bias(x, bias) -> Tensor:
    x, bias = _wrap(x), _wrap(bias)
    if bias.value.ndim != 2 or bias.shape[0] != 1 or bias.shape[1] != x.shape[-1]:
        raise ShapeError(f"add_bias: bias shape {bias.shape} does not fit {x.shape}")
    return _node(x.value + bias.value, "add-bias", (x, bias),
                 lambda g, n: (g, g.sum(axis=0, keepdims=True) if n[1] else None))


def _sigmoid(v: np.ndarray) -> np.ndarray:
    return 0.5 * (np.tanh(0.5 * v) + 1.0)


def sigmoid(x) -> Tensor:
    x = _wrap(x)
    y = _sigmoid(x.value)
    return _node(y, "sigmoid", (x,), lambda g, n: (g * y * (1.0 - y),))


def tanh(x) -> Tensor:
    x = _wrap(x)
    y = np.tanh(x.value)
    return _node(y, "tanh", (x,), lambda g, n: (g * (1.0 - y * y),))


def leaky_relu(x, slope: float = LEAKY_SLOPE) -> Tensor:
    x = _wrap(x)
    d = slope + (1.0 - slope) * (x.value > 0)
    return _node(x.value * d, "leaky-relu", (x,), lambda g, n: (g * d,))


def identity(x) -> Tensor:
    return _wrap(x)


def exp(x) -> Tensor:
    x = _wrap(x)
    with np.errstate(over="ignore"):
        y = np.exp(x.value)
    return _node(y, "exp", (x,), lambda g, n: (g * y,))


def log(x) -> Tensor:
    x = _wrap(x)
    xv = x.value
    if np.any(xv <= 0):
        raise DomainError("log: argument must be strictly positive")
    return _node(np.log(xv), "log", (x,), lambda g, n: (g / xv,))


def mean(x) -> Tensor:
    x = _wrap(x)
    n = x.value.size
    if n == 0:
        raise ShapeError("mean of an empty tensor")
    shape = x.shape
    return _node(np.array(x.value.mean()), "mean", (x,),
                 lambda g, _: (np.full(shape, float(g) / n),))


def sum(x) -> Tensor:  # noqa: A001 - mirrors numpy naming
    x = _wrap(x)
    shape = x.shape
    return _node(np.array(x.value.sum()), "sum", (x,),
                 lambda g, _: (np.full(shape, float(g)),))


def add(a, b, alpha: float = 1.0, beta: float = 1.0) -> Tensor:
    """``alpha * a + beta * b`` with numpy broadcasting."""
    a, b = _wrap(a), _wrap(b)
    return _node(alpha * a.value + beta * b.value, "affine-combination", (a, b),
                 lambda g, n: (alpha * g if n[0] else None, beta * g if n[1] else None))


def scale(x, alpha: float, shift: float = 0.0) -> Tensor:
    x = _wrap(x)
    return _node(alpha * x.value + shift, "affine-combination", (x,),
                 lambda g, n: (alpha * g,))


def multiply(a, b) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    av, bv = a.value, b.value
    return _node(av * bv, "affine-combination", (a, b),
                 lambda g, n: (g * bv if n[0] else None, g * av if n[1] else None))


def power(x, k: float) -> Tensor:
    x = _wrap(x)
    xv = x.value
    if not float(k).is_integer() and np.any(xv < 0):
        raise DomainError("power: negative base with non-integer exponent")
    return _node(xv ** k, "power", (x,), lambda g, n: (g * k * xv ** (k - 1),))


def norm(x, p: int = 2) -> Tensor:
    """Row-wise p-norm, returning an ``(n, 1)`` column."""
    x = _wrap(x)
    if p < 1:
        raise DomainError("norm: p must be >= 1")
    xv = x.value
    if xv.ndim != 2:
        raise ShapeError("norm expects a 2-D tensor")
    absx = np.abs(xv)
    n = (absx ** p).sum(axis=1, keepdims=True) ** (1.0 / p)

    def backward(g, needs):
        # subgradient 0 at the origin
        safe = np.where(n > 0, n, 1.0)
        d = np.sign(xv) * absx ** (p - 1) / safe ** (p - 1)
        return (g * np.where(n > 0, d, 0.0),)

    return _node(n, "norm", (x,), backward)


def softplus(x) -> Tensor:
    """``ln(1 + e**x)``, evaluated without overflow."""
    x = _wrap(x)
    xv = x.value
    return _node(np.logaddexp(0.0, xv), "log", (x,), lambda g, n: (g * _sigmoid(xv),))
