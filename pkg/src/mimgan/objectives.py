"""GAN losses (MIM, KL, least squares, Wasserstein) and closed-form optima.

Every loss is returned in descent form: the player that owns it minimizes
it.  For MIM the discriminator minimizes ``E[exp(1-D(x))] + E[exp(D(G(z)))]``
and the generator maximizes the second term, so its loss is the negation.
"""

from __future__ import annotations

import enum
import math

import numpy as np

from . import tensor as T
from .tensor import DomainError, ShapeError, Tensor

SQRT_E = math.sqrt(math.e)
EQUILIBRIUM = 2.0 * SQRT_E


class ObjectiveKind(str, enum.Enum):
    MIM = "mim"
    KL_SATURATING = "kl"
    KL_NONSATURATING = "kl-ns"
    LS = "ls"
    W = "w"

    @property
    def bounded(self) -> bool:
        """Whether the discriminator head is a sigmoid."""
        return self is not ObjectiveKind.W


def _as_kind(kind) -> ObjectiveKind:
    return kind if isinstance(kind, ObjectiveKind) else ObjectiveKind(kind)


def _check_unit(d: Tensor, name: str, closed: bool = False) -> None:
    v = d.value
    ok = (v >= 0) & (v <= 1) if closed else (v > 0) & (v < 1)
    if not np.all(ok):
        raise DomainError(f"{name}: discriminator outputs must lie in (0, 1)")


def _t(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(np.asarray(x, dtype=np.float64))


def discriminator_loss(kind, d_real, d_fake) -> Tensor:
    """Loss minimized by the discriminator, given its outputs on real and fake batches."""
    kind = _as_kind(kind)
    d_real, d_fake = _t(d_real), _t(d_fake)
    if kind is ObjectiveKind.MIM:
        # exp is finite on all of R; (0,1) is what the sigmoid head guarantees
        _check_unit(d_real, "d_real", closed=True)
        _check_unit(d_fake, "d_fake", closed=True)
        return T.mean(T.exp(1.0 - d_real)) + T.mean(T.exp(d_fake))
    if kind in (ObjectiveKind.KL_SATURATING, ObjectiveKind.KL_NONSATURATING):
        _check_unit(d_real, "d_real")
        _check_unit(d_fake, "d_fake")
        return -(T.mean(T.log(d_real)) + T.mean(T.log(1.0 - d_fake)))
    if kind is ObjectiveKind.LS:
        return 0.5 * T.mean((d_real - 1.0) ** 2) + 0.5 * T.mean(d_fake ** 2)
    return T.mean(d_fake) - T.mean(d_real)


def generator_loss(kind, d_fake) -> Tensor:
    """Loss minimized by the generator, given the discriminator's output on fakes."""
    kind = _as_kind(kind)
    d_fake = _t(d_fake)
    if kind is ObjectiveKind.MIM:
        _check_unit(d_fake, "d_fake", closed=True)
        return -T.mean(T.exp(d_fake))
    if kind is ObjectiveKind.KL_SATURATING:
        _check_unit(d_fake, "d_fake")
        return T.mean(T.log(1.0 - d_fake))
    if kind is ObjectiveKind.KL_NONSATURATING:
        _check_unit(d_fake, "d_fake")
        return -T.mean(T.log(d_fake))
    if kind is ObjectiveKind.LS:
        return 0.5 * T.mean((d_fake - 1.0) ** 2)
    return -T.mean(d_fake)


def generator_objective(kind, d_fake) -> float:
    """The generator's term of the game value, as plotted in training curves.

    MIM: ``E[exp(D(G(z)))]``; saturating KL: ``E[ln(1-D(G(z)))]``;
    non-saturating KL: ``E[-ln D(G(z))]``; LS: ``E[(D-1)^2]/2``; W: ``E[D]``.
    """
    kind = _as_kind(kind)
    if kind is ObjectiveKind.MIM:
        return -generator_loss(kind, d_fake).item()
    if kind is ObjectiveKind.W:
        return -generator_loss(kind, d_fake).item()
    return generator_loss(kind, d_fake).item()


def optimal_discriminator(kind, p_real: float, p_gen: float) -> float:
    """Pointwise optimal discriminator for densities ``p_real`` and ``p_gen``.

    MIM: ``1/2 + ln(p_real/p_gen)/2`` (unbounded); KL: ``p_real/(p_real+p_gen)``.
    """
    kind = _as_kind(kind)
    if not (p_real > 0 and p_gen > 0):
        raise DomainError("densities must be strictly positive")
    if kind is ObjectiveKind.MIM:
        return 0.5 + 0.5 * (math.log(p_real) - math.log(p_gen))
    if kind in (ObjectiveKind.KL_SATURATING, ObjectiveKind.KL_NONSATURATING):
        return p_real / (p_real + p_gen)
    raise ValueError(f"no closed-form optimal discriminator for {kind.value}")


def as_dist(p, name: str = "distribution") -> np.ndarray:
    """Validate a discrete distribution: non-negative entries summing to 1."""
    arr = np.asarray(p, dtype=np.float64).reshape(-1)
    if arr.size == 0:
        raise ShapeError(f"{name} is empty")
    if np.any(~np.isfinite(arr)) or np.any(arr < 0):
        raise DomainError(f"{name} has negative or non-finite entries")
    if abs(arr.sum() - 1.0) > 1e-12:
        raise DomainError(f"{name} sums to {arr.sum()!r}, not 1")
    return arr


def as_dist_pair(p, q) -> tuple[np.ndarray, np.ndarray]:
    p, q = as_dist(p, "P"), as_dist(q, "Q")
    if p.shape != q.shape:
        raise ShapeError(f"support mismatch: {p.size} vs {q.size} atoms")
    return p, q


def bhattacharyya_terms(p, q) -> np.ndarray:
    """Per-atom ``sqrt(P(x) Q(x))``, computed in log space."""
    out = np.zeros_like(p)
    both = (p > 0) & (q > 0)
    out[both] = np.exp(0.5 * (np.log(p[both]) + np.log(q[both])))
    return out


def equilibrium_objective(kind, P, Q) -> float:
    """MIM game value with the optimal discriminator plugged in.

    Equals ``2 sqrt(e) * sum_x sqrt(P(x) Q(x))``; at most ``2 sqrt(e)``,
    reached iff ``P == Q``.
    """
    if _as_kind(kind) is not ObjectiveKind.MIM:
        raise ValueError("equilibrium_objective is defined for the MIM objective")
    p, q = as_dist_pair(P, Q)
    if np.any((p > 0) != (q > 0)):
        raise DomainError("P and Q must be positive on the same atoms")
    return EQUILIBRIUM * float(bhattacharyya_terms(p, q).sum())
