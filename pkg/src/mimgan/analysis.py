"""Closed-form quantities for the MIM and KL games on discrete distributions.

Covers the Renyi divergence, the share of rare events in the generator's
objective for a perturbed binary distribution, the gradient multipliers a
discriminator disturbance induces, and the share of large-probability
events in the MIM objective.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .objectives import ObjectiveKind, as_dist_pair, bhattacharyya_terms
from .tensor import DomainError

LN2 = math.log(2.0)


class Mode(str, enum.Enum):
    EXACT = "exact"
    APPROX = "approx"


class StabilityScenario(str, enum.Enum):
    """Reference discriminator around which the disturbance is applied."""

    PERFECT_D = "perfect"  # D~*(G(z)) = 0, eps in [0, 1]
    WORST_D = "worst"  # D*(G(z)) = 1/2, |eps| < 1/2


def renyi_divergence(P, Q, alpha: float) -> float:
    """``1/(alpha-1) * ln sum_x P(x) (P(x)/Q(x))**(alpha-1)``."""
    if not alpha > 0 or alpha == 1:
        raise DomainError("alpha must be positive and different from 1")
    p, q = as_dist_pair(P, Q)
    support = p > 0
    if np.any(q[support] <= 0):
        raise DomainError("Q must be positive wherever P is positive")
    if np.array_equal(p, q):
        return 0.0
    lp, lq = np.log(p[support]), np.log(q[support])
    # log-sum-exp of ln P + (alpha-1)(ln P - ln Q)
    terms = lp + (alpha - 1.0) * (lp - lq)
    m = terms.max()
    lse = m + math.log(np.exp(terms - m).sum())
    return float(max(lse / (alpha - 1.0), 0.0))


@dataclass(frozen=True)
class BinaryPerturbation:
    """Real distribution ``{p, 1-p}`` against generated ``{q, 1-q}``, ``q = p + eps p**gamma``."""

    p: float
    epsilon: float
    gamma: float = 1.0

    def __post_init__(self):
        if not 0 < self.p < 0.5:
            raise DomainError(f"p must lie in (0, 1/2), got {self.p}")
        if self.gamma < 1:
            raise DomainError(f"gamma must be >= 1, got {self.gamma}")
        q = self.q
        if not 0 < q < 0.5:
            raise DomainError(f"perturbed probability q={q} leaves (0, 1/2)")

    @property
    def q(self) -> float:
        return self.p + self.epsilon * self.p ** self.gamma

    @property
    def rel_rare(self) -> float:
        """``eps * p**(gamma-1)``: relative change of the rare atom."""
        return self.epsilon * self.p ** (self.gamma - 1.0)

    @property
    def rel_common(self) -> float:
        """``eps * p**gamma / (1-p)``: relative decrease of the common atom."""
        return self.epsilon * self.p ** self.gamma / (1.0 - self.p)


def _kl_atom(x: float) -> float:
    # (1+x) ln(1+x) - (2+x) ln(2+x), i.e. one atom's contribution to the
    # KL game value divided by its real probability
    return (1.0 + x) * math.log1p(x) - (2.0 + x) * (LN2 + math.log1p(0.5 * x))


def _exact(kind: ObjectiveKind, bp: BinaryPerturbation) -> float:
    # p / (p + (1-p) r) with r the common atom's per-probability factor over
    # the rare atom's; r is exactly 1 at eps = 0, so the result is exactly p
    p, x, y = bp.p, bp.rel_rare, bp.rel_common
    if kind is ObjectiveKind.MIM:
        r = math.exp(0.5 * (math.log1p(-y) - math.log1p(x)))
    else:
        r = _kl_atom(-y) / _kl_atom(x)
    return p / (p + (1.0 - p) * r)


def _approx(kind: ObjectiveKind, bp: BinaryPerturbation) -> float:
    c = 0.125 if kind is ObjectiveKind.MIM else 0.125 / LN2
    p = bp.p
    curv = bp.epsilon ** 2 * p ** (2.0 * bp.gamma - 1.0)
    return (0.5 * (p + bp.q) - c * curv) / (1.0 - c * curv / (1.0 - p))


def rare_event_proportion(kind, mode, bp: BinaryPerturbation) -> float:
    """Share of the rare atom in the optimal-discriminator game value.

    EXACT evaluates the ratio directly; APPROX uses its second-order
    expansion in ``eps``.  ``kind`` is MIM or KL (either KL variant).
    """
    kind = kind if isinstance(kind, ObjectiveKind) else ObjectiveKind(kind)
    mode = mode if isinstance(mode, Mode) else Mode(mode)
    if kind is ObjectiveKind.KL_NONSATURATING:
        kind = ObjectiveKind.KL_SATURATING
    if kind not in (ObjectiveKind.MIM, ObjectiveKind.KL_SATURATING):
        raise ValueError(f"rare-event proportion is defined for MIM and KL, not {kind.value}")
    if not isinstance(bp, BinaryPerturbation):
        raise TypeError("bp must be a BinaryPerturbation")
    return _exact(kind, bp) if mode is Mode.EXACT else _approx(kind, bp)


def stability_factor(kind, scenario, epsilon: float) -> float:
    """Magnitude of the factor multiplying ``E[grad_x D * grad_theta g]``.

    ======================  ==============  ==============
    kind                    PERFECT_D       WORST_D
    ======================  ==============  ==============
    MIM                     e**eps          e**(1/2+eps)
    KL_SATURATING           1/(1-eps)       1/(1/2-eps)
    KL_NONSATURATING        1/eps           1/(1/2+eps)
    ======================  ==============  ==============
    """
    kind = kind if isinstance(kind, ObjectiveKind) else ObjectiveKind(kind)
    scenario = scenario if isinstance(scenario, StabilityScenario) else StabilityScenario(scenario)
    eps = float(epsilon)
    if scenario is StabilityScenario.PERFECT_D:
        if not 0.0 <= eps <= 1.0:
            raise DomainError("perfect-discriminator disturbance must lie in [0, 1]")
        if kind is ObjectiveKind.MIM:
            return math.exp(eps)
        if kind is ObjectiveKind.KL_SATURATING:
            if eps == 1.0:
                raise ZeroDivisionError("saturating KL factor is unbounded at eps = 1")
            return 1.0 / (1.0 - eps)
        if kind is ObjectiveKind.KL_NONSATURATING:
            if eps == 0.0:
                raise ZeroDivisionError("non-saturating KL factor is unbounded at eps = 0")
            return 1.0 / eps
    else:
        if not abs(eps) < 0.5:
            raise DomainError("worst-discriminator disturbance must satisfy |eps| < 1/2")
        if kind is ObjectiveKind.MIM:
            return math.exp(0.5 + eps)
        if kind is ObjectiveKind.KL_SATURATING:
            return 1.0 / (0.5 - eps)
        if kind is ObjectiveKind.KL_NONSATURATING:
            return 1.0 / (0.5 + eps)
    raise ValueError(f"no stability factor for {kind.value}")


def large_event_proportion(P, Q, large_support) -> float:
    """``sum_{large} sqrt(PQ) / sum_all sqrt(PQ)`` for an index set of atoms."""
    p, q = as_dist_pair(P, Q)
    idx = np.asarray(sorted(set(int(i) for i in large_support)), dtype=int)
    if idx.size and (idx.min() < 0 or idx.max() >= p.size):
        raise IndexError("large_support index out of range")
    terms = bhattacharyya_terms(p, q)
    total = terms.sum()
    if total <= 0:
        raise DomainError("P and Q share no support")
    return float(terms[idx].sum() / total) if idx.size else 0.0
