"""Closed-form quantities of the MIM game, printed step by step."""

import math

import numpy as np

from mimgan.analysis import (
    BinaryPerturbation,
    Mode,
    StabilityScenario,
    rare_event_proportion,
    renyi_divergence,
    stability_factor,
)
from mimgan.objectives import EQUILIBRIUM, ObjectiveKind, equilibrium_objective, optimal_discriminator

MIM, KL, KLNS = ObjectiveKind.MIM, ObjectiveKind.KL_SATURATING, ObjectiveKind.KL_NONSATURATING

# The discriminator minimizes E[exp(1 - D(x))] + E[exp(D(G(z)))].  Pointwise,
# a exp(1 - u) + b exp(u) is smallest at u = 1/2 + ln(a/b)/2.
for a, b in [(0.2, 0.1), (0.1, 0.1), (0.05, 0.4)]:
    print(f"D*(p_real={a}, p_gen={b}) = {optimal_discriminator(MIM, a, b):+.5f}"
          f"   (KL game: {optimal_discriminator(KL, a, b):.5f})")

# With D* plugged in the game value is 2 sqrt(e) * sum sqrt(P Q): the
# generator's best is 2 sqrt(e) = 3.29744..., reached only when Q == P.
P = np.array([0.5, 0.5])
print(f"\n2 sqrt(e) = {EQUILIBRIUM:.10f}")
for q in (0.5, 0.4, 0.25, 0.1):
    Q = np.array([q, 1 - q])
    r = renyi_divergence(P, Q, 0.5)
    v = equilibrium_objective(MIM, P, Q)
    print(f"Q = {Q}: value {v:.6f}, R_1/2 = {r:.6f}, 2 sqrt(e) exp(-R/2) = {EQUILIBRIUM * math.exp(-r / 2):.6f}")

# Rare events: P = {p, 1-p}, generator off by eps p**gamma on the rare atom.
# Share of the rare atom in each game value; MIM keeps more of it.
print("\n   p     eps   gamma   MIM exact   KL exact    MIM approx  KL approx")
for p, eps, gamma in [(0.01, 0.1, 1), (0.01, -0.1, 1), (0.001, 0.2, 1.5), (0.05, 0.2, 2)]:
    bp = BinaryPerturbation(p, eps, gamma)
    vals = [rare_event_proportion(k, m, bp) for m in Mode for k in (MIM, KL)]
    print(f"{p:6.3f} {eps:6.2f} {gamma:5.1f}   " + "  ".join(f"{v:.7f}" for v in vals))

# Gradient factors under a disturbed discriminator.  Near a perfect
# discriminator the non-saturating loss blows up like 1/eps; MIM stays
# below the saturating KL factor everywhere.
print("\n  eps   MIM/perfect  KL/perfect  KL-NS/perfect   MIM/worst  KL/worst")
for eps in (0.01, 0.1, 0.3, 0.45):
    row = [stability_factor(MIM, StabilityScenario.PERFECT_D, eps),
           stability_factor(KL, StabilityScenario.PERFECT_D, eps),
           stability_factor(KLNS, StabilityScenario.PERFECT_D, eps),
           stability_factor(MIM, StabilityScenario.WORST_D, eps),
           stability_factor(KL, StabilityScenario.WORST_D, eps)]
    print(f"{eps:5.2f}  " + "  ".join(f"{v:11.4f}" for v in row))
