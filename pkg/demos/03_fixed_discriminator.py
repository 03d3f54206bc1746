"""Generator curves against a frozen discriminator.

Both players train together for N iterations; then D is frozen and G alone
takes steps on 16,000 fresh latent draws each.  The curve is the loss G
descends.  Its trailing-window variance is one way to read "stability".
"""

import numpy as np

from mimgan._alloc import tune_allocator
from mimgan.data import sample_gaussian
from mimgan.objectives import ObjectiveKind
from mimgan.training import GanConfig, train_generator_fixed_discriminator, trailing_variance

# batch-16,000 temporaries otherwise bounce between malloc and the OS
tune_allocator()

SEED = 0
G_ITERS = 700
data = sample_gaussian(4.0, 1.25, 16_000, SEED).features

print("objective   N     first-100 mean   last-100 mean   trailing-500 var")
for kind in (ObjectiveKind.MIM, ObjectiveKind.KL_SATURATING, ObjectiveKind.LS, ObjectiveKind.W):
    for n in (500, 1000, 1500):
        cfg = GanConfig(objective=kind, seed=SEED, gen_hidden=(16,), disc_hidden=(16,),
                        g_optimizer="sgd", d_optimizer="sgd")
        g = np.asarray(train_generator_fixed_discriminator(cfg, data, n, G_ITERS).g_loss)
        print(f"{kind.value:8s} {n:5d}   {g[:100].mean():14.6f}   {g[-100:].mean():13.6f}   "
              f"{trailing_variance(g, 500):.3e}")

# The same experiment, with CSV output per curve, is `mimgan curves`.
