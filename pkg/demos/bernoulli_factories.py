"""
Accepting without the density ratio
===================================

If pi(x) = c_x p_x with c computable but p only available as a coin, the
Barker and generalized Barker acceptance events can still be sampled
exactly.  Roll a die weighted by powers of c, flip the matching p-coins,
and repeat on tails.
"""

import math

import numpy as np

from scaling_lab import factory

rng = np.random.default_rng(0)
fd = factory.normal_factored()  # c = 1, p_x = exp(-x^2 / 2)

for r in (1, 2, 5):
    op = lambda *a, **k: factory.die_coin_general(r, *a, **k)  # noqa: E731
    s = factory.estimate(op, fd, 0.0, 1.0, 200_000, rng)
    exact = factory.alpha_exact(r, 1.0, 1.0, 1.0, math.exp(-0.5))
    print(f"r={r}: alpha {s.alpha_hat:.4f} +- {s.se:.4f} (exact {exact:.4f}), "
          f"{s.rounds_mean:.2f} rounds, {s.flips_mean:.2f} coin flips per event")

# A chain driven entirely by factory events matches the ordinary Barker chain.
chain = factory.factory_chain(fd, r=1, l=2.46, n_iters=100_000, seed=1)
print(f"\nfactory-driven chain: acceptance {chain.stats.accept_rate_indicator:.4f}, "
      f"{chain.mean_rounds:.2f} rounds per step")

# High-order dice square the tail coins; moving the tail into c keeps them fair.
env = factory.normal_envelope_factored(2.0)
chain = factory.factory_chain(env, r=3, l=2.46, n_iters=100_000, seed=1)
print(f"r=3 chain on the envelope split: acceptance {chain.stats.accept_rate_indicator:.4f}, "
      f"{chain.mean_rounds:.2f} rounds per step")
