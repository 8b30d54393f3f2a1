"""
Optimal scaling across acceptance rules
=======================================

For a product target in high dimension, a random-walk chain with proposal
variance l^2/(d-1) behaves like a diffusion whose speed is
l^2 * M(l^2 I).  Maximising that speed gives the optimal step l* and the
acceptance rate the tuned chain should show (the AOAR).
"""

import math

from scaling_lab import accept, optim, quad

# Every rule is named by a short text spec; the same grammar drives the CLI.
specs = ["mh", "bedard:1", "bedard:1.913", "bedard:3", "bedard:5",
         "genbarker:10", "genbarker:5", "genbarker:2", "barker"]
rows = optim.table1([accept.parse(s) for s in specs])

print(f"{'rule':>14} {'AOAR':>8} {'l*sqrt(I)':>10} {'theta*':>8}")
for r in rows:
    print(f"{r.name:>14} {r.aoar:8.4f} {r.l_star_sqrtI:10.4f} {r.result.theta_star:8.4f}")

# Metropolis-Hastings has a closed form: M(theta) = 2 Phi(-sqrt(theta)/2).
mh_row = rows[0]
print("\nMH closed form at theta*:", quad.acceptance_rate_mh_closed(mh_row.result.theta_star))

# A lazy rule (1-eps) min(1, z) keeps the same optimal step and scales the AOAR.
for eps in (0.1, 0.5):
    r = optim.optimize(accept.lazy(eps))
    print(f"lazy eps={eps}: AOAR {r.aoar:.4f} = {(1 - eps):.1f} x {mh_row.aoar:.4f}, "
          f"theta* {r.theta_star:.4f}")

# The optimum is stated in theta = l^2 I, so the step for any target follows.
I = 4.0
print(f"\nBarker on a target with I={I}: l* = {optim.optimal_l(accept.barker(), I):.4f} "
      f"(= {math.sqrt(optim.optimize(accept.barker()).theta_star):.4f} / {math.sqrt(I):g})")
