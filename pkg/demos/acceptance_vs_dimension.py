"""
Acceptance rate as the dimension grows
======================================

Simulate the chain at a fixed l on N(0, 1)^d and watch the empirical
acceptance rate settle on the limit M(l^2) computed by quadrature.
"""

from scaling_lab import accept, quad, sampler, target

for g, l in ((accept.mh(), 2.38), (accept.barker(), 2.46)):
    limit = quad.acceptance_rate(g, l * l)
    rows = sampler.acceptance_vs_dimension(g, l, target.normal(), [5, 10, 30, 100], n_iters=500_000, seed=7)
    print(f"{g} at l={l}: limit {limit:.4f}")
    for r in rows:
        s = r.stats
        print(f"  d={r.d:>3}  indicator {s.accept_rate_indicator:.4f} +- {s.accept_se:.4f}  "
              f"Rao-Blackwell {s.accept_rate_rao:.4f} +- {s.rao_se:.4f}")
