"""
Tuning a one-dimensional chain
==============================

In low dimension the diffusion limit does not apply.  Here the step is
chosen to minimise the lag-1 autocorrelation of the chain, and the
acceptance rate at that step is reported.  The grid here is coarser and the
chains shorter than in the acceptance suite to keep the demo quick.
"""

import numpy as np

from scaling_lab import accept, sampler, target

grid = np.round(np.arange(1.0, 4.01, 0.25), 12)
for g in (accept.mh(), accept.barker()):
    res = sampler.finite_d_optimal(g, target.normal(), d=1, l_grid=grid, n_iters=1_000_000, seed=3)
    print(f"{g}: l_opt={res.l_opt:.2f}  acceptance at l_opt={res.accept_rate_at_opt:.4f}"
          f"{'  (grid endpoint!)' if res.endpoint else ''}")
    for l, s in res.grid[::2]:
        print(f"    l={l:.2f}  lag1={s.lag1_autocorr_first_coord:.4f}  acc={s.accept_rate_rao:.4f}")
