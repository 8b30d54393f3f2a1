"""Random-walk chains on product targets with an arbitrary balancing function.

The proposal is ``Y = x + sigma_d xi`` with ``xi ~ N(0, I_d)`` and
``sigma_d^2 = l^2 / (d - 1)`` (``l^2`` when ``d = 1``).  A proposal is
accepted when a uniform draw falls below ``g(pi(Y) / pi(x))``, evaluated on
the log scale.

Chains run in blocks: a block of proposal noise and uniforms is drawn from a
Philox generator, a compiled kernel advances the chain through the block, and
the block's post-burn-in output is folded into running sums and batch sums.
Memory therefore stays flat in ``n_iters``.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numba import njit

from .accept import BalancingFunction, log_evaluate, log_g_scalar
from .errors import ChainError, DomainError
from .target import LOGISTIC, NORMAL, QUARTIC, Target1D

BLOCK = 1 << 15
N_BATCHES = 50
SEED_ENV = "SCALING_LAB_SEED"


def default_seed() -> int:
    return int(os.environ.get(SEED_ENV, "0"))


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def child_seeds(seed: int, n: int) -> list[int]:
    """Deterministic, independent 64-bit seeds for ``n`` sub-streams."""
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(n, dtype=np.uint64)]


def proposal_sd(l: float, d: int) -> float:
    return l if d == 1 else l / math.sqrt(d - 1)


@dataclass(frozen=True)
class ChainConfig:
    d: int
    l: float
    g: BalancingFunction
    target: Target1D
    n_iters: int
    burn_in: int | None = None  # None -> 10% of n_iters
    seed: int = 0
    init: np.ndarray | None = field(default=None, compare=False)  # None -> stationary draw

    def __post_init__(self):
        if self.d < 1:
            raise DomainError(f"d must be >= 1, got {self.d}")
        if not (math.isfinite(self.l) and self.l > 0):
            raise DomainError(f"l must be positive, got {self.l}")
        if self.n_iters < 1:
            raise DomainError(f"n_iters must be >= 1, got {self.n_iters}")
        if not 0 <= self.n_burn < self.n_iters:
            raise DomainError(f"burn_in must lie in [0, n_iters), got {self.burn_in}")
        if not 0 <= self.seed < 2**64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.init is not None and np.shape(self.init) != (self.d,):
            raise DomainError(f"init must have shape ({self.d},)")

    @property
    def n_burn(self) -> int:
        return self.n_iters // 10 if self.burn_in is None else self.burn_in

    @property
    def sigma(self) -> float:
        return proposal_sd(self.l, self.d)


@dataclass(frozen=True)
class ChainStats:
    accept_rate_indicator: float
    accept_rate_rao: float | None
    lag1_autocorr_first_coord: float
    mean_first_coord: float
    var_first_coord: float
    esjd: float
    n_used: int
    # batch-means standard errors
    accept_se: float = math.nan
    rao_se: float = math.nan
    mean_se: float = math.nan
    var_se: float = math.nan


class _Accumulator:
    """Running sums and batch sums over the post-burn-in iterations."""

    def __init__(self, n_used: int):
        self.n = n_used
        self.seen = 0
        self.sums = np.zeros(4)  # accept, alpha, x, x^2 batch-free totals
        self.batch = np.zeros((4, N_BATCHES))
        self.jump = 0.0
        self.cross = 0.0
        self.shift = None
        self.prev = None
        self.first = None

    def add(self, accepted, alpha, x, sqjump):
        if x.size == 0:
            return
        if self.shift is None:
            self.shift = float(x[0])
            self.first = 0.0
        xs = x - self.shift
        if self.prev is not None:
            self.cross += self.prev * xs[0]
        self.cross += float(np.dot(xs[:-1], xs[1:]))
        self.prev = float(xs[-1])
        idx = (np.arange(self.seen, self.seen + x.size) * N_BATCHES) // self.n
        cols = (accepted.astype(float), alpha, xs, xs * xs)
        for k, c in enumerate(cols):
            self.batch[k] += np.bincount(idx, weights=c, minlength=N_BATCHES)
        self.jump += float(sqjump.sum())
        self.seen += x.size

    def stats(self, with_rao=True) -> ChainStats:
        n = self.n
        tot = self.batch.sum(axis=1)
        acc, rao, sx, sxx = tot / n
        mean_c = sx
        var = max(sxx - mean_c * mean_c, 0.0)
        # plug-in lag-1 autocorrelation on the shifted trace
        s_head = sx * n - self.prev  # sum of xs[0..n-2]
        s_tail = sx * n - self.first  # sum of xs[1..n-1]
        num = self.cross - mean_c * (s_head + s_tail) + (n - 1) * mean_c * mean_c
        den = var * n
        lag1 = float(np.clip(num / den, -1.0, 1.0)) if den > 0 else 1.0

        counts = np.bincount((np.arange(n) * N_BATCHES) // n, minlength=N_BATCHES)
        bm = self.batch / counts
        nb = N_BATCHES

        def se(row, center):
            return float(np.sqrt(np.sum((row - center) ** 2) / (nb - 1) / nb))

        var_batches = bm[3] - bm[2] ** 2
        return ChainStats(
            accept_rate_indicator=float(acc),
            accept_rate_rao=float(rao) if with_rao else None,
            lag1_autocorr_first_coord=lag1,
            mean_first_coord=float(mean_c + self.shift),
            var_first_coord=float(var),
            esjd=self.jump / n,
            n_used=n,
            accept_se=se(bm[0], acc),
            rao_se=se(bm[1], rao) if with_rao else math.nan,
            mean_se=se(bm[2], mean_c),
            var_se=se(var_batches, var_batches.mean()),
        )


@njit(cache=True)
def _log_f(code, loc, inv_s2, x):
    if code == NORMAL:
        u = x - loc
        return -0.5 * u * u * inv_s2
    if code == QUARTIC:
        x2 = x * x
        return -0.25 * x2 * x2
    a = abs(x)
    return -a - 2.0 * math.log1p(math.exp(-a))


@njit(cache=True)
def _advance(x, lfx, noise, u, sigma, code, loc, inv_s2, kinds, params, weights,
             acc, alpha, first, sqjump):
    n, d = noise.shape
    y = np.empty(d)
    lfy = np.empty(d)
    for t in range(n):
        delta = 0.0
        for i in range(d):
            yi = x[i] + sigma * noise[t, i]
            y[i] = yi
            lfy[i] = _log_f(code, loc, inv_s2, yi)
            delta += lfy[i] - lfx[i]
        if not math.isfinite(delta):
            return t
        a = log_g_scalar(kinds, params, weights, delta)
        alpha[t] = a
        if u[t] < a:
            acc[t] = True
            s = 0.0
            for i in range(d):
                s += (y[i] - x[i]) ** 2
                x[i] = y[i]
                lfx[i] = lfy[i]
            sqjump[t] = s
        else:
            acc[t] = False
            sqjump[t] = 0.0
        first[t] = x[0]
    return -1


def _advance_py(x, lfx, noise, u, sigma, target, g, acc, alpha, first, sqjump):
    for t in range(noise.shape[0]):
        y = x + sigma * noise[t]
        lfy = np.asarray(target.log_f(y), dtype=float)
        delta = float(np.sum(lfy - lfx))
        if not math.isfinite(delta):
            return t
        a = log_evaluate(g, delta)
        alpha[t] = a
        if u[t] < a:
            acc[t] = True
            sqjump[t] = float(np.sum((y - x) ** 2))
            x[:] = y
            lfx[:] = lfy
        else:
            acc[t] = False
            sqjump[t] = 0.0
        first[t] = x[0]
    return -1


def _chain_blocks(cfg: ChainConfig):
    """Yield ``(offset, accepted, alpha, first_coord, sqjump)`` per block."""
    rng = make_rng(cfg.seed)
    t = cfg.target
    x = t.sample(rng, cfg.d) if cfg.init is None else np.array(cfg.init, dtype=float)
    lfx = np.asarray(t.log_f(x), dtype=float).copy()
    if not np.all(np.isfinite(lfx)):
        raise ChainError("initial state has non-finite log-density", 0, x.copy())
    k, p, w = cfg.g.flat
    compiled = t.code is not None
    inv_s2 = 1.0 / (t.scale * t.scale)
    done = 0
    while done < cfg.n_iters:
        m = min(BLOCK, cfg.n_iters - done)
        noise = rng.standard_normal((m, cfg.d))
        u = rng.random(m)
        acc = np.empty(m, dtype=np.bool_)
        alpha = np.empty(m)
        first = np.empty(m)
        sqjump = np.empty(m)
        if compiled:
            bad = _advance(x, lfx, noise, u, cfg.sigma, t.code, t.loc, inv_s2, k, p, w,
                           acc, alpha, first, sqjump)
        else:
            bad = _advance_py(x, lfx, noise, u, cfg.sigma, t, cfg.g, acc, alpha, first, sqjump)
        if bad >= 0:
            raise ChainError(
                f"non-finite log-density ratio at iteration {done + bad}",
                done + bad,
                x.copy(),
            )
        yield done, acc, alpha, first, sqjump
        done += m


def run_chain(cfg: ChainConfig) -> ChainStats:
    """Simulate the chain and summarise its post-burn-in iterations."""
    burn = cfg.n_burn
    accum = _Accumulator(cfg.n_iters - burn)
    for off, acc, alpha, first, sqjump in _chain_blocks(cfg):
        s = max(burn - off, 0)
        accum.add(acc[s:], alpha[s:], first[s:], sqjump[s:])
    return accum.stats()


@dataclass(frozen=True)
class DimensionRow:
    d: int
    seed: int
    stats: ChainStats | None = None
    error: str | None = None

    @property
    def accept_rate(self):
        return self.stats.accept_rate_indicator if self.stats else math.nan


def acceptance_vs_dimension(
    g: BalancingFunction,
    l: float,
    target: Target1D,
    ds: Sequence[int],
    n_iters: int,
    seed: int = 0,
) -> list[DimensionRow]:
    """Empirical acceptance rate for each ``d``; each row runs on its own stream."""
    rows = []
    for d, s in zip(ds, child_seeds(seed, len(ds))):
        try:
            stats = run_chain(ChainConfig(d=int(d), l=l, g=g, target=target, n_iters=n_iters, seed=s))
            rows.append(DimensionRow(int(d), s, stats))
        except (ValueError, RuntimeError) as exc:
            rows.append(DimensionRow(int(d), s, error=f"{type(exc).__name__}: {exc}"))
    return rows


@dataclass(frozen=True)
class FiniteDResult:
    l_opt: float
    accept_rate_at_opt: float
    grid: list[tuple[float, ChainStats]]
    endpoint: bool


def finite_d_optimal(
    g: BalancingFunction,
    target: Target1D,
    d: int,
    l_grid,
    n_iters: int,
    seed: int = 0,
) -> FiniteDResult:
    """Scale on ``l_grid`` minimising the lag-1 autocorrelation of the first coordinate.

    Every grid point reuses the same seed (common random numbers), which
    smooths the autocorrelation curve across ``l``.  The caller picks
    ``n_iters`` large enough that the autocorrelation noise is small next to
    its variation over the grid.
    """
    ls = np.asarray(l_grid, dtype=float)
    if ls.size < 5 or np.any(np.diff(ls) <= 0) or np.any(ls <= 0):
        raise DomainError("l_grid needs at least 5 strictly increasing positive values")
    grid = []
    for l in ls:
        cfg = ChainConfig(d=d, l=float(l), g=g, target=target, n_iters=n_iters, seed=seed)
        grid.append((float(l), run_chain(cfg)))
    lag = np.array([s.lag1_autocorr_first_coord for _, s in grid])
    i = int(np.argmin(lag))
    return FiniteDResult(
        l_opt=float(ls[i]),
        accept_rate_at_opt=grid[i][1].accept_rate_rao,
        grid=grid,
        endpoint=i in (0, ls.size - 1),
    )
