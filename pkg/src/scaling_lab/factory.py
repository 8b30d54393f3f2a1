"""Bernoulli factories for Barker-type acceptance probabilities.

When ``pi(x) = c_x p_x`` with ``c_x`` computable and ``p_x`` only available
through coin flips, the acceptance probability

    alpha_r(x, y) = sum_{k=1}^r pi_x^{r-k} pi_y^k / sum_{k=0}^r pi_x^{r-k} pi_y^k

can be sampled exactly without ever forming ``pi(y) / pi(x)``: roll an
``(r+1)``-faced die with face weights ``c_x^{r-k} c_y^k``, then flip the
matching product of p-coins.  ``r = 1`` is Barker's rule (the two-coin
algorithm).  Coin powers such as ``p_y^2`` are realised as repeated flips of
the single p-coin, so only the p-coins themselves are ever queried.

Nothing in this module evaluates a balancing function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ChainError, DomainError, NonTerminationError
from .sampler import ChainStats, _Accumulator, make_rng, proposal_sd

MAX_ROUNDS = 10**6


@dataclass(frozen=True)
class FactoredDensity:
    """``pi(x) = c(x) p(x)`` with ``c > 0`` computable and ``p`` behind a coin.

    ``p`` is optional and only used by callers that want the analytic
    acceptance probability for comparison; the factories never touch it.
    """

    c: Callable[[float], float]
    p_coin: Callable[[float, np.random.Generator], bool]
    p: Callable[[float], float] | None = None
    sampler: Callable[[np.random.Generator, int], np.ndarray] | None = None
    p_coin_batch: Callable[[float, np.random.Generator, tuple], np.ndarray] | None = None

    def p_coins(self, x, rng: np.random.Generator, shape) -> np.ndarray:
        """Independent p-coin flips at ``x`` filling ``shape``."""
        if self.p_coin_batch is not None:
            return np.asarray(self.p_coin_batch(x, rng, shape), dtype=np.bool_)
        n = int(np.prod(shape))
        return np.fromiter((self.p_coin(x, rng) for _ in range(n)), np.bool_, n).reshape(shape)

    def log_c(self, x) -> float:
        cx = float(self.c(x))
        if not (cx > 0 and math.isfinite(cx)):
            raise DomainError(f"c(x) must be positive and finite, got {cx} at x={x}")
        return math.log(cx)


def normal_factored() -> FactoredDensity:
    """Standard normal with ``c = 1`` and ``p_x = exp(-x^2 / 2)``."""
    p = lambda x: math.exp(-0.5 * x * x)
    return FactoredDensity(
        c=lambda x: 1.0,
        p_coin=lambda x, rng: rng.random() < p(x),
        p=p,
        sampler=lambda rng, n: rng.normal(size=n),
        p_coin_batch=lambda x, rng, shape: rng.random(shape) < p(x),
    )


def normal_envelope_factored(kappa: float = 2.0) -> FactoredDensity:
    """Standard normal with the Gaussian tail beyond ``|x| = kappa`` moved into ``c``.

    ``c_x = exp(-(x^2 - min(x^2, kappa^2)) / 2)`` and
    ``p_x = exp(-min(x^2, kappa^2) / 2) >= exp(-kappa^2 / 2)``.  The product is
    the same density as :func:`normal_factored`, but the coins stay bounded
    away from zero, so high-order die-coins terminate quickly even when both
    points sit in the tails.
    """
    if not kappa > 0:
        raise DomainError(f"kappa must be positive, got {kappa}")
    k2 = kappa * kappa
    p = lambda x: math.exp(-0.5 * min(x * x, k2))
    return FactoredDensity(
        c=lambda x: math.exp(-0.5 * max(x * x - k2, 0.0)),
        p_coin=lambda x, rng: rng.random() < p(x),
        p=p,
        sampler=lambda rng, n: rng.normal(size=n),
        p_coin_batch=lambda x, rng, shape: rng.random(shape) < p(x),
    )


def constant_factored(value: float = 1.0) -> FactoredDensity:
    """Flat density with ``p = 1``: every coin lands heads."""
    return FactoredDensity(
        c=lambda x: value,
        p_coin=lambda x, rng: True,
        p=lambda x: 1.0,
        sampler=lambda rng, n: rng.normal(size=n),
        p_coin_batch=lambda x, rng, shape: np.ones(shape, dtype=np.bool_),
    )


@dataclass(frozen=True)
class FactoryOutcome:
    accepted: bool
    rounds: int
    coin_flips: int


@dataclass(frozen=True)
class FactoryBatch:
    """Outcomes of many independent factory runs on the same ``(x, y)``."""

    accepted: np.ndarray
    rounds: np.ndarray
    coin_flips: np.ndarray


# A die is a tuple of faces; each face is (x-flips, y-flips, accepts-on-heads).
# Face weights are c_x^{x-flips} c_y^{y-flips}, matching the coin it calls for.


def _die(r: int):
    return tuple((r - k, k, k >= 1) for k in range(r + 1))


_TWO_COIN_DIE = ((0, 1, True), (1, 0, False))
_R2_DIE = ((0, 2, True), (1, 1, True), (2, 0, False))


def _face_logw(die, lx, ly):
    return np.array([nx * lx + ny * ly for nx, ny, _ in die])


def _flip_all(fd, pt, times, rng):
    """Conjunction of ``times`` independent p-coin flips at ``pt``; short-circuits on tails."""
    for i in range(times):
        if not fd.p_coin(pt, rng):
            return False, i + 1
    return True, times


def _run_one(die, fd, x, y, rng, max_rounds, label):
    logw = _face_logw(die, fd.log_c(x), fd.log_c(y))
    flips = 0
    for rounds in range(1, max_rounds + 1):
        # Gumbel-max draw from the face weights, overflow-free in log space
        nx, ny, accepts = die[int(np.argmax(logw + rng.gumbel(size=logw.size)))]
        heads, n = _flip_all(fd, x, nx, rng)
        if heads:
            heads, m = _flip_all(fd, y, ny, rng)
            n += m
        flips += n
        if heads:
            return FactoryOutcome(accepts, rounds, flips)
    raise NonTerminationError(f"{label} did not terminate in {max_rounds} rounds", max_rounds, flips)


def _first_tail_count(flips: np.ndarray, need: np.ndarray):
    """Per row: heads on all of the first ``need`` columns, and flips used with short-circuiting."""
    width = flips.shape[1]
    if width == 0:
        return np.ones(flips.shape[0], dtype=np.bool_), np.zeros(flips.shape[0], dtype=np.int64)
    cols = np.arange(width)
    tails = (~flips) & (cols < need[:, None])
    any_tail = tails.any(axis=1)
    used = np.where(any_tail, tails.argmax(axis=1) + 1, need)
    return ~any_tail, used


def _run_many(die, fd, x, y, rng, max_rounds, size, label):
    logw = _face_logw(die, fd.log_c(x), fd.log_c(y))
    nx = np.array([f[0] for f in die])
    ny = np.array([f[1] for f in die])
    acc_face = np.array([f[2] for f in die])
    accepted = np.zeros(size, dtype=np.bool_)
    rounds = np.zeros(size, dtype=np.int64)
    flips = np.zeros(size, dtype=np.int64)
    active = np.arange(size)
    for rnd in range(1, max_rounds + 1):
        m = active.size
        faces = np.argmax(logw + rng.gumbel(size=(m, logw.size)), axis=1)
        hx, ux = _first_tail_count(fd.p_coins(x, rng, (m, int(nx.max()))), nx[faces])
        hy, uy = _first_tail_count(fd.p_coins(y, rng, (m, int(ny.max()))), ny[faces])
        flips[active] += ux + np.where(hx, uy, 0)
        done = hx & hy
        finished = active[done]
        accepted[finished] = acc_face[faces[done]]
        rounds[finished] = rnd
        active = active[~done]
        if active.size == 0:
            return FactoryBatch(accepted, rounds, flips)
    raise NonTerminationError(
        f"{label}: {active.size} of {size} runs did not terminate in {max_rounds} rounds",
        max_rounds,
        int(flips.sum()),
    )


def _dispatch(die, fd, x, y, rng, max_rounds, size, label):
    if max_rounds < 1:
        raise DomainError("max_rounds must be >= 1")
    if size is None:
        return _run_one(die, fd, x, y, rng, max_rounds, label)
    return _run_many(die, fd, x, y, rng, max_rounds, int(size), label)


def two_coin(fd: FactoredDensity, x, y, rng: np.random.Generator, max_rounds: int = MAX_ROUNDS,
             size: int | None = None):
    """Accept with probability ``c_y p_y / (c_x p_x + c_y p_y)``.

    Each round picks the y side with probability ``c_y / (c_x + c_y)`` and
    flips its p-coin: heads on the y side accepts, heads on the x side
    rejects, tails repeats.  With ``size`` set, runs that many independent
    trials together and returns a :class:`FactoryBatch`.
    """
    return _dispatch(_TWO_COIN_DIE, fd, x, y, rng, max_rounds, size, "two-coin")


def die_coin_r2(fd: FactoredDensity, x, y, rng: np.random.Generator, max_rounds: int = MAX_ROUNDS,
                size: int | None = None):
    """Die-coin factory for the ``r = 2`` generalized Barker probability.

    Faces ``D = 1, 2, 3`` have weights ``c_y^2, c_x c_y, c_x^2``; they call for
    coins ``p_y^2`` (heads accepts), ``p_x p_y`` (heads accepts) and ``p_x^2``
    (heads rejects).  Tails on any face restarts.
    """
    return _dispatch(_R2_DIE, fd, x, y, rng, max_rounds, size, "die-coin r=2")


def die_coin_general(r: int, fd: FactoredDensity, x, y, rng: np.random.Generator,
                     max_rounds: int = MAX_ROUNDS, size: int | None = None):
    """Die-coin factory for the order-``r`` generalized Barker probability.

    Face ``k in 0..r`` has weight ``c_x^{r-k} c_y^k`` and coin
    ``p_x^{r-k} p_y^k``; heads on ``k >= 1`` accepts, heads on ``k = 0``
    rejects.
    """
    if r < 1 or int(r) != r:
        raise DomainError(f"r must be a positive integer, got {r}")
    return _dispatch(_die(int(r)), fd, x, y, rng, max_rounds, size, f"die-coin r={int(r)}")


def alpha_exact(r: int, cx: float, cy: float, px: float, py: float) -> float:
    """Analytic ``alpha_r`` from the factor values; used as the reference probability."""
    a, b = cx * px, cy * py
    terms = [a ** (r - k) * b**k for k in range(r + 1)]
    return sum(terms[1:]) / sum(terms)


def expected_rounds(r: int, cx: float, cy: float, px: float, py: float) -> float:
    """``1 / P(terminate in a round)`` for the order-``r`` die-coin."""
    w = [cx ** (r - k) * cy**k for k in range(r + 1)]
    stop = sum(wk * px ** (r - k) * py**k for k, wk in enumerate(w))
    return sum(w) / stop


def fixed_coin(c: tuple[float, float], p: tuple[float, float], points=(0.0, 1.0)) -> FactoredDensity:
    """Two-point factored density with prescribed ``(c, p)`` at ``points``."""
    table = {points[0]: (c[0], p[0]), points[1]: (c[1], p[1])}
    return FactoredDensity(
        c=lambda x: table[x][0],
        p_coin=lambda x, rng: rng.random() < table[x][1],
        p=lambda x: table[x][1],
        p_coin_batch=lambda x, rng, shape: rng.random(shape) < table[x][1],
    )


@dataclass(frozen=True)
class FactoryStats:
    alpha_hat: float
    se: float
    rounds_mean: float
    flips_mean: float
    n: int


def estimate(op: Callable, fd: FactoredDensity, x, y, n_trials: int, rng, **kw) -> FactoryStats:
    """Run ``n_trials`` independent draws of ``op`` as one batch and summarise them."""
    out = op(fd, x, y, rng, size=n_trials, **kw)
    a = float(out.accepted.mean())
    return FactoryStats(
        alpha_hat=a,
        se=math.sqrt(a * (1 - a) / n_trials),
        rounds_mean=float(out.rounds.mean()),
        flips_mean=float(out.coin_flips.mean()),
        n=n_trials,
    )


def random_cells(rng: np.random.Generator, n: int, r_max: int = 5, max_expected_rounds: float = 200.0):
    """Random ``(c_x, c_y, p_x, p_y)`` cells.

    ``c`` is log-uniform on [0.2, 5] and ``p`` uniform on [0.1, 1].  Cells
    whose order-``r_max`` die-coin would need more than
    ``max_expected_rounds`` rounds on average are redrawn, which keeps batch
    runtimes bounded.
    """
    cells = []
    while len(cells) < n:
        cx, cy = np.exp(rng.uniform(math.log(0.2), math.log(5.0), 2))
        px, py = rng.uniform(0.1, 1.0, 2)
        if expected_rounds(r_max, cx, cy, px, py) <= max_expected_rounds:
            cells.append((float(cx), float(cy), float(px), float(py)))
    return cells


@dataclass(frozen=True)
class FactoryChainStats:
    stats: ChainStats
    mean_rounds: float


def factory_chain(
    fd: FactoredDensity,
    r: int,
    l: float,
    n_iters: int,
    burn_in: int | None = None,
    seed: int = 0,
    init: float | None = None,
    max_rounds: int = MAX_ROUNDS,
) -> FactoryChainStats:
    """One-dimensional random walk whose accept/reject events come from the die-coin.

    Acceptance is reported from indicators only; the Rao-Blackwellised rate
    would need the ratio the factory exists to avoid.
    """
    if n_iters < 1:
        raise DomainError("n_iters must be >= 1")
    burn = n_iters // 10 if burn_in is None else burn_in
    if not 0 <= burn < n_iters:
        raise DomainError("burn_in must lie in [0, n_iters)")
    rng = make_rng(seed)
    if init is None:
        if fd.sampler is None:
            raise DomainError("stationary start needs a sampler on the factored density")
        x = float(fd.sampler(rng, 1)[0])
    else:
        x = float(init)
    sigma = proposal_sd(l, 1)
    n_used = n_iters - burn
    accum = _Accumulator(n_used)
    acc = np.empty(n_used, dtype=np.bool_)
    trace = np.empty(n_used)
    jumps = np.zeros(n_used)
    total_rounds = 0
    noise = rng.standard_normal(n_iters)
    for t in range(n_iters):
        y = x + sigma * noise[t]
        try:
            out = die_coin_general(r, fd, x, y, rng, max_rounds)
        except NonTerminationError as exc:
            raise ChainError(f"factory failed at iteration {t}: {exc}", t, np.array([x])) from exc
        j = (y - x) ** 2 if out.accepted else 0.0
        if out.accepted:
            x = y
        if t >= burn:
            i = t - burn
            acc[i] = out.accepted
            trace[i] = x
            jumps[i] = j
            total_rounds += out.rounds
    accum.add(acc, np.zeros(n_used), trace, jumps)
    return FactoryChainStats(accum.stats(with_rao=False), total_rounds / n_used)
