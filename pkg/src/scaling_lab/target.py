"""One-dimensional component densities for product targets.

A product target ``pi_d(x) = prod_i f(x_i)`` is fully described by its
component density ``f``.  Each :class:`Target1D` carries ``log f`` (up to an
additive constant), its first two derivatives, a sampler, and optionally the
roughness constant ``I = E_f[(f'/f)^2]`` when it is known in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import DomainError, QuadratureError
from .quad import QuadratureSpec, adaptive_quad

# numba kernel codes for the built-ins; None means "Python callables only"
NORMAL, QUARTIC, LOGISTIC = 0, 1, 2

_OVERFLOW_GUARD = 1e300


@dataclass(frozen=True)
class Target1D:
    name: str
    log_f: Callable[[float], float]
    w1: Callable[[float], float]
    w2: Callable[[float], float]
    sampler: Callable[[np.random.Generator, int], np.ndarray]
    I: float | None = None
    loc: float = 0.0
    scale: float = 1.0
    code: int | None = None

    def __post_init__(self):
        if self.I is not None and not (math.isfinite(self.I) and self.I > 0):
            raise DomainError(f"roughness constant must be positive and finite, got {self.I}")
        if not (math.isfinite(self.scale) and self.scale > 0):
            raise DomainError(f"scale must be positive, got {self.scale}")

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return np.asarray(self.sampler(rng, size), dtype=float)


def normal(loc: float = 0.0, scale: float = 1.0) -> Target1D:
    s2 = scale * scale
    return Target1D(
        name="normal",
        log_f=lambda x: -0.5 * (x - loc) ** 2 / s2,
        w1=lambda x: -(x - loc) / s2,
        w2=lambda x: -1.0 / s2 + 0.0 * x,
        sampler=lambda rng, n: rng.normal(loc, scale, size=n),
        I=1.0 / s2,
        loc=loc,
        scale=scale,
        code=NORMAL,
    )


def _quartic_sampler(rng, n):
    # rejection from N(0,1); acceptance ratio exp(-x^4/4 + x^2/2 - 1/4) <= 1
    out = np.empty(n)
    filled = 0
    while filled < n:
        x = rng.normal(size=max(16, 2 * (n - filled)))
        u = rng.random(x.size)
        keep = x[np.log(u) < -0.25 * x**4 + 0.5 * x**2 - 0.25]
        take = min(keep.size, n - filled)
        out[filled : filled + take] = keep[:take]
        filled += take
    return out


def quartic() -> Target1D:
    """Density proportional to ``exp(-x^4 / 4)``."""
    return Target1D(
        name="quartic",
        log_f=lambda x: -0.25 * x**4,
        w1=lambda x: -(x**3),
        w2=lambda x: -3.0 * x**2,
        sampler=_quartic_sampler,
        code=QUARTIC,
    )


def _logistic_log_f(x):
    # log of e^{-x} / (1 + e^{-x})^2, symmetric so use |x|
    a = np.abs(x)
    return -a - 2.0 * np.log1p(np.exp(-a))


def logistic() -> Target1D:
    """Standard logistic density (scale 1)."""
    return Target1D(
        name="logistic",
        log_f=_logistic_log_f,
        w1=lambda x: -np.tanh(0.5 * x),
        w2=lambda x: -0.5 / np.cosh(0.5 * x) ** 2,
        sampler=lambda rng, n: rng.logistic(size=n),
        code=LOGISTIC,
    )


TARGETS = {"normal": normal, "quartic": quartic, "logistic": logistic}


def parse_target(text: str) -> Target1D:
    try:
        return TARGETS[text.strip().lower()]()
    except KeyError:
        raise DomainError(f"unknown target {text!r}; expected one of {', '.join(TARGETS)}") from None


def _support(t: Target1D, rel: float = 1e-17) -> tuple[float, float]:
    """Interval outside which ``f / f(loc)`` has dropped below ``rel`` on both ends."""
    lf0 = float(t.log_f(t.loc))
    cut = math.log(rel)
    lo = hi = t.scale
    for _ in range(60):
        if float(t.log_f(t.loc - lo)) - lf0 < cut:
            break
        lo *= 2.0
    else:
        raise QuadratureError(f"{t.name}: left tail does not decay")
    for _ in range(60):
        if float(t.log_f(t.loc + hi)) - lf0 < cut:
            break
        hi *= 2.0
    else:
        raise QuadratureError(f"{t.name}: right tail does not decay")
    return t.loc - lo, t.loc + hi


def expect(t: Target1D, fn: Callable[[float], float], spec: QuadratureSpec | None = None) -> float:
    """``E_f[fn(X)]`` by adaptive quadrature against the normalised density."""
    spec = spec or QuadratureSpec()
    a, b = _support(t)
    lf0 = float(t.log_f(t.loc))
    dens = lambda x: math.exp(float(t.log_f(x)) - lf0)
    pts = [a, t.loc, b] if a < t.loc < b else [a, b]
    mass = num = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        z, _ = adaptive_quad(dens, lo, hi, epsabs=0.0, epsrel=1e-13, limit=spec.max_subdivisions)
        v, _ = adaptive_quad(lambda x: float(fn(x)) * dens(x), lo, hi, epsabs=0.0,
                             epsrel=1e-13, limit=spec.max_subdivisions)
        mass += z
        num += v
    value = num / mass
    if not math.isfinite(value) or abs(value) > _OVERFLOW_GUARD:
        raise QuadratureError(f"{t.name}: expectation diverged", value)
    return value


def roughness_I(t: Target1D, spec: QuadratureSpec | None = None) -> float:
    """``I = E_f[(f'/f)^2]`` computed numerically."""
    value = expect(t, lambda x: float(t.w1(x)) ** 2, spec)
    if not value > 0:
        raise QuadratureError(f"{t.name}: roughness constant is not positive", value)
    return value


def roughness(t: Target1D, spec: QuadratureSpec | None = None) -> float:
    """Stored ``I`` when known in closed form, otherwise :func:`roughness_I`."""
    return t.I if t.I is not None else roughness_I(t, spec)


class MomentReport(NamedTuple):
    score_8th: float
    curvature_4th: float
    score_8th_finite: bool
    curvature_4th_finite: bool


def moment_check(t: Target1D, spec: QuadratureSpec | None = None) -> MomentReport:
    """Estimate ``E[(f'/f)^8]`` and ``E[(f''/f)^4]``; never raises on divergence."""

    def safe(fn):
        try:
            v = expect(t, fn, spec)
        except (QuadratureError, OverflowError, ZeroDivisionError):
            return math.inf, False
        return v, math.isfinite(v)

    s8, f8 = safe(lambda x: float(t.w1(x)) ** 8)
    # f''/f = w'' + (w')^2 with w = log f
    c4, f4 = safe(lambda x: (float(t.w2(x)) + float(t.w1(x)) ** 2) ** 4)
    return MomentReport(s8, c4, f8, f4)
