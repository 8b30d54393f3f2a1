"""Gaussian expectations behind the limiting acceptance rate.

With ``theta = l^2 I`` the limiting acceptance rate of a random-walk chain
using balancing function ``g`` is

    M(theta) = E[ g(exp(sqrt(theta) Z - theta / 2)) ],   Z ~ N(0, 1).

Integrating against the standard normal keeps the weight fixed as ``theta``
varies.  The integrand of MH-like rules has a kink at log-ratio ``b = 0``,
i.e. at ``Z = sqrt(theta) / 2``, so the domain is split at every registered
kink and each smooth piece goes to adaptive Gauss-Kronrod (QUADPACK).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from scipy import integrate, special

from .accept import BalancingFunction, log_g_scalar
from .errors import DomainError, QuadratureError

# mass of N(0,1) beyond +-12 is ~3.6e-33, and |g| <= 1
Z_MAX = 12.0
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

LogG = Union[BalancingFunction, Callable[[float], float]]


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-10
    max_subdivisions: int = 200
    kink_points: tuple[float, ...] = (0.0,)

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise DomainError(f"abs_tol must be positive, got {self.abs_tol}")
        if self.max_subdivisions < 1:
            raise DomainError(f"max_subdivisions must be >= 1, got {self.max_subdivisions}")


DEFAULT_SPEC = QuadratureSpec()


def _check_theta(theta):
    theta = float(theta)
    if not (math.isfinite(theta) and theta > 0):
        raise DomainError(f"theta must be positive and finite, got {theta}")
    return theta


def adaptive_quad(fn, lo, hi, *, epsabs, epsrel=0.0, limit=200):
    """``scipy.integrate.quad`` that raises :class:`QuadratureError` instead of warning."""
    out = integrate.quad(fn, lo, hi, epsabs=epsabs, epsrel=epsrel, limit=limit, full_output=1)
    value, err = out[0], out[1]
    if len(out) > 3 and err > max(epsabs, epsrel * abs(value)):
        raise QuadratureError(f"quadrature on [{lo}, {hi}] failed: {out[3]}", value, err)
    return value, err


def _log_g(g: LogG) -> Callable[[float], float]:
    if isinstance(g, BalancingFunction):
        k, p, w = g.flat
        return lambda b: log_g_scalar(k, p, w, b)
    if callable(g):
        return g
    raise TypeError(f"expected a BalancingFunction or callable b -> g(e^b), got {g!r}")


def _breaks(g: LogG, theta: float, spec: QuadratureSpec) -> list[float]:
    s = math.sqrt(theta)
    kinks = set(spec.kink_points)
    if isinstance(g, BalancingFunction):
        kinks.update(g.kinks)
    zs = sorted({(b + 0.5 * theta) / s for b in kinks} | {-Z_MAX, Z_MAX})
    return [z for z in zs if -Z_MAX <= z <= Z_MAX]


def _gauss_expect(fn, g, theta, spec):
    """``E[fn(Z)]`` over pieces of [-Z_MAX, Z_MAX]; the pieces share the tolerance."""
    pts = _breaks(g, theta, spec)
    n = len(pts) - 1
    total = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        v, _ = adaptive_quad(fn, lo, hi, epsabs=spec.abs_tol / n, limit=spec.max_subdivisions)
        total += v
    return total


def acceptance_rate(g: LogG, theta, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Limiting acceptance rate ``M`` at ``theta = l^2 I``."""
    theta = _check_theta(theta)
    lg = _log_g(g)
    s = math.sqrt(theta)
    h = 0.5 * theta

    def integrand(z):
        return lg(s * z - h) * math.exp(-0.5 * z * z) * _INV_SQRT_2PI

    m = _gauss_expect(integrand, g, theta, spec)
    return min(1.0, max(0.0, m))


def acceptance_rate_mh_closed(theta) -> float:
    """``2 Phi(-sqrt(theta) / 2)`` via the complementary error function."""
    theta = _check_theta(theta)
    return float(special.erfc(math.sqrt(theta) / (2.0 * math.sqrt(2.0))))


def acceptance_rate_bedard_closed(h, theta) -> float:
    """``2 Phi(-sqrt(h + theta) / 2)``; ``h = 0`` recovers MH."""
    theta = _check_theta(theta)
    h = float(h)
    if not (math.isfinite(h) and h >= 0):
        raise DomainError(f"h must be nonnegative, got {h}")
    return float(special.erfc(math.sqrt(h + theta) / (2.0 * math.sqrt(2.0))))


def odd_moment(g: LogG, theta, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """``E[X g(e^X)]`` for ``X ~ N(-theta/2, theta)``.

    Zero for every ``g`` satisfying the balance identity; any other value
    exposes a non-member.
    """
    theta = _check_theta(theta)
    lg = _log_g(g)
    s = math.sqrt(theta)
    h = 0.5 * theta

    def integrand(z):
        x = s * z - h
        return x * lg(x) * math.exp(-0.5 * z * z) * _INV_SQRT_2PI

    return _gauss_expect(integrand, g, theta, spec)


def acceptance_rates(g: LogG, thetas, spec: QuadratureSpec = DEFAULT_SPEC) -> np.ndarray:
    return np.array([acceptance_rate(g, t, spec) for t in np.asarray(thetas, dtype=float)])
