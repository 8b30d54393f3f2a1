"""Speed-measure maximisation and the tables built on it.

The diffusion speed is ``h(l) = l^2 M(l)``.  In the ``theta = l^2 I``
parametrisation ``I h(l) = theta M(theta)``, so the maximiser in ``theta`` is
target independent and ``l* = sqrt(theta* / I)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .accept import BalancingFunction
from .errors import BracketError, DomainError
from .quad import DEFAULT_SPEC, QuadratureSpec, acceptance_rate

DEFAULT_BRACKET = (1e-3, 100.0)
DEFAULT_TOL = 1e-6
GRID_POINTS = 64
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


class MultimodalWarning(UserWarning):
    """The coarse scan found more than one local maximum."""


@dataclass(frozen=True)
class OptimalScaling:
    theta_star: float
    l_star_sqrtI: float
    aoar: float
    speed_at_opt: float


def speed_measure(g: BalancingFunction, theta, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """``theta * M(theta)``, i.e. ``I h(l)`` at ``theta = l^2 I``."""
    return float(theta) * acceptance_rate(g, theta, spec)


def golden_section_max(f, lo, hi, tol):
    """Maximise a unimodal ``f`` on ``[lo, hi]`` until the bracket is narrower than ``tol``."""
    x1 = hi - _INVPHI * (hi - lo)
    x2 = lo + _INVPHI * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > tol:
        if f1 >= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _INVPHI * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _INVPHI * (hi - lo)
            f2 = f(x2)
    return (x1, f1) if f1 >= f2 else (x2, f2)


def optimize(
    g: BalancingFunction,
    bracket: tuple[float, float] = DEFAULT_BRACKET,
    tol: float = DEFAULT_TOL,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> OptimalScaling:
    """Locate ``theta*`` maximising ``theta M(theta)``.

    A 64-point log-spaced scan picks the best grid cell; golden-section search
    then refines inside the two cells around it.

    Raises:
        BracketError: the best grid point is a bracket endpoint.
    """
    lo, hi = map(float, bracket)
    if not (0 < lo < hi and math.isfinite(hi)):
        raise DomainError(f"bracket must satisfy 0 < lo < hi, got {bracket}")
    if not tol > 0:
        raise DomainError(f"tol must be positive, got {tol}")

    grid = np.geomspace(lo, hi, GRID_POINTS)
    vals = np.array([speed_measure(g, t, spec) for t in grid])
    i = int(np.argmax(vals))  # first maximum wins ties, i.e. the smaller theta
    if i == 0 or i == GRID_POINTS - 1:
        raise BracketError(
            f"{g}: speed is maximised at bracket endpoint theta={grid[i]:g}; widen the bracket"
        )
    inner = vals[1:-1]
    peaks = np.flatnonzero((inner > vals[:-2]) & (inner >= vals[2:])) + 1
    if peaks.size > 1:
        warnings.warn(
            f"{g}: several local maxima on the coarse grid at theta={grid[peaks].tolist()}",
            MultimodalWarning,
            stacklevel=2,
        )

    theta, speed = golden_section_max(lambda t: speed_measure(g, t, spec), grid[i - 1], grid[i + 1], tol)
    theta, speed = float(theta), float(speed)
    return OptimalScaling(
        theta_star=theta,
        l_star_sqrtI=math.sqrt(theta),
        aoar=speed / theta,
        speed_at_opt=speed,
    )


def optimal_l(g: BalancingFunction, I: float = 1.0) -> float:
    """Optimal proposal scale ``l* = sqrt(theta* / I)``."""
    if not (math.isfinite(I) and I > 0):
        raise DomainError(f"I must be positive, got {I}")
    return math.sqrt(optimize(g).theta_star / I)


# default rule set for table1, in column order
REFERENCE_TABLE_SPECS = (
    "mh",
    "bedard:1",
    "bedard:1.913",
    "bedard:5",
    "genbarker:10",
    "genbarker:5",
    "genbarker:2",
    "barker",
)


@dataclass(frozen=True)
class TableRow:
    name: str
    result: OptimalScaling | None = None
    error: str | None = None

    @property
    def aoar(self):
        return self.result.aoar if self.result else math.nan

    @property
    def l_star_sqrtI(self):
        return self.result.l_star_sqrtI if self.result else math.nan


def table1(gs: Sequence[BalancingFunction], **kwargs) -> list[TableRow]:
    """One optimisation per balancing function; a failing row does not stop the rest."""
    rows = []
    for g in gs:
        try:
            rows.append(TableRow(str(g), optimize(g, **kwargs)))
        except (ArithmeticError, ValueError) as exc:
            rows.append(TableRow(str(g), error=f"{type(exc).__name__}: {exc}"))
    return rows


@dataclass(frozen=True)
class CurvePoint:
    theta: float
    h1: float
    h2: float
    m1: float
    m2: float

    @property
    def ratio(self):
        return self.h1 / self.h2


def efficiency_curves(
    g1: BalancingFunction,
    g2: BalancingFunction,
    thetas,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> list[CurvePoint]:
    """Speed and acceptance of two rules on a shared ``theta`` grid (``I = 1``).

    ``(m, h)`` pairs trace efficiency against acceptance rate; ``ratio``
    against ``l = sqrt(theta)`` gives the relative efficiency curve.
    """
    out = []
    for t in np.asarray(thetas, dtype=float):
        m1 = acceptance_rate(g1, t, spec)
        m2 = m1 if g2 == g1 else acceptance_rate(g2, t, spec)
        out.append(CurvePoint(float(t), t * m1, t * m2, m1, m2))
    return out


def optimal_efficiency_ratio(g1: BalancingFunction, g2: BalancingFunction) -> float:
    """``h1(l1*) / h2(l2*)``, each rule at its own optimal scale."""
    return optimize(g1).speed_at_opt / optimize(g2).speed_at_opt
