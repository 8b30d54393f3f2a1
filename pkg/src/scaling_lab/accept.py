"""Balancing functions for ratio-based acceptance rules.

An acceptance rule of the form ``alpha(x, y) = g(pi(y) / pi(x))`` is
pi-reversible under a symmetric proposal whenever ``g(z) = z * g(1 / z)``.
This module provides the built-in members of that class (Metropolis-Hastings,
Lazy-MH, Barker, generalized Barker and the Bedard family), convex mixtures
of them, and numerically stable evaluation on both the ratio scale ``z`` and
the log-ratio scale ``b = log z``.

All evaluation goes through small numba kernels operating on a flat
``(kinds, params, weights)`` description of ``g`` so that the samplers can
reuse them inside compiled loops.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np
from numba import njit

from .errors import DomainError

MH, LAZY, BARKER, GENBARKER, BEDARD = 0, 1, 2, 3, 4
_KIND_CODES = {"mh": MH, "lazy": LAZY, "barker": BARKER, "genbarker": GENBARKER, "bedard": BEDARD}

_SQRT2 = math.sqrt(2.0)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_MIN_BEDARD_H = 1e-12
_WEIGHT_TOL = 1e-12


@njit(cache=True)
def _norm_cdf(x):
    return 0.5 * math.erfc(-x / _SQRT2)


@njit(cache=True)
def _log_norm_cdf(x):
    if x > -30.0:
        return math.log(0.5 * math.erfc(-x / _SQRT2))
    # Mills-ratio asymptotic series, erfc underflows past here
    x2 = x * x
    return -0.5 * x2 - math.log(-x) - _HALF_LOG_2PI + math.log(1.0 - 1.0 / x2 + 3.0 / (x2 * x2))


@njit(cache=True)
def _logistic(b):
    if b >= 0.0:
        return 1.0 / (1.0 + math.exp(-b))
    e = math.exp(b)
    return e / (1.0 + e)


@njit(cache=True)
def _component_log(kind, p, b):
    if kind == MH:
        return math.exp(b) if b < 0.0 else 1.0
    if kind == LAZY:
        return (1.0 - p) * (math.exp(b) if b < 0.0 else 1.0)
    if kind == BARKER:
        return _logistic(b)
    if kind == GENBARKER:
        # g = logistic(logsumexp(b, 2b, ..., rb))
        r = int(p)
        m = b if b > r * b else r * b
        s = 0.0
        for k in range(1, r + 1):
            s += math.exp(k * b - m)
        return _logistic(m + math.log(s))
    # BEDARD
    sh = math.sqrt(p)
    first = _norm_cdf((b - 0.5 * p) / sh)
    second = math.exp(b + _log_norm_cdf((-b - 0.5 * p) / sh))
    return first + second


@njit(cache=True)
def _component_ratio(kind, p, z):
    if z == 0.0:
        return 0.0
    if kind == MH:
        return min(1.0, z)
    if kind == LAZY:
        return (1.0 - p) * min(1.0, z)
    if kind == BARKER:
        return z / (1.0 + z)
    if kind == GENBARKER:
        r = int(p)
        if z <= 1.0:
            num = 0.0
            zk = 1.0
            for _ in range(r):
                zk *= z
                num += zk
            return num / (1.0 + num)
        # divide through by z**r
        w = 1.0 / z
        num = 0.0
        wk = 1.0
        for _ in range(r):
            num += wk
            wk *= w
        return num / (num + wk)
    return _component_log(kind, p, math.log(z))


@njit(cache=True)
def log_g_scalar(kinds, params, weights, b):
    """``g(exp(b))`` for a flat mixture description; compiled, scalar."""
    out = 0.0
    for i in range(kinds.shape[0]):
        out += weights[i] * _component_log(kinds[i], params[i], b)
    return out


@njit(cache=True)
def _log_g_array(kinds, params, weights, b):
    out = np.empty_like(b)
    for j in range(b.shape[0]):
        out[j] = log_g_scalar(kinds, params, weights, b[j])
    return out


@njit(cache=True)
def _ratio_g_array(kinds, params, weights, z):
    out = np.empty_like(z)
    for j in range(z.shape[0]):
        acc = 0.0
        for i in range(kinds.shape[0]):
            acc += weights[i] * _component_ratio(kinds[i], params[i], z[j])
        out[j] = acc
    return out


class Flat(NamedTuple):
    kinds: np.ndarray
    params: np.ndarray
    weights: np.ndarray


@dataclass(frozen=True)
class BalancingFunction:
    """A balancing function ``g`` with ``g(z) = z g(1/z)``.

    Use the module-level constructors (:func:`mh`, :func:`lazy`,
    :func:`barker`, :func:`generalized_barker`, :func:`bedard`, :func:`mix`)
    or :func:`parse` rather than building instances by hand.
    """

    kind: str
    param: float = 0.0
    weights: tuple[float, ...] = ()
    parts: tuple["BalancingFunction", ...] = field(default=())

    def __post_init__(self):
        if self.kind == "mix":
            _validate_mix(self.weights, self.parts)
            return
        if self.kind not in _KIND_CODES:
            raise DomainError(f"unknown balancing function kind {self.kind!r}")
        p = self.param
        if not math.isfinite(p):
            raise DomainError(f"{self.kind} parameter must be finite, got {p}")
        if self.kind == "lazy" and not 0.0 <= p <= 1.0:
            raise DomainError(f"lazy epsilon must lie in [0, 1], got {p}")
        if self.kind == "genbarker" and (p < 1 or p != int(p)):
            raise DomainError(f"generalized Barker needs an integer r >= 1, got {p}")
        if self.kind == "bedard" and p <= _MIN_BEDARD_H:
            raise DomainError(f"Bedard h must exceed {_MIN_BEDARD_H}; use mh() for the h -> 0 limit")

    @cached_property
    def flat(self) -> Flat:
        if self.kind == "mix":
            kinds = [_KIND_CODES[q.kind] for q in self.parts]
            params = [q.param for q in self.parts]
            weights = list(self.weights)
        else:
            kinds, params, weights = [_KIND_CODES[self.kind]], [self.param], [1.0]
        return Flat(
            np.asarray(kinds, dtype=np.int64),
            np.asarray(params, dtype=np.float64),
            np.asarray(weights, dtype=np.float64),
        )

    @property
    def kinks(self) -> tuple[float, ...]:
        """Log-ratio points where ``b -> g(exp(b))`` is not differentiable."""
        if self.kind in ("mh", "lazy"):
            return (0.0,)
        if self.kind == "mix":
            return (0.0,) if any(q.kinks for q in self.parts) else ()
        return ()

    def __str__(self):
        if self.kind in ("mh", "barker"):
            return self.kind
        if self.kind == "genbarker":
            return f"genbarker:{int(self.param)}"
        if self.kind in ("lazy", "bedard"):
            return f"{self.kind}:{self.param:g}"
        return "mix:" + "+".join(f"{w:g}*{q}" for w, q in zip(self.weights, self.parts))

    def __call__(self, z):
        return evaluate(self, z)


def _validate_mix(weights, parts):
    if len(weights) != len(parts) or not parts:
        raise DomainError("mix needs one weight per part and at least one part")
    w = np.asarray(weights, dtype=float)
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise DomainError(f"mix weights must be finite and nonnegative, got {weights}")
    if abs(w.sum() - 1.0) > _WEIGHT_TOL:
        raise DomainError(f"mix weights must sum to 1, got sum {w.sum()!r}")
    for q in parts:
        if not isinstance(q, BalancingFunction) or q.kind == "mix":
            raise DomainError("mix parts must be flattened, non-mix balancing functions")


def mh() -> BalancingFunction:
    return BalancingFunction("mh")


def lazy(eps: float) -> BalancingFunction:
    return BalancingFunction("lazy", float(eps))


def barker() -> BalancingFunction:
    return BalancingFunction("barker")


def generalized_barker(r: int) -> BalancingFunction:
    return BalancingFunction("genbarker", float(r))


def bedard(h: float) -> BalancingFunction:
    return BalancingFunction("bedard", float(h))


def mix(weights: Sequence[float], parts: Sequence[BalancingFunction]) -> BalancingFunction:
    """Convex combination of balancing functions.

    Nested mixtures are flattened into a single level, multiplying the
    weights through.
    """
    if len(weights) != len(parts):
        raise DomainError("mix needs one weight per part")
    flat_w: list[float] = []
    flat_p: list[BalancingFunction] = []
    for w, q in zip(weights, parts):
        if q.kind == "mix":
            flat_w.extend(float(w) * wi for wi in q.weights)
            flat_p.extend(q.parts)
        else:
            flat_w.append(float(w))
            flat_p.append(q)
    return BalancingFunction("mix", weights=tuple(flat_w), parts=tuple(flat_p))


BUILTINS = {
    "mh": mh,
    "barker": barker,
}
_PARAM_BUILTINS = {
    "lazy": lazy,
    "genbarker": lambda s: generalized_barker(_parse_int(s)),
    "bedard": bedard,
}


def _parse_int(s):
    v = float(s)
    if v != int(v):
        raise DomainError(f"expected an integer, got {s!r}")
    return int(v)


def parse(text: str) -> BalancingFunction:
    """Build a balancing function from its textual form.

    Accepted forms: ``mh``, ``barker``, ``lazy:0.2``, ``genbarker:3``,
    ``bedard:1.913`` and ``mix:0.5*mh+0.5*barker``.
    """
    text = text.strip()
    if text.startswith("mix:"):
        weights, parts = [], []
        for term in text[4:].split("+"):
            m = re.fullmatch(r"\s*([^*]+)\*(.+)", term)
            if m is None:
                raise DomainError(f"malformed mix term {term!r}; expected weight*g")
            try:
                weights.append(float(m.group(1)))
            except ValueError:
                raise DomainError(f"malformed mix weight {m.group(1)!r}") from None
            parts.append(parse(m.group(2)))
        return mix(weights, parts)
    name, _, arg = text.partition(":")
    name = name.strip().lower()
    try:
        if name in BUILTINS and not arg:
            return BUILTINS[name]()
        if name in _PARAM_BUILTINS and arg:
            return _PARAM_BUILTINS[name](float(arg) if name != "genbarker" else arg)
    except ValueError as exc:
        if isinstance(exc, DomainError):
            raise
        raise DomainError(f"malformed parameter in {text!r}") from None
    raise DomainError(
        f"unknown balancing function {text!r}; expected one of mh, barker, lazy:E, "
        "genbarker:R, bedard:H, mix:W*G+W*G"
    )


def _as_array(x):
    arr = np.asarray(x, dtype=np.float64)
    return arr, arr.ndim == 0


def evaluate(g: BalancingFunction, z):
    """``g(z)`` for scalar or array ``z >= 0``."""
    arr, scalar = _as_array(z)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise DomainError("g(z) requires finite z >= 0")
    k, p, w = g.flat
    out = _ratio_g_array(k, p, w, arr.reshape(-1)).reshape(arr.shape)
    return float(out) if scalar else out


def log_evaluate(g: BalancingFunction, b):
    """``g(exp(b))`` without forming ``exp(b)``; safe for ``|b|`` in the hundreds."""
    arr, scalar = _as_array(b)
    if not np.all(np.isfinite(arr)):
        raise DomainError("log-ratio must be finite")
    k, p, w = g.flat
    if scalar:
        return log_g_scalar(k, p, w, float(arr))
    return _log_g_array(k, p, w, arr.reshape(-1)).reshape(arr.shape)


class BalanceReport(NamedTuple):
    max_violation: float
    passed: bool


def check_balance(g: BalancingFunction, zs, tol: float = 1e-12) -> BalanceReport:
    """Largest ``|g(z) - z g(1/z)|`` over ``zs``."""
    z = np.asarray(zs, dtype=float).reshape(-1)
    if z.size == 0:
        raise DomainError("need at least one z")
    if np.any(~np.isfinite(z)) or np.any(z <= 0):
        raise DomainError("balance check needs finite z > 0")
    if tol <= 0:
        raise DomainError("tol must be positive")
    viol = float(np.max(np.abs(evaluate(g, z) - z * evaluate(g, 1.0 / z))))
    return BalanceReport(viol, viol <= tol)


def lipschitz_estimate(g: BalancingFunction, b_grid) -> float:
    """Largest finite-difference slope of ``b -> g(exp(b))`` on a sorted grid.

    This is a lower bound on the Lipschitz constant.
    """
    b = np.asarray(b_grid, dtype=float).reshape(-1)
    if b.size < 2:
        raise DomainError("grid needs at least two points")
    db = np.diff(b)
    if np.any(db <= 0):
        raise DomainError("grid must be strictly increasing")
    return float(np.max(np.abs(np.diff(log_evaluate(g, b))) / db))
