import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scaling_lab import accept
from scaling_lab.accept import barker, bedard, generalized_barker, lazy, mh, mix
from scaling_lab.errors import DomainError

# 2 Phi(-1/2) from mpmath at 30 digits
BEDARD1_AT_ONE = 0.617075077451973792724590778783


@pytest.mark.parametrize(
    "g, z, expected",
    [
        (mh(), 2.0, 1.0),
        (mh(), 0.25, 0.25),
        (barker(), 1.0, 0.5),
        (generalized_barker(2), 1.0, 2.0 / 3.0),
        (lazy(0.2), 3.0, 0.8),
        (bedard(1.0), 1.0, BEDARD1_AT_ONE),
    ],
)
def test_evaluate_examples(g, z, expected):
    assert accept.evaluate(g, z) == pytest.approx(expected, abs=1e-14)


def test_log_evaluate_examples():
    assert accept.log_evaluate(barker(), 0.0) == 0.5
    assert accept.log_evaluate(barker(), 800.0) == 1.0
    assert accept.log_evaluate(barker(), -800.0) == 0.0
    assert accept.log_evaluate(mh(), -1.0) == pytest.approx(math.exp(-1.0), abs=1e-15)
    for b in (-700.0, 700.0):
        for g in (generalized_barker(10), bedard(1.913), mh()):
            v = accept.log_evaluate(g, b)
            assert 0.0 <= v <= 1.0 and math.isfinite(v)


def test_domain_errors():
    with pytest.raises(DomainError):
        accept.evaluate(mh(), -1.0)
    with pytest.raises(DomainError):
        accept.evaluate(mh(), math.inf)
    with pytest.raises(DomainError):
        accept.log_evaluate(mh(), math.nan)
    with pytest.raises(DomainError):
        lazy(1.5)
    with pytest.raises(DomainError):
        generalized_barker(0)
    with pytest.raises(DomainError):
        generalized_barker(2.5)
    with pytest.raises(DomainError):
        bedard(1e-13)
    with pytest.raises(DomainError):
        mix([0.5, 0.6], [mh(), barker()])
    with pytest.raises(DomainError):
        mix([-0.5, 1.5], [mh(), barker()])


def test_balance_identity_on_decades(g, decade_grid):
    rep = accept.check_balance(g, decade_grid, 1e-12)
    assert rep.passed, rep


@pytest.mark.parametrize("g", [barker(), mh(), mix([0.5, 0.5], [mh(), barker()])], ids=str)
def test_check_balance_geometric_grid(g):
    assert accept.check_balance(g, np.geomspace(1e-6, 1e6, 1001), 1e-12).passed


def test_check_balance_detects_violation():
    # BalancingFunction is only a container here; a constant g is not a member
    rep = accept.check_balance(lazy(0.0), [0.5, 2.0], 1e-12)
    assert rep.passed
    with pytest.raises(DomainError):
        accept.check_balance(mh(), [0.0, 1.0], 1e-12)


def test_range_and_limits(g, decade_grid):
    v = accept.evaluate(g, decade_grid)
    assert np.all((v >= 0) & (v <= 1))
    assert accept.evaluate(g, 0.0) == 0.0
    if g.kind in ("mh", "barker", "genbarker"):
        assert accept.evaluate(g, 1e12) == pytest.approx(1.0, abs=1e-11)


@pytest.mark.parametrize("z", np.geomspace(1e-4, 1e4, 41))
def test_generalized_barker_increases_to_mh(z):
    vals = [accept.evaluate(generalized_barker(r), z) for r in range(1, 11)]
    assert np.all(np.diff(vals) >= -1e-15)
    assert vals[-1] <= accept.evaluate(mh(), z) + 1e-15
    assert vals[0] == pytest.approx(accept.evaluate(barker(), z), abs=1e-15)


def test_log_evaluate_matches_evaluate(g):
    b = np.linspace(-40, 40, 801)
    np.testing.assert_allclose(accept.log_evaluate(g, b), accept.evaluate(g, np.exp(b)), rtol=0, atol=1e-12)


def test_mix_weight_one_is_identity():
    z = np.geomspace(1e-5, 1e5, 101)
    np.testing.assert_array_equal(accept.evaluate(mix([1.0], [mh()]), z), accept.evaluate(mh(), z))


def test_mix_nesting_is_flattened():
    inner = mix([0.5, 0.5], [mh(), barker()])
    g = mix([0.5, 0.5], [inner, bedard(1.0)])
    assert [q.kind for q in g.parts] == ["mh", "barker", "bedard"]
    assert g.weights == (0.25, 0.25, 0.5)


@pytest.mark.parametrize(
    "g, expected, tol",
    [
        (barker(), 0.25, 1e-6),  # max of logistic'(b) = 1/4 at b = 0
        (mh(), 1.0, 1e-3),  # slope of e^b just below 0; grid step 1e-3
        (lazy(0.5), 0.5, 1e-3),
    ],
    ids=str,
)
def test_lipschitz_estimate(g, expected, tol):
    grid = np.linspace(-10, 10, 20001)
    assert accept.lipschitz_estimate(g, grid) == pytest.approx(expected, abs=tol)


def test_lipschitz_rejects_bad_grid():
    with pytest.raises(DomainError):
        accept.lipschitz_estimate(mh(), [1.0])
    with pytest.raises(DomainError):
        accept.lipschitz_estimate(mh(), [0.0, 1.0, 0.5])


@pytest.mark.parametrize(
    "text", ["mh", "barker", "lazy:0.2", "genbarker:3", "bedard:1.913", "mix:0.5*mh+0.5*barker"]
)
def test_parse_round_trip(text):
    g = accept.parse(text)
    assert str(g) == text
    assert accept.parse(str(g)) == g


@pytest.mark.parametrize("text", ["", "metropolis", "lazy", "genbarker:x", "mix:mh", "mix:0.5*mh"])
def test_parse_rejects(text):
    with pytest.raises(DomainError):
        accept.parse(text)


@settings(max_examples=200, deadline=None)
@given(
    b=st.floats(-30, 30),
    w=st.floats(0, 1),
    r=st.integers(1, 12),
    h=st.floats(0.01, 20),
)
def test_balance_identity_property(b, w, r, h):
    g = mix([w, 1 - w], [generalized_barker(r), bedard(h)]) if 0 < w < 1 else generalized_barker(r)
    lhs = accept.log_evaluate(g, b)
    rhs = math.exp(b) * accept.log_evaluate(g, -b)
    assert lhs == pytest.approx(rhs, rel=1e-11, abs=1e-15)
