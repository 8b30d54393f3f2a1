import math

import numpy as np
import pytest

from scaling_lab import sampler, target
from scaling_lab.accept import barker, mh, parse
from scaling_lab.errors import ChainError, DomainError
from scaling_lab.sampler import ChainConfig, run_chain

N = 200_000


def cfg(**kw):
    base = dict(d=1, l=2.4, g=mh(), target=target.normal(), n_iters=N, seed=3)
    base.update(kw)
    return ChainConfig(**base)


def test_reproducible():
    assert run_chain(cfg()) == run_chain(cfg())
    assert run_chain(cfg()) != run_chain(cfg(seed=4))


def test_sigma_convention():
    assert cfg(d=1, l=2.0).sigma == 2.0
    assert cfg(d=5, l=2.0).sigma == 1.0
    assert cfg(n_iters=1000).n_burn == 100
    assert cfg(n_iters=1000, burn_in=0).n_burn == 0


@pytest.mark.parametrize(
    "kw",
    [dict(d=0), dict(l=0.0), dict(l=math.nan), dict(n_iters=0), dict(burn_in=N), dict(seed=-1),
     dict(seed=2**64), dict(d=2, init=np.zeros(3))],
)
def test_config_validation(kw):
    with pytest.raises(DomainError):
        cfg(**kw)


@pytest.mark.parametrize("spec", ["mh", "barker", "lazy:0.3", "genbarker:3", "bedard:1.913", "mix:0.5*mh+0.5*barker"])
def test_stationarity_preserved(spec):
    s = run_chain(cfg(g=parse(spec), n_iters=400_000, seed=11))
    assert abs(s.mean_first_coord) < 4 * s.mean_se
    assert abs(s.var_first_coord - 1.0) < 4 * s.var_se


@pytest.mark.parametrize("spec", ["mh", "barker", "genbarker:2", "bedard:1"])
@pytest.mark.parametrize("d", [1, 10])
def test_indicator_and_rao_agree(spec, d):
    s = run_chain(cfg(g=parse(spec), d=d, seed=5))
    combined = math.hypot(s.accept_se, s.rao_se)
    assert abs(s.accept_rate_indicator - s.accept_rate_rao) < 3 * combined


def test_stats_ranges():
    s = run_chain(cfg(d=5))
    assert 0 <= s.accept_rate_indicator <= 1 and 0 <= s.accept_rate_rao <= 1
    assert -1 <= s.lag1_autocorr_first_coord <= 1
    assert s.esjd >= 0
    assert s.n_used == N - N // 10


def test_lag1_matches_direct_computation(monkeypatch):
    # small blocks force the streaming path across block boundaries
    monkeypatch.setattr(sampler, "BLOCK", 1000)
    c = cfg(n_iters=10_000, burn_in=1234)
    trace = np.concatenate([f for _, _, _, f, _ in sampler._chain_blocks(c)])[1234:]
    xc = trace - trace.mean()
    direct = np.dot(xc[:-1], xc[1:]) / np.dot(xc, xc)
    s = run_chain(c)
    assert s.lag1_autocorr_first_coord == pytest.approx(direct, abs=1e-10)
    assert s.mean_first_coord == pytest.approx(trace.mean(), abs=1e-12)
    assert s.var_first_coord == pytest.approx(trace.var(), abs=1e-10)


def test_tiny_step_always_accepts():
    s = run_chain(cfg(d=5, l=1e-4, n_iters=20_000))
    assert s.accept_rate_indicator > 0.999


def test_peskun_ordering():
    a_mh = run_chain(cfg(d=30, l=2.4, g=mh(), n_iters=400_000, seed=9)).accept_rate_indicator
    a_b = run_chain(cfg(d=30, l=2.4, g=barker(), n_iters=400_000, seed=9)).accept_rate_indicator
    assert a_b <= a_mh


def test_python_fallback_matches_kernel():
    t = target.normal()
    custom = target.Target1D("custom-normal", t.log_f, t.w1, t.w2, t.sampler, I=1.0)
    assert custom.code is None
    fast = run_chain(cfg(d=3, n_iters=5000))
    slow = run_chain(cfg(d=3, n_iters=5000, target=custom))
    assert slow.accept_rate_indicator == fast.accept_rate_indicator
    assert slow.mean_first_coord == pytest.approx(fast.mean_first_coord, abs=1e-12)


@pytest.mark.parametrize("name", ["quartic", "logistic"])
def test_other_targets_stationary(name):
    t = target.parse_target(name)
    s = run_chain(cfg(target=t, n_iters=400_000, seed=2))
    ref_var = target.expect(t, lambda x: x * x)
    assert abs(s.mean_first_coord) < 4 * s.mean_se
    assert abs(s.var_first_coord - ref_var) < 4 * s.var_se


def test_nonfinite_state_raises():
    t = target.normal()
    cliff = target.Target1D(
        "cliff",
        lambda x: np.where(np.asarray(x) < 3.0, -0.5 * np.asarray(x) ** 2, -np.inf),
        t.w1, t.w2, t.sampler,
    )
    with pytest.raises(ChainError) as info:
        run_chain(cfg(target=cliff, l=5.0, n_iters=10_000))
    assert info.value.iteration >= 0
    with pytest.raises(ChainError):
        run_chain(cfg(target=cliff, init=np.array([4.0])))


def test_acceptance_vs_dimension_rows():
    rows = sampler.acceptance_vs_dimension(mh(), 1e-4, target.normal(), [5], 10_000)
    assert rows[0].d == 5 and rows[0].accept_rate > 0.999
    rows = sampler.acceptance_vs_dimension(mh(), 2.38, target.normal(), [2, 5], 20_000, seed=1)
    assert [r.d for r in rows] == [2, 5]
    assert len({r.seed for r in rows}) == 2


def test_esjd_tracks_speed():
    ls = np.arange(1.0, 4.01, 0.5)
    esjd = []
    speed = []
    for l in ls:
        s = run_chain(cfg(d=20, l=float(l), n_iters=200_000, seed=7))
        esjd.append(s.esjd)
        speed.append(l * l * s.accept_rate_rao)
    assert abs(int(np.argmax(esjd)) - int(np.argmax(speed))) <= 1


def test_finite_d_optimal_small():
    res = sampler.finite_d_optimal(mh(), target.normal(), 1, np.arange(1.0, 4.01, 0.5), 100_000)
    assert len(res.grid) == 7
    assert not res.endpoint
    assert 0 < res.accept_rate_at_opt < 1
    with pytest.raises(DomainError):
        sampler.finite_d_optimal(mh(), target.normal(), 1, [1.0, 2.0], 1000)
    edge = sampler.finite_d_optimal(mh(), target.normal(), 1, [0.1, 0.2, 0.3, 0.4, 0.5], 20_000)
    assert edge.endpoint and edge.l_opt == 0.5


def test_env_seed(monkeypatch):
    monkeypatch.delenv(sampler.SEED_ENV, raising=False)
    assert sampler.default_seed() == 0
    monkeypatch.setenv(sampler.SEED_ENV, "42")
    assert sampler.default_seed() == 42
