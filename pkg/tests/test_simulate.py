import math

import numpy as np
import pytest

from cnfchain import _pykernels
from cnfchain.model import CnfSpec, TenantSpec, build_generator, solve_steady_state
from cnfchain.mugf import ChainSpec, TierSpec, availability, chain_mugf
from cnfchain.queueing import ServiceStats, mean_sojourn
from cnfchain.simulate import (SimulationConfig, _chain_tables, jump_tables, lognormal_params, simulate_chain_availability,
                               simulate_cnf_occupancy, simulate_mgc_sojourn, summarize)
from conftest import scaled_chain, scaled_cnf

try:
    from cnfchain import _ckernels
except ImportError:
    _ckernels = None

needs_compiled = pytest.mark.skipif(_ckernels is None, reason="compiled kernels not built")


def test_config_validation():
    with pytest.raises(ValueError):
        SimulationConfig(1, 0.0)
    with pytest.raises(ValueError):
        SimulationConfig(1, 10.0, warmup=1.0)
    with pytest.raises(ValueError):
        SimulationConfig(1, 10.0, replications=0)


def test_substreams_are_independent_and_reproducible():
    a = [g.random() for g in SimulationConfig(5, 1.0, replications=3).generators()]
    b = [g.random() for g in SimulationConfig(5, 1.0, replications=3).generators()]
    assert a == b
    assert len(set(a)) == 3


def test_two_state_occupancy():
    cnf = CnfSpec((TenantSpec(1, 1, 1.0, 1.0, 1.0),), 1e-9, 1.0, 1e-9, 1.0, 1)
    est = simulate_cnf_occupancy(cnf, SimulationConfig(0, 2e4, replications=8))
    assert est.labels[:2] == ("(1)", "(0)")
    for k in range(2):
        assert abs(est.mean[k] - 0.5) < 4 * est.stderr[k]


def test_warmup_does_not_change_the_estimate():
    cnf = scaled_cnf()
    p = solve_steady_state(build_generator(cnf))
    cold = simulate_cnf_occupancy(cnf, SimulationConfig(1, 5e5, warmup=0.0, replications=8))
    warm = simulate_cnf_occupancy(cnf, SimulationConfig(1, 5e5, warmup=0.1, replications=8))
    for est in (cold, warm):
        assert abs(est.mean[0] - p[0]) < 4 * est.stderr[0]
    assert abs(cold.mean[0] - warm.mean[0]) < 4 * math.hypot(cold.stderr[0], warm.stderr[0])


def test_occupancy_is_deterministic():
    sim = SimulationConfig(9, 1e4, replications=3)
    a = simulate_cnf_occupancy(scaled_cnf(), sim)
    b = simulate_cnf_occupancy(scaled_cnf(), sim)
    np.testing.assert_array_equal(a.mean, b.mean)


def test_lognormal_matching():
    mu, sigma = lognormal_params(0.041, 0.5581)
    mean = math.exp(mu + sigma ** 2 / 2)
    cv = math.sqrt(math.exp(sigma ** 2) - 1)
    assert mean == pytest.approx(0.041, rel=1e-12)
    assert cv == pytest.approx(0.5581, rel=1e-12)


def test_mm1_by_simulation():
    svc = ServiceStats(0.5, 1.0)
    est = simulate_mgc_sojourn(1.0, svc, 1, SimulationConfig(2, 200_000, replications=10), distribution="exponential")
    assert abs(est.mean - mean_sojourn(1.0, 2.0, 1)) < 4 * est.stderr


def test_deterministic_service_at_low_load():
    est = simulate_mgc_sojourn(0.01, ServiceStats(1.0, 0.0), 1, SimulationConfig(3, 20_000, replications=2))
    assert est.mean == pytest.approx(1.0, rel=0.02)


def test_single_replication_has_no_interval():
    est = simulate_mgc_sojourn(1.0, ServiceStats(0.5, 0.5), 1, SimulationConfig(3, 1000, replications=1))
    assert est.ci is None and math.isnan(est.stderr)
    assert not est.contains(est.mean)


def test_interval_shrinks_with_replications():
    svc = ServiceStats(0.5, 0.7)
    few = simulate_mgc_sojourn(1.0, svc, 1, SimulationConfig(4, 500, replications=40))
    many = simulate_mgc_sojourn(1.0, svc, 1, SimulationConfig(4, 500, replications=4000))
    ratio = (few.ci[1] - few.ci[0]) / (many.ci[1] - many.ci[0])
    # sqrt(100) = 10, times the t-quantile ratio 2.023 / 1.961
    assert 7 < ratio < 16


def test_summarize():
    est = summarize([1.0, 2.0, 3.0])
    assert est.mean == 2.0
    assert est.stderr == pytest.approx(1 / math.sqrt(3))
    assert est.ci[0] < 2.0 < est.ci[1]


def test_unstable_queue_rejected():
    with pytest.raises(ValueError):
        simulate_mgc_sojourn(3.0, ServiceStats(1.0, 0.5), 2, SimulationConfig(1, 100))
    with pytest.raises(ValueError):
        simulate_mgc_sojourn(0.5, ServiceStats(1.0, 0.5), 0, SimulationConfig(1, 100))


def test_chain_trivial_thresholds():
    chain = scaled_chain()
    sim = SimulationConfig(6, 2e3, replications=2)
    assert simulate_chain_availability(chain, None, sim, thresholds=(math.inf, math.inf)).mean == 1.0
    assert simulate_chain_availability(chain, None, sim, thresholds=(1e-9, 1e-9)).mean == 0.0


def test_two_tier_single_replica_chain_matches_analytic():
    cnf = scaled_cnf()
    chain = ChainSpec((TierSpec("A", cnf, 1, ServiceStats(0.010, 0.6)), TierSpec("B", cnf, 1, ServiceStats(0.008, 0.8))),
                      (0.03, 0.03))
    exact = availability(chain_mugf(chain), chain.thresholds)
    assert 0.5 < exact < 0.99
    est = simulate_chain_availability(chain, (1, 1), SimulationConfig(8, 2e5, replications=10))
    assert abs(est.mean - exact) < 3 * est.stderr


def test_chain_simulation_is_deterministic():
    sim = SimulationConfig(42, 5e3, replications=3)
    a = simulate_chain_availability(scaled_chain(), None, sim)
    b = simulate_chain_availability(scaled_chain(), None, sim)
    assert a == b


@needs_compiled
def test_ctmc_kernels_agree_bitwise():
    exit_rates, cum = jump_tables(build_generator(scaled_cnf()))
    rng = np.random.default_rng(0)
    exps, unifs = rng.standard_exponential(5000), rng.random(5000)
    out = []
    for mod in (_pykernels, _ckernels):
        occ = np.zeros(14)
        res = mod.ctmc_walk(0, 0.0, 2e3, 100.0, exit_rates, cum, exps, unifs, occ)
        out.append((res, occ))
    assert out[0][0] == out[1][0]
    np.testing.assert_array_equal(out[0][1], out[1][1])


@needs_compiled
def test_chain_kernels_agree_bitwise():
    chain = scaled_chain()
    tabs = _chain_tables(chain)
    rng = np.random.default_rng(1)
    exps, unifs = rng.standard_exponential(20000), rng.random((20000, 2))
    w = np.array(chain.thresholds)
    out = []
    for mod in (_pykernels, _ckernels):
        states = np.zeros(tabs.replica_tier.size, dtype=np.int64)
        agg = np.ascontiguousarray(tabs.caps[:, 0, :] * np.array([[1], [2]]))
        counters = np.zeros(2)
        res = mod.chain_walk(states, tabs.replica_tier, 0.0, 1e4, 10.0, tabs.exit_rates, tabs.cum_jump, tabs.caps,
                             agg, tabs.delay_tab, tabs.offsets, w, exps, unifs, counters)
        out.append((res, states, agg, counters))
    assert out[0][0] == out[1][0]
    for x, y in zip(out[0][1:], out[1][1:]):
        np.testing.assert_array_equal(x, y)


@needs_compiled
def test_queue_kernels_agree_bitwise():
    rng = np.random.default_rng(2)
    inter, services = rng.exponential(1.0, 3000), rng.lognormal(-1.0, 0.5, 3000)
    a, b = np.empty(3000), np.empty(3000)
    _pykernels.mgc_sojourn(inter, services, 3, a)
    _ckernels.mgc_sojourn(inter, services, 3, b)
    np.testing.assert_array_equal(a, b)


@needs_compiled
def test_threshold_mass_kernels_agree():
    rng = np.random.default_rng(3)
    pa, pb = rng.dirichlet(np.ones(300)), rng.dirichlet(np.ones(400))
    da, db = rng.uniform(0, 0.05, (300, 2)), rng.uniform(0, 0.05, (400, 2))
    db = db[np.argsort(db[:, 0], kind="stable")]
    w = np.array([0.06, 0.05])
    expected = sum(pa[i] * pb[j] for i in range(300) for j in range(400) if np.all(da[i] + db[j] <= w))
    assert _pykernels.threshold_mass(pa, da, pb, db, w) == pytest.approx(expected, abs=1e-14)
    assert _ckernels.threshold_mass(pa, da, pb, db, w) == pytest.approx(expected, abs=1e-14)
