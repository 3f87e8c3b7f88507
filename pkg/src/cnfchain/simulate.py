"""Brute-force simulation oracles for the analytic pipeline.

Three independent estimators: CNF state occupancy from CTMC trajectories,
M/G/c mean sojourn from a discrete-event queue, and chain availability
from superposed replica trajectories.  Random numbers are drawn in numpy
chunks and handed to the kernels, so the compiled and pure-Python
backends replay identical trajectories for a given seed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import kernels
from .model import CnfSpec, build_generator, capacity_matrix, enumerate_states
from .mugf import ChainSpec
from .queueing import ServiceStats, delay_table

_CHUNK = 65_536


@dataclass(frozen=True)
class SimulationConfig:
    """Seed, run length and replication count.

    ``horizon`` is simulated seconds for the CTMC oracles and a job count
    for the queue oracle; the first ``warmup`` fraction is discarded.
    """

    seed: int
    horizon: float
    warmup: float = 0.1
    replications: int = 10

    def __post_init__(self):
        if not self.horizon > 0:
            raise ValueError("horizon must be > 0")
        if not 0.0 <= self.warmup < 1.0:
            raise ValueError("warmup must lie in [0, 1)")
        if int(self.replications) != self.replications or self.replications < 1:
            raise ValueError("replications must be a positive integer")

    def generators(self) -> list[np.random.Generator]:
        """One independent generator per replication, derived from ``seed``."""
        children = np.random.SeedSequence(self.seed).spawn(self.replications)
        return [np.random.default_rng(s) for s in children]


@dataclass(frozen=True)
class Estimate:
    """Replication mean with standard error and a 95% t interval.

    With a single replication the error and interval are unavailable
    (``nan`` and ``None``).
    """

    mean: float
    stderr: float
    ci: tuple[float, float] | None
    replications: int
    samples: tuple[float, ...] = ()

    def contains(self, value: float) -> bool:
        return self.ci is not None and self.ci[0] <= value <= self.ci[1]


def summarize(samples, level: float = 0.95) -> Estimate:
    x = np.asarray(samples, dtype=float)
    mean = float(x.mean())
    if x.size < 2:
        return Estimate(mean, math.nan, None, int(x.size), tuple(x.tolist()))
    se = float(x.std(ddof=1) / math.sqrt(x.size))
    half = float(stats.t.ppf(0.5 + level / 2, x.size - 1)) * se
    return Estimate(mean, se, (mean - half, mean + half), int(x.size), tuple(x.tolist()))


@dataclass(frozen=True)
class OccupancyEstimate:
    labels: tuple[str, ...]
    mean: np.ndarray
    stderr: np.ndarray
    replications: int


def jump_tables(q: np.ndarray):
    """Exit rates and row-wise cumulative jump probabilities of a generator."""
    q = np.asarray(q, dtype=float)
    exit_rates = -np.diag(q).copy()
    jumps = np.where(np.eye(q.shape[0], dtype=bool), 0.0, q) / exit_rates[:, None]
    cum = np.cumsum(jumps, axis=1)
    cum[:, -1] = 1.0
    return exit_rates, np.ascontiguousarray(cum)


def simulate_cnf_occupancy(cnf: CnfSpec, sim: SimulationConfig, start: int = 0) -> OccupancyEstimate:
    """Time-average occupancy of every CNF state from independent trajectories."""
    space = enumerate_states(cnf)
    exit_rates, cum = jump_tables(build_generator(cnf, space))
    t_keep = sim.warmup * sim.horizon
    runs = []
    for rng in sim.generators():
        occ = np.zeros(len(space))
        state, t = start, 0.0
        while t < sim.horizon:
            exps = rng.standard_exponential(_CHUNK)
            unifs = rng.random(_CHUNK)
            state, t, _ = kernels.ctmc_walk(state, t, sim.horizon, t_keep, exit_rates, cum, exps, unifs, occ)
        runs.append(occ / (sim.horizon - t_keep))
    runs = np.array(runs)
    if sim.replications > 1:
        stderr = runs.std(axis=0, ddof=1) / math.sqrt(sim.replications)
    else:
        stderr = np.full(len(space), math.nan)
    return OccupancyEstimate(tuple(s.label for s in space.states), runs.mean(axis=0), stderr, sim.replications)


def lognormal_params(mean: float, cv: float) -> tuple[float, float]:
    """``(mu, sigma)`` of the lognormal with the given mean and CV."""
    sigma2 = math.log1p(cv * cv)
    return math.log(mean) - sigma2 / 2.0, math.sqrt(sigma2)


def _service_times(rng, svc: ServiceStats, size: int, distribution: str) -> np.ndarray:
    if distribution == "exponential":
        return rng.exponential(svc.mean_service_time, size)
    if distribution != "lognormal":
        raise ValueError(f"unknown service distribution {distribution!r}")
    if svc.cv_service == 0:
        return np.full(size, svc.mean_service_time)
    mu, sigma = lognormal_params(svc.mean_service_time, svc.cv_service)
    return rng.lognormal(mu, sigma, size)


def simulate_mgc_sojourn(alpha: float, svc: ServiceStats, c: int, sim: SimulationConfig,
                         distribution: str = "lognormal") -> Estimate:
    """Mean sojourn of an M/G/c FCFS queue over ``sim.horizon`` jobs.

    ``distribution`` selects lognormal service matched to (mean, CV), or
    exponential service with the same mean.
    """
    if c < 1:
        raise ValueError("need at least one server")
    if alpha * svc.mean_service_time >= c:
        raise ValueError("utilization must be < 1")
    jobs = int(sim.horizon)
    skip = int(sim.warmup * jobs)
    if jobs - skip < 1:
        raise ValueError("horizon leaves no jobs after warmup")
    means = []
    for rng in sim.generators():
        inter = rng.exponential(1.0 / alpha, jobs)
        services = _service_times(rng, svc, jobs, distribution)
        sojourn = np.empty(jobs)
        kernels.mgc_sojourn(inter, services, int(c), sojourn)
        means.append(float(sojourn[skip:].mean()))
    return summarize(means)


@dataclass(frozen=True)
class _ChainTables:
    exit_rates: np.ndarray
    cum_jump: np.ndarray
    caps: np.ndarray
    delay_tab: np.ndarray
    offsets: np.ndarray
    replica_tier: np.ndarray


def _chain_tables(chain: ChainSpec) -> _ChainTables:
    spaces = [enumerate_states(t.cnf) for t in chain.tiers]
    n_max = max(len(s) for s in spaces)
    m_tiers, k = len(chain.tiers), chain.tenant_count
    exit_rates = np.ones((m_tiers, n_max))
    cum_jump = np.ones((m_tiers, n_max, n_max))
    caps = np.zeros((m_tiers, n_max, k), dtype=np.int64)
    offsets = np.zeros((m_tiers, k), dtype=np.int64)
    tables = []
    pos = 0
    for m, (tier, space) in enumerate(zip(chain.tiers, spaces)):
        size = len(space)
        rates, cum = jump_tables(build_generator(tier.cnf, space))
        exit_rates[m, :size] = rates
        cum_jump[m, :size, :size] = cum
        caps[m, :size] = capacity_matrix(space, tier.cnf.gamma)
        for i, tenant in enumerate(tier.cnf.tenants):
            tab = delay_table(tenant.arrival_rate, tier.service, tier.cnf.gamma * tenant.n * tier.replicas,
                              tenant.cv_arrivals)
            offsets[m, i] = pos
            pos += tab.size
            tables.append(tab)
    replica_tier = np.repeat(np.arange(m_tiers, dtype=np.int64), [t.replicas for t in chain.tiers])
    return _ChainTables(exit_rates, cum_jump, caps, np.concatenate(tables), offsets, replica_tier)


def simulate_chain_availability(chain: ChainSpec, cfg, sim: SimulationConfig, thresholds=None) -> Estimate:
    """Fraction of time every tenant's chain delay meets its threshold.

    All replica CTMCs run on one clock starting fully working.  Delays come
    from the same queueing formulas as the analytic path, looked up by
    aggregate tier capacity.  ``cfg=None`` keeps the chain's replicas.
    """
    if cfg is not None:
        chain = chain.with_configuration(cfg)
    w = np.ascontiguousarray(chain.thresholds if thresholds is None else thresholds, dtype=float)
    if w.shape != (chain.tenant_count,):
        raise ValueError(f"expected {chain.tenant_count} thresholds")
    tabs = _chain_tables(chain)
    t_keep = sim.warmup * sim.horizon
    fractions = []
    for rng in sim.generators():
        states = np.zeros(tabs.replica_tier.size, dtype=np.int64)
        agg = np.ascontiguousarray(tabs.caps[:, 0, :] * np.array([t.replicas for t in chain.tiers])[:, None])
        counters = np.zeros(2)
        t = 0.0
        while t < sim.horizon:
            exps = rng.standard_exponential(_CHUNK)
            unifs = rng.random((_CHUNK, 2))
            t, _ = kernels.chain_walk(states, tabs.replica_tier, t, sim.horizon, t_keep, tabs.exit_rates,
                                      tabs.cum_jump, tabs.caps, agg, tabs.delay_tab, tabs.offsets, w,
                                      exps, unifs, counters)
        fractions.append(counters[0] / counters[1])
    return summarize(fractions)
