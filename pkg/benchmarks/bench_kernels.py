"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat N]

Both backends receive the same pre-drawn random inputs, so besides timing
each pair is checked for identical output.
"""
import argparse
import time

import numpy as np

from cnfchain import _pykernels
from cnfchain.model import CnfSpec, TenantSpec, build_generator
from cnfchain.mugf import ChainSpec, TierSpec, tier_mugf
from cnfchain.queueing import ServiceStats
from cnfchain.simulate import _chain_tables, jump_tables

try:
    from cnfchain import _ckernels
except ImportError:
    _ckernels = None


def _cnf():
    tenants = (TenantSpec(1, 2, 0.1, 1.0, 100.0), TenantSpec(2, 3, 0.1, 1.0, 200.0))
    return CnfSpec(tenants, 0.01, 1.0, 0.01, 1.0, 2)


def _chain():
    cnf = _cnf()
    return ChainSpec((TierSpec("A", cnf, 2, ServiceStats(0.010, 0.6)),
                      TierSpec("B", cnf, 3, ServiceStats(0.012, 0.8))), (0.03, 0.03))


def case_ctmc(rng, n=200_000):
    exit_rates, cum = jump_tables(build_generator(_cnf()))
    exps, unifs = rng.standard_exponential(n), rng.random(n)

    def run(mod):
        occ = np.zeros(exit_rates.size)
        mod.ctmc_walk(0, 0.0, np.inf, 0.0, exit_rates, cum, exps, unifs, occ)
        return occ
    return run


def case_chain(rng, n=100_000):
    chain = _chain()
    tabs = _chain_tables(chain)
    exps, unifs = rng.standard_exponential(n), rng.random((n, 2))
    w = np.array(chain.thresholds)
    reps = np.array([t.replicas for t in chain.tiers])[:, None]

    def run(mod):
        states = np.zeros(tabs.replica_tier.size, dtype=np.int64)
        agg = np.ascontiguousarray(tabs.caps[:, 0, :] * reps)
        counters = np.zeros(2)
        mod.chain_walk(states, tabs.replica_tier, 0.0, np.inf, 0.0, tabs.exit_rates, tabs.cum_jump, tabs.caps,
                       agg, tabs.delay_tab, tabs.offsets, w, exps, unifs, counters)
        return counters
    return run


def case_queue(rng, n=200_000):
    inter, services = rng.exponential(1.0, n), rng.lognormal(-1.0, 0.5, n)

    def run(mod):
        out = np.empty(n)
        mod.mgc_sojourn(inter, services, 4, out)
        return out
    return run


def case_threshold(rng):
    chain = _chain()
    a = tier_mugf(chain.tiers[0].with_replicas(4))
    b = tier_mugf(chain.tiers[1].with_replicas(4))
    order = np.argsort(b.delays[:, 0], kind="stable")
    pb, db = np.ascontiguousarray(b.probs[order]), np.ascontiguousarray(b.delays[order])
    w = np.array(chain.thresholds)

    def run(mod):
        return np.array([mod.threshold_mass(a.probs, a.delays, pb, db, w)])
    return run


CASES = {"ctmc_walk": case_ctmc, "chain_walk": case_chain, "mgc_sojourn": case_queue,
         "threshold_mass": case_threshold}


def best_of(fn, mod, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn(mod)
        times.append(time.perf_counter() - start)
    return min(times), out


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    if _ckernels is None:
        print("compiled extension not built; timing the Python fallback only")
    print(f"{'kernel':<16}{'python [s]':>12}{'cython [s]':>12}{'speedup':>10}  identical")
    for name, make in CASES.items():
        fn = make(np.random.default_rng(0))
        t_py, out_py = best_of(fn, _pykernels, args.repeat)
        if _ckernels is None:
            print(f"{name:<16}{t_py:>12.4f}{'-':>12}{'-':>10}  -")
            continue
        t_c, out_c = best_of(fn, _ckernels, args.repeat)
        same = np.array_equal(out_py, out_c) if name != "threshold_mass" else np.allclose(out_py, out_c, atol=1e-14)
        print(f"{name:<16}{t_py:>12.4f}{t_c:>12.4f}{t_py / t_c:>9.1f}x  {same}")


if __name__ == "__main__":
    main()
