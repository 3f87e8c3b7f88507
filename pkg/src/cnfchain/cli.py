"""Command-line entry point: ``cnfchain analyze|optimize|simulate``.

Exit codes: 0 success, 2 configuration error, 3 model error, 4 no
configuration reaches the availability target.
"""
from __future__ import annotations

import argparse
import json
import math
import sys

from . import kernels
from .config import ConfigError, build_chain, cost_model, dump_normalized, load_config, with_overrides
from .model import ModelError
from .mugf import (availability_bounds, chain_mugf, format_delay, full_working_delays, joint_state_count,
                   mugf_report, tier_capacity_distribution)
from .optimize import EmptyFeasibleSetError, configuration_cost, optimize
from .simulate import SimulationConfig, simulate_chain_availability

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_MODEL = 3
EXIT_INFEASIBLE = 4


def _fully_working_probability(chain) -> float:
    """Probability that every CNF of the chain is fully working."""
    total = 1.0
    for tier in chain.tiers:
        probs, _ = tier_capacity_distribution(tier)
        # capacity classes are sorted, so the fully-working one comes last
        total *= float(probs[-1])
    return total


def _cfg_label(chain) -> str:
    return " ".join(f"{t.name}={t.replicas}" for t in chain.tiers)


def _jsonable(value):
    if isinstance(value, float) and math.isinf(value):
        return "inf"
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    return value


def _emit(fmt: str, payload: dict, table_lines: list[str], out) -> None:
    if fmt == "structured":
        out.write(json.dumps(_jsonable(payload), indent=2) + "\n")
    else:
        out.write("\n".join(table_lines) + "\n")


def cmd_analyze(cfg, args, out) -> int:
    chain = build_chain(cfg)
    prune = cfg.analysis.prune_threshold
    mugf = chain_mugf(chain, prune=prune)
    lower, upper = availability_bounds(mugf, chain.thresholds)
    target = cfg.optimization.availability_target
    cost = configuration_cost(chain.configuration, cost_model(cfg))
    top = mugf_report(mugf, args.top_terms)
    delays = {t.name: list(full_working_delays(t)) for t in chain.tiers}
    payload = {
        "configuration": dict(zip([t.name for t in chain.tiers], chain.configuration)),
        "cost_cnfs": cost,
        "thresholds_s": list(chain.thresholds),
        "availability": lower,
        "availability_upper": upper,
        "pruned_mass": mugf.dropped,
        "availability_target": target,
        "meets_target": lower >= target,
        "fully_working_probability": _fully_working_probability(chain),
        "joint_state_count": joint_state_count(chain),
        "mugf_terms": len(mugf),
        "tier_fully_working_delays_s": delays,
        "top_terms": top,
        "delay_unit": "s",
        "backend": kernels.BACKEND,
    }
    lines = [
        f"configuration            {_cfg_label(chain)}",
        f"cost                     {cost:g} CNFs",
        "thresholds               " + ", ".join(f"tenant {i + 1} {w:g} s" for i, w in enumerate(chain.thresholds)),
        f"availability             {lower:.6f}  ({lower:.12f})",
        f"target                   {target:.6f}  {'met' if lower >= target else 'NOT met'}",
    ]
    if prune:
        lines.append(f"availability bounds      [{lower:.12f}, {upper:.12f}]  pruned mass {mugf.dropped:.3e}"
                     f" (prune floor {prune:g})")
    lines += [
        f"all CNFs fully working   {payload['fully_working_probability']:.6f}",
        f"joint states (unmerged)  {payload['joint_state_count']}",
        f"MUGF terms (merged)      {len(mugf)}",
        "",
        "fully-working tier delays [s]",
    ]
    for name, ds in delays.items():
        lines.append(f"  {name:<8} " + "  ".join(format_delay(d) for d in ds))
    lines += ["", f"top {len(top)} MUGF terms (coefficient, delays [s])"]
    for row in top:
        lines.append(f"  {row['coefficient']:.6e}  (" + ", ".join(
            d if isinstance(d, str) else f"{d:.6g}" for d in row["delays"]) + ")")
    _emit(args.format, payload, lines, out)
    return EXIT_OK


def _entry_dict(names, entry) -> dict:
    return {"configuration": dict(zip(names, entry.configuration)), "cost_cnfs": entry.cost,
            "availability": entry.availability}


def _entry_line(entry) -> str:
    cfg = "(" + ",".join(map(str, entry.configuration)) + ")"
    return f"  {cfg:<16} {entry.cost:>8g}  {entry.availability:.9f}"


def cmd_optimize(cfg, args, out) -> int:
    chain = build_chain(cfg)
    opt = cfg.optimization
    names = [t.name for t in chain.tiers]
    status = EXIT_OK
    try:
        ledger = optimize(chain, target=opt.availability_target, max_replicas=opt.max_replicas,
                          costs=cost_model(cfg))
    except EmptyFeasibleSetError as exc:
        ledger = exc.ledger
        status = EXIT_INFEASIBLE
    shown = ledger.entries if args.all else ledger.entries[:args.top_terms]
    payload = {
        "tiers": names,
        "availability_target": opt.availability_target,
        "max_replicas": opt.max_replicas,
        "feasible": status == EXIT_OK,
        "optimal_cost_cnfs": ledger.optimal_cost,
        "optima": [_entry_dict(names, e) for e in ledger.optima],
        "best": _entry_dict(names, ledger.best),
        "evaluated": len(ledger.entries),
        "ledger": [_entry_dict(names, e) for e in shown],
    }
    header = f"  {'(' + ','.join(names) + ')':<16} {'cost':>8}  availability"
    lines = [f"target availability {opt.availability_target}, at most {opt.max_replicas} replicas per tier,"
             f" {len(ledger.entries)} configurations evaluated"]
    if status == EXIT_OK:
        lines += [f"minimum cost {ledger.optimal_cost:g} CNFs, {len(ledger.optima)} optimal configuration(s)",
                  header]
        lines += [_entry_line(e) for e in ledger.optima]
    else:
        lines += ["no configuration reaches the target; best achieved:", header, _entry_line(ledger.best)]
    lines += ["", "ledger sorted by (cost, -availability)" + ("" if args.all else f", first {len(shown)}"),
              header]
    lines += [_entry_line(e) for e in shown]
    _emit(args.format, payload, lines, out)
    return status


def cmd_simulate(cfg, args, out) -> int:
    chain = build_chain(cfg)
    mugf = chain_mugf(chain, prune=cfg.analysis.prune_threshold)
    analytic, _ = availability_bounds(mugf, chain.thresholds)
    try:
        sim = SimulationConfig(args.seed, args.horizon, replications=args.replications)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    est = simulate_chain_availability(chain, None, sim)
    if est.ci is None:
        verdict = "CI unavailable (1 replication), point estimate only"
    elif est.contains(analytic):
        verdict = "ANALYTIC within 95% CI"
    else:
        verdict = "ANALYTIC outside 95% CI"
    payload = {
        "configuration": dict(zip([t.name for t in chain.tiers], chain.configuration)),
        "seed": args.seed,
        "horizon_s": args.horizon,
        "replications": args.replications,
        "analytic_availability": analytic,
        "simulated_availability": est.mean,
        "stderr": None if math.isnan(est.stderr) else est.stderr,
        "ci95": None if est.ci is None else list(est.ci),
        "verdict": verdict,
    }
    ci = "unavailable" if est.ci is None else f"[{est.ci[0]:.9f}, {est.ci[1]:.9f}]"
    lines = [
        f"configuration            {_cfg_label(chain)}",
        f"horizon                  {args.horizon:g} s x {args.replications} replications, seed {args.seed}",
        f"analytic availability    {analytic:.9f}",
        f"simulated availability   {est.mean:.9f}",
        f"95% CI                   {ci}",
        f"verdict                  {verdict}",
    ]
    _emit(args.format, payload, lines, out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, metavar="PATH", help="YAML chain configuration")
    common.add_argument("--format", choices=("table", "structured"), default="table",
                        help="human-readable table or JSON")
    common.add_argument("--top-terms", type=int, default=20, metavar="N",
                        help="MUGF terms (analyze) or ledger rows (optimize) to print")
    common.add_argument("--prune", type=float, default=None, metavar="P",
                        help="drop MUGF terms with coefficient below P, reporting bounds")
    common.add_argument("--dump-normalized", action="store_true",
                        help="print the configuration with per-second units and exit")
    parser = argparse.ArgumentParser(prog="cnfchain", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("analyze", parents=[common], help="availability and MUGF of the configured chain")
    p_opt = sub.add_parser("optimize", parents=[common], help="minimum-cost replica configuration")
    p_opt.add_argument("--all", action="store_true", help="print every ledger entry")
    p_sim = sub.add_parser("simulate", parents=[common], help="compare with trajectory simulation")
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--horizon", type=float, default=1e5, help="simulated seconds per replication")
    p_sim.add_argument("--replications", type=int, default=10)
    return parser


_COMMANDS = {"analyze": cmd_analyze, "optimize": cmd_optimize, "simulate": cmd_simulate}


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    if args.top_terms < 0:
        print("error: --top-terms must be >= 0", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = with_overrides(load_config(args.config), args.prune)
        if args.dump_normalized:
            out.write(dump_normalized(cfg))
            return EXIT_OK
        return _COMMANDS[args.command](cfg, args, out)
    except ConfigError as exc:
        print(f"configuration error:\n{exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ModelError as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return EXIT_MODEL
