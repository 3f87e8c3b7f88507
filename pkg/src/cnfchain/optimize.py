"""Minimum-cost redundancy configurations under an availability target."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from .model import ModelError
from .mugf import ChainSpec, chain_availability, tier_mugf


class EmptyFeasibleSetError(ModelError):
    """No configuration in the search box reaches the availability target."""

    def __init__(self, ledger: OptimizationLedger):
        best = ledger.best
        super().__init__(
            f"no configuration with at most {ledger.max_replicas} replicas per tier reaches "
            f"availability {ledger.target}; best is {best.configuration} at {best.availability:.9f}")
        self.ledger = ledger


@dataclass(frozen=True)
class CostModel:
    per_cnf_cost: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "per_cnf_cost", tuple(float(c) for c in self.per_cnf_cost))
        if any(c < 0 for c in self.per_cnf_cost):
            raise ValueError("costs must be non-negative")

    @classmethod
    def uniform(cls, tiers: int, cost: float = 1.0) -> CostModel:
        return cls((cost,) * tiers)


def configuration_cost(cfg, costs: CostModel) -> float:
    if len(cfg) != len(costs.per_cnf_cost):
        raise ValueError("configuration and cost model have different tier counts")
    return float(sum(L * c for L, c in zip(cfg, costs.per_cnf_cost)))


def evaluate_configuration(chain: ChainSpec, cfg, thresholds=None) -> float:
    """Steady-state availability of ``chain`` with replica counts ``cfg``."""
    if thresholds is None:
        thresholds = chain.thresholds
    instance = chain.with_configuration(cfg)
    return chain_availability([tier_mugf(t) for t in instance.tiers], thresholds)


@dataclass(frozen=True)
class LedgerEntry:
    configuration: tuple[int, ...]
    cost: float
    availability: float

    def feasible(self, target: float) -> bool:
        return self.availability >= target


@dataclass
class OptimizationLedger:
    entries: list[LedgerEntry]
    target: float
    max_replicas: int
    optima: list[LedgerEntry] = field(default_factory=list)

    @property
    def feasible(self) -> list[LedgerEntry]:
        return [e for e in self.entries if e.feasible(self.target)]

    @property
    def best(self) -> LedgerEntry:
        """Highest availability, cheapest among equals."""
        return min(self.entries, key=lambda e: (-e.availability, e.cost, e.configuration))

    @property
    def optimal_cost(self) -> float | None:
        return self.optima[0].cost if self.optima else None


def _sort_key(entry: LedgerEntry):
    return entry.cost, -entry.availability, entry.configuration


def optimize(chain: ChainSpec, thresholds=None, target: float = 0.99999, max_replicas: int = 4,
             costs: CostModel | None = None, raise_on_empty: bool = True) -> OptimizationLedger:
    """Evaluate every configuration in ``{1..max_replicas}^M``.

    Returns the ledger sorted by ``(cost, -availability)`` with all
    cost-minimal feasible configurations as ``optima`` (lexicographic).
    Tier MUGFs are computed once per ``(tier, replicas)`` pair.
    """
    if max_replicas < 1:
        raise ValueError("max_replicas must be >= 1")
    if not 0.0 <= target <= 1.0:
        raise ValueError("target must lie in [0, 1]")
    if thresholds is None:
        thresholds = chain.thresholds
    if costs is None:
        costs = CostModel.uniform(len(chain.tiers))
    per_tier = [[tier_mugf(t.with_replicas(L)) for L in range(1, max_replicas + 1)] for t in chain.tiers]
    entries = []
    for cfg in itertools.product(range(1, max_replicas + 1), repeat=len(chain.tiers)):
        avail = chain_availability([per_tier[m][L - 1] for m, L in enumerate(cfg)], thresholds)
        entries.append(LedgerEntry(cfg, configuration_cost(cfg, costs), avail))
    entries.sort(key=_sort_key)
    ledger = OptimizationLedger(entries, target, max_replicas)
    feasible = ledger.feasible
    if feasible:
        cheapest = min(e.cost for e in feasible)
        ledger.optima = sorted((e for e in feasible if math.isclose(e.cost, cheapest, rel_tol=1e-12, abs_tol=1e-12)), key=lambda e: e.configuration)
    elif raise_on_empty:
        raise EmptyFeasibleSetError(ledger)
    return ledger
