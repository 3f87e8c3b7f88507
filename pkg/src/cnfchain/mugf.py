"""Multidimensional universal generating functions over per-tenant delays.

A :class:`Mugf` is a polynomial ``sum_j p_j * prod_i z_i ** d_ij``; it is
stored as a probability vector and a ``(terms, K)`` delay matrix whose
entries are seconds or ``inf`` (unavailable).  Replicas inside a tier are
pooled through their aggregate capacity; tiers in series multiply, which
adds delay vectors and multiplies probabilities.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, replace

import numpy as np

from . import kernels
from .model import (CnfSpec, ModelError, build_generator, capacity_matrix, enumerate_states,
                    solve_steady_state)
from .queueing import ServiceStats, delay_table

MERGE_RTOL = 1e-9
MERGE_ATOL = 1e-12
MAX_TERMS = 20_000_000


class MugfTooLargeError(ModelError):
    pass


@dataclass(frozen=True)
class TierSpec:
    name: str
    cnf: CnfSpec
    replicas: int
    service: ServiceStats

    def __post_init__(self):
        if int(self.replicas) != self.replicas or self.replicas < 1:
            raise ValueError(f"tier {self.name}: replicas must be >= 1")

    def with_replicas(self, replicas: int) -> TierSpec:
        return replace(self, replicas=replicas)


@dataclass(frozen=True)
class ChainSpec:
    tiers: tuple[TierSpec, ...]
    thresholds: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "tiers", tuple(self.tiers))
        object.__setattr__(self, "thresholds", tuple(float(w) for w in self.thresholds))
        if not self.tiers:
            raise ValueError("a chain needs at least one tier")
        workload = _workload(self.tiers[0].cnf)
        for tier in self.tiers[1:]:
            if _workload(tier.cnf) != workload:
                raise ValueError(f"tier {tier.name} does not share the tenant workload of tier {self.tiers[0].name}")
        if len(self.thresholds) != len(workload):
            raise ValueError(f"expected {len(workload)} thresholds, got {len(self.thresholds)}")
        if any(not w > 0 for w in self.thresholds):
            raise ValueError("thresholds must be positive")

    @property
    def tenant_count(self) -> int:
        return self.tiers[0].cnf.tenant_count

    @property
    def configuration(self) -> tuple[int, ...]:
        return tuple(t.replicas for t in self.tiers)

    def with_configuration(self, cfg) -> ChainSpec:
        if len(cfg) != len(self.tiers):
            raise ValueError(f"configuration {tuple(cfg)} does not match {len(self.tiers)} tiers")
        return replace(self, tiers=tuple(t.with_replicas(L) for t, L in zip(self.tiers, cfg)))


def _workload(cnf: CnfSpec):
    return tuple((t.arrival_rate, t.cv_arrivals) for t in cnf.tenants)


def _snap_column(col: np.ndarray) -> np.ndarray:
    """Replace near-equal finite values by their cluster's smallest member."""
    finite = np.isfinite(col)
    values = col[finite]
    if values.size < 2:
        return col
    uniq = np.unique(values)
    if uniq.size < 2:
        return col
    tol = np.maximum(MERGE_ATOL, MERGE_RTOL * np.abs(uniq[1:]))
    brk = np.diff(uniq) > tol
    if brk.all():
        return col
    starts = np.concatenate(([0], np.flatnonzero(brk) + 1))
    rep = uniq[starts][np.concatenate(([0], np.cumsum(brk)))]
    out = col.copy()
    out[finite] = rep[np.searchsorted(uniq, values)]
    return out


def merge_terms(probs: np.ndarray, delays: np.ndarray):
    """Sum probabilities of terms with equal delay vectors.

    Delays within relative 1e-9 (absolute 1e-12) of each other count as
    equal, column by column; ``inf`` equals ``inf``.  Output is sorted
    lexicographically by delay vector.
    """
    if probs.size <= 1:
        return probs.copy(), delays.copy()
    snapped = np.column_stack([_snap_column(delays[:, j]) for j in range(delays.shape[1])])
    order = np.lexsort(snapped.T[::-1])
    snapped = snapped[order]
    # inf != inf is False, so unavailable entries group together
    new_group = np.any(snapped[1:] != snapped[:-1], axis=1)
    starts = np.concatenate(([0], np.flatnonzero(new_group) + 1))
    return np.add.reduceat(probs[order], starts), snapped[starts]


class Mugf:
    """Polynomial of ``(probability, delay vector)`` terms.

    ``dropped`` is the probability mass removed by pruning; unpruned
    polynomials have ``dropped == 0`` and coefficients summing to one.
    """

    __slots__ = ("probs", "delays", "dropped")

    def __init__(self, probs, delays, dropped: float = 0.0, merge: bool = True):
        probs = np.asarray(probs, dtype=float).reshape(-1)
        delays = np.asarray(delays, dtype=float)
        if delays.ndim != 2 or delays.shape[0] != probs.shape[0]:
            raise ValueError("delays must be a (terms, tenants) array aligned with probs")
        if merge:
            probs, delays = merge_terms(probs, delays)
        self.probs = probs
        self.delays = delays
        self.dropped = float(dropped)
        self.probs.flags.writeable = False
        self.delays.flags.writeable = False

    @classmethod
    def from_terms(cls, terms, tenant_count: int | None = None) -> Mugf:
        terms = list(terms)
        if not terms and tenant_count is None:
            raise ValueError("tenant_count required for an empty polynomial")
        k = tenant_count if tenant_count is not None else len(terms[0][1])
        probs = np.array([p for p, _ in terms], dtype=float)
        delays = np.array([list(d) for _, d in terms], dtype=float).reshape(len(terms), k)
        return cls(probs, delays)

    @property
    def tenant_count(self) -> int:
        return self.delays.shape[1]

    def __len__(self):
        return self.probs.shape[0]

    def total(self) -> float:
        return float(self.probs.sum())

    def terms(self) -> list[tuple[float, tuple[float, ...]]]:
        return [(float(p), tuple(float(x) for x in d)) for p, d in zip(self.probs, self.delays)]

    def compose(self, other: Mugf, prune: float | None = None, merge: bool = True) -> Mugf:
        """Series composition: multiply coefficients, add delay vectors.

        With ``merge=False`` every pair of terms stays a separate term, so
        the result is resolved by underlying joint state rather than by
        delay value.
        """
        if other.tenant_count != self.tenant_count:
            raise ValueError("tenant counts differ")
        size = len(self) * len(other)
        if size > MAX_TERMS:
            raise MugfTooLargeError(
                f"product would hold {size} terms before merging; enable pruning to bound it")
        probs = np.multiply.outer(self.probs, other.probs).reshape(-1)
        delays = (self.delays[:, None, :] + other.delays[None, :, :]).reshape(-1, self.tenant_count)
        dropped = self.dropped + other.dropped - self.dropped * other.dropped
        result = Mugf(probs, delays, dropped, merge=merge)
        if prune:
            result = result.pruned(prune)
        return result

    __mul__ = compose

    def pruned(self, floor: float) -> Mugf:
        """Drop terms with probability below ``floor``, tracking the mass."""
        keep = self.probs >= floor
        if keep.all():
            return self
        lost = float(self.probs[~keep].sum())
        return Mugf(self.probs[keep], self.delays[keep], self.dropped + lost, merge=False)

    def within(self, thresholds) -> Mugf:
        """Only the terms meeting every threshold (a sub-probability)."""
        w = np.asarray(thresholds, dtype=float)
        keep = np.all(self.delays <= w, axis=1)
        return Mugf(self.probs[keep], self.delays[keep], self.dropped, merge=False)

    def sorted_terms(self):
        """Terms by descending coefficient, ties broken by delay vector."""
        order = np.lexsort(tuple(self.delays.T[::-1]) + (-self.probs,))
        return [(float(self.probs[j]), tuple(float(x) for x in self.delays[j])) for j in order]

    def leading_term(self):
        j = int(np.argmax(self.probs))
        return float(self.probs[j]), tuple(float(x) for x in self.delays[j])

    def __repr__(self):
        return f"Mugf(terms={len(self)}, tenants={self.tenant_count}, total={self.total():.12g})"


def format_delay(value: float) -> str:
    return "inf" if math.isinf(value) else f"{value:.6g}"


def mugf_report(mugf: Mugf, top: int | None = None) -> list[dict]:
    """Rows ``{"coefficient", "delays"}`` by descending coefficient.

    Unavailable delays are rendered as the string ``"inf"``.
    """
    rows = mugf.sorted_terms()
    if top is not None:
        rows = rows[:top]
    return [{"coefficient": p, "delays": ["inf" if math.isinf(d) else d for d in dv]} for p, dv in rows]


def availability(mugf: Mugf, thresholds) -> float:
    """Total coefficient of terms whose delays all meet their thresholds."""
    w = np.asarray(thresholds, dtype=float)
    if w.shape != (mugf.tenant_count,):
        raise ValueError(f"expected {mugf.tenant_count} thresholds")
    ok = np.all(mugf.delays <= w, axis=1)
    return float(min(1.0, max(0.0, mugf.probs[ok].sum())))


def availability_bounds(mugf: Mugf, thresholds) -> tuple[float, float]:
    """``(lower, upper)``: pruned mass counted unavailable, then available."""
    lower = availability(mugf, thresholds)
    return lower, min(1.0, lower + mugf.dropped)


@functools.lru_cache(maxsize=256)
def cnf_steady_state(cnf: CnfSpec):
    space = enumerate_states(cnf)
    return space, solve_steady_state(build_generator(cnf, space))


@functools.lru_cache(maxsize=256)
def cnf_capacity_distribution(cnf: CnfSpec):
    """Stationary distribution of one CNF's capacity vector.

    Returns ``(probs, caps)`` with ``caps`` an integer ``(classes, K)``
    array; DLF, ILF and the all-failed software state share the zero row.
    """
    space, p = cnf_steady_state(cnf)
    return _group_capacities(p, capacity_matrix(space, cnf.gamma))


def _group_capacities(probs, caps):
    uniq, inverse = np.unique(caps, axis=0, return_inverse=True)
    grouped = np.bincount(inverse.reshape(-1), weights=probs, minlength=uniq.shape[0])
    grouped.flags.writeable = False
    uniq.flags.writeable = False
    return grouped, uniq


@functools.lru_cache(maxsize=512)
def _tier_capacity(cnf: CnfSpec, replicas: int):
    probs, caps = cnf_capacity_distribution(cnf)
    if replicas == 1:
        return probs, caps
    acc_p, acc_c = _tier_capacity(cnf, replicas - 1)
    outer_p = np.multiply.outer(acc_p, probs).reshape(-1)
    outer_c = (acc_c[:, None, :] + caps[None, :, :]).reshape(-1, caps.shape[1])
    return _group_capacities(outer_p, outer_c)


def tier_capacity_distribution(tier: TierSpec):
    """Distribution of the tier's aggregate capacity over its replicas.

    Replicas are independent and identical, so this is the ``L``-fold
    convolution of the single-CNF capacity distribution.
    """
    return _tier_capacity(tier.cnf, tier.replicas)


def tier_delay_tables(tier: TierSpec) -> list[np.ndarray]:
    """Per tenant, the tier delay for every aggregate server count."""
    return [delay_table(t.arrival_rate, tier.service, tier.cnf.gamma * t.n * tier.replicas, t.cv_arrivals)
            for t in tier.cnf.tenants]


@functools.lru_cache(maxsize=512)
def tier_mugf(tier: TierSpec, merge: bool = True) -> Mugf:
    """MUGF of the tier's per-tenant mean delays.

    ``merge=False`` keeps one term per aggregate capacity vector even when
    two capacities yield the same delays.
    """
    probs, caps = tier_capacity_distribution(tier)
    tables = tier_delay_tables(tier)
    delays = np.column_stack([tables[i][caps[:, i]] for i in range(len(tables))])
    return Mugf(probs, delays, merge=merge)


def full_working_delays(tier: TierSpec) -> tuple[float, ...]:
    tables = tier_delay_tables(tier)
    return tuple(float(tab[-1]) for tab in tables)


def chain_mugf(chain: ChainSpec, prune: float | None = None, merge: bool = True) -> Mugf:
    """Product of the tier MUGFs, evaluated left to right.

    ``merge=False`` gives the state-resolved polynomial: one term per
    combination of tier capacity classes, with no delay-based merging.
    """
    return compose_all([tier_mugf(t, merge) for t in chain.tiers], prune, merge)


def compose_all(mugfs, prune: float | None = None, merge: bool = True) -> Mugf:
    return functools.reduce(lambda a, b: a.compose(b, prune, merge), mugfs)


def joint_state_count(chain: ChainSpec) -> int:
    """Unmerged joint state count, ``prod_m N_m ** L_m``."""
    total = 1
    for tier in chain.tiers:
        total *= (math.prod(n + 1 for n in tier.cnf.n) + 2) ** tier.replicas
    return total


def chain_availability(mugfs, thresholds) -> float:
    """Availability of the product of ``mugfs`` without expanding it.

    Terms already over a threshold can only get worse when more delay is
    added, so each half of the chain is composed keeping only in-threshold
    terms; the two halves are then paired by ``kernels.threshold_mass``.
    """
    mugfs = list(mugfs)
    w = np.asarray(thresholds, dtype=float)
    if len(mugfs) == 1:
        return availability(mugfs[0], w)
    half = len(mugfs) // 2
    left = _bounded_product(mugfs[:half], w)
    right = _bounded_product(mugfs[half:], w)
    if len(left) == 0 or len(right) == 0:
        return 0.0
    order = np.argsort(right.delays[:, 0], kind="stable")
    mass = kernels.threshold_mass(
        np.ascontiguousarray(left.probs), np.ascontiguousarray(left.delays),
        np.ascontiguousarray(right.probs[order]), np.ascontiguousarray(right.delays[order]),
        np.ascontiguousarray(w))
    return float(min(1.0, max(0.0, mass)))


def _bounded_product(mugfs, w) -> Mugf:
    acc = mugfs[0].within(w)
    for m in mugfs[1:]:
        acc = acc.compose(m.within(w)).within(w)
    return acc
