"""YAML chain configuration: strict schema, unit normalization, dumping.

Every rate is written as ``{value, unit}``.  ``per_second`` and
``per_hour`` give the rate directly; ``seconds``, ``minutes`` and
``hours`` give the mean time between events, whose reciprocal is the rate.
Durations (service times, thresholds) accept ``seconds``,
``milliseconds``, ``minutes`` and ``hours``.  Everything is normalized to
seconds and per-second rates on load.
"""
from __future__ import annotations

import math
from pathlib import Path
from typing import Literal, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .model import CnfSpec, ModelError, TenantSpec
from .mugf import ChainSpec, TierSpec
from .optimize import CostModel
from .queueing import ServiceStats

_RATE_SCALE = {"per_second": 1.0, "per_hour": 1.0 / 3600.0}
_MEAN_TIME_SCALE = {"seconds": 1.0, "minutes": 60.0, "hours": 3600.0}
_DURATION_SCALE = {"seconds": 1.0, "milliseconds": 1e-3, "minutes": 60.0, "hours": 3600.0}


class ConfigError(Exception):
    """Unreadable or schema-invalid configuration."""


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class Rate(_Strict):
    value: float = Field(gt=0, allow_inf_nan=False)
    unit: Literal["per_second", "per_hour", "seconds", "minutes", "hours"]

    def per_second(self) -> float:
        if self.unit in _RATE_SCALE:
            return self.value * _RATE_SCALE[self.unit]
        return 1.0 / (self.value * _MEAN_TIME_SCALE[self.unit])


class Duration(_Strict):
    value: float = Field(gt=0, allow_inf_nan=False)
    unit: Literal["seconds", "milliseconds", "minutes", "hours"]

    def seconds(self) -> float:
        return self.value * _DURATION_SCALE[self.unit]


class TenantConfig(_Strict):
    id: Union[int, str]
    n: Union[int, dict[str, int]]
    lambda_c: Rate
    mu_c: Rate
    arrival_rate: Rate
    cv_arrivals: float = Field(default=1.0, ge=0, allow_inf_nan=False)

    @model_validator(mode="after")
    def _positive_n(self):
        counts = self.n.values() if isinstance(self.n, dict) else [self.n]
        if any(c < 1 for c in counts):
            raise ValueError("n must be >= 1")
        return self

    def n_for(self, tier: str) -> int:
        return self.n[tier] if isinstance(self.n, dict) else self.n


class LayersConfig(_Strict):
    lambda_d: Rate
    mu_d: Rate
    lambda_i: Rate
    mu_i: Rate


class TierConfig(_Strict):
    name: str
    replicas: int = Field(default=1, ge=1)
    mean_service_time: Duration
    cv_service: float = Field(ge=0, allow_inf_nan=False)
    gamma: int = Field(ge=1)


class AnalysisConfig(_Strict):
    d_max: Duration | None = None
    thresholds: list[Duration] | None = None
    prune_threshold: float | None = Field(default=None, gt=0, lt=1)

    @model_validator(mode="after")
    def _one_threshold_form(self):
        if (self.d_max is None) == (self.thresholds is None):
            raise ValueError("give exactly one of d_max or thresholds")
        return self


class OptimizationConfig(_Strict):
    availability_target: float = Field(default=0.99999, ge=0, le=1)
    max_replicas: int = Field(default=4, ge=1)
    costs: Union[dict[str, float], None] = None

    @model_validator(mode="after")
    def _nonnegative_costs(self):
        if self.costs and any(not c >= 0 for c in self.costs.values()):
            raise ValueError("costs must be >= 0")
        return self


class ChainConfig(_Strict):
    tenants: list[TenantConfig] = Field(min_length=1)
    layers: LayersConfig
    tiers: list[TierConfig] = Field(min_length=1)
    analysis: AnalysisConfig
    optimization: OptimizationConfig = OptimizationConfig()

    @model_validator(mode="after")
    def _cross_checks(self):
        names = [t.name for t in self.tiers]
        if len(set(names)) != len(names):
            raise ValueError("tier names must be unique")
        ids = [t.id for t in self.tenants]
        if len(set(ids)) != len(ids):
            raise ValueError("tenant ids must be unique")
        for tenant in self.tenants:
            if isinstance(tenant.n, dict) and set(tenant.n) != set(names):
                raise ValueError(f"tenant {tenant.id}: n must list every tier {names}")
        if self.analysis.thresholds is not None and len(self.analysis.thresholds) != len(self.tenants):
            raise ValueError(f"analysis.thresholds needs one entry per tenant ({len(self.tenants)})")
        costs = self.optimization.costs
        if costs is not None and set(costs) != set(names):
            raise ValueError(f"optimization.costs must list every tier {names}")
        return self

    @property
    def thresholds(self) -> tuple[float, ...]:
        if self.analysis.thresholds is not None:
            return tuple(d.seconds() for d in self.analysis.thresholds)
        return (self.analysis.d_max.seconds(),) * len(self.tenants)


def _format_errors(exc: ValidationError) -> str:
    lines = []
    for err in exc.errors():
        path = ".".join(str(p) for p in err["loc"]) or "<root>"
        lines.append(f"{path}: {err['msg']}")
    return "\n".join(lines)


def parse_config(data) -> ChainConfig:
    try:
        return ChainConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_format_errors(exc)) from exc


def load_config(path) -> ChainConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return parse_config(data)


def build_chain(cfg: ChainConfig) -> ChainSpec:
    """Model objects for ``cfg`` with the configured replica counts."""
    layers = cfg.layers
    tiers = []
    try:
        for tier in cfg.tiers:
            tenants = tuple(
                TenantSpec(t.id, t.n_for(tier.name), t.lambda_c.per_second(), t.mu_c.per_second(),
                           t.arrival_rate.per_second(), t.cv_arrivals)
                for t in cfg.tenants)
            cnf = CnfSpec(tenants, layers.lambda_d.per_second(), layers.mu_d.per_second(),
                          layers.lambda_i.per_second(), layers.mu_i.per_second(), tier.gamma)
            tiers.append(TierSpec(tier.name, cnf, tier.replicas,
                                  ServiceStats(tier.mean_service_time.seconds(), tier.cv_service)))
        return ChainSpec(tuple(tiers), cfg.thresholds)
    except ValueError as exc:
        raise ModelError(str(exc)) from exc


def cost_model(cfg: ChainConfig) -> CostModel:
    costs = cfg.optimization.costs
    if costs is None:
        return CostModel.uniform(len(cfg.tiers))
    return CostModel(tuple(costs[t.name] for t in cfg.tiers))


def _rate(value: float) -> dict:
    return {"value": value, "unit": "per_second"}


def _seconds(value: float) -> dict:
    return {"value": value, "unit": "seconds"}


def normalized_dict(cfg: ChainConfig) -> dict:
    """``cfg`` with every rate per second and every duration in seconds."""
    out = {
        "tenants": [
            {"id": t.id, "n": dict(t.n) if isinstance(t.n, dict) else t.n,
             "lambda_c": _rate(t.lambda_c.per_second()), "mu_c": _rate(t.mu_c.per_second()),
             "arrival_rate": _rate(t.arrival_rate.per_second()), "cv_arrivals": t.cv_arrivals}
            for t in cfg.tenants],
        "layers": {k: _rate(getattr(cfg.layers, k).per_second())
                   for k in ("lambda_d", "mu_d", "lambda_i", "mu_i")},
        "tiers": [
            {"name": t.name, "replicas": t.replicas, "mean_service_time": _seconds(t.mean_service_time.seconds()),
             "cv_service": t.cv_service, "gamma": t.gamma}
            for t in cfg.tiers],
        "analysis": {"thresholds": [_seconds(w) for w in cfg.thresholds]},
        "optimization": {"availability_target": cfg.optimization.availability_target,
                         "max_replicas": cfg.optimization.max_replicas},
    }
    if cfg.analysis.prune_threshold is not None:
        out["analysis"]["prune_threshold"] = cfg.analysis.prune_threshold
    if cfg.optimization.costs is not None:
        out["optimization"]["costs"] = dict(cfg.optimization.costs)
    return out


def dump_normalized(cfg: ChainConfig) -> str:
    """YAML text of ``normalized_dict``; floats keep their exact repr."""
    return yaml.safe_dump(normalized_dict(cfg), sort_keys=False)


def with_overrides(cfg: ChainConfig, prune_threshold: float | None = None) -> ChainConfig:
    if prune_threshold is None:
        return cfg
    if not 0 < prune_threshold < 1 or math.isnan(prune_threshold):
        raise ConfigError(f"--prune: must lie in (0, 1), got {prune_threshold}")
    analysis = cfg.analysis.model_copy(update={"prune_threshold": prune_threshold})
    return cfg.model_copy(update={"analysis": analysis})
