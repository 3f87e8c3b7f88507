"""Mean delay of a tenant queue with a given number of servers.

The exact M/M/c (Erlang-C) mean sojourn is corrected for general service
and arrival variability with Kingman's factor ``(CV_a^2 + CV_s^2) / 2``,
applied to the whole sojourn time.  A queue with no servers, or with
utilization >= 1, has delay ``UNAVAILABLE`` (``math.inf``), which absorbs
addition.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

UNAVAILABLE = math.inf

_RESCALE = 1e250


class UnstableQueueError(ValueError):
    """Utilization is at or above 1; the queue has no steady state."""


@dataclass(frozen=True)
class ServiceStats:
    mean_service_time: float
    cv_service: float

    def __post_init__(self):
        if not self.mean_service_time > 0:
            raise ValueError("mean_service_time must be > 0")
        if not self.cv_service >= 0:
            raise ValueError("cv_service must be >= 0")

    @property
    def rate(self) -> float:
        return 1.0 / self.mean_service_time


def erlang_c_mean_jobs(alpha: float, beta: float, c: int) -> float:
    """Mean number of jobs in an M/M/c system.

    Parameters
    ----------
    alpha : float
        Poisson arrival rate.
    beta : float
        Per-server service rate.
    c : int
        Number of servers, ``c >= 1``.
    """
    if c < 1:
        raise ValueError("need at least one server")
    rho = alpha / (beta * c)
    if rho >= 1.0:
        raise UnstableQueueError(f"utilization {rho:.6g} >= 1")
    load = c * rho
    # a_h = load^h / h!, rescaled whenever it grows large; only ratios matter
    term = 1.0
    head = 0.0
    for h in range(c):
        head += term
        term *= load / (h + 1)
        if term > _RESCALE:
            term /= _RESCALE
            head /= _RESCALE
    tail = term / (1.0 - rho)
    pi = 1.0 / (head + tail)
    return load + rho * term * pi / (1.0 - rho) ** 2


def mean_sojourn(alpha: float, beta: float, c: int) -> float:
    """Mean M/M/c sojourn time by Little's law."""
    return erlang_c_mean_jobs(alpha, beta, c) / alpha


def kingman_factor(cv_arrivals: float, cv_service: float) -> float:
    return (cv_arrivals ** 2 + cv_service ** 2) / 2.0


def kingman_mean_delay(alpha: float, svc: ServiceStats, c: int, cv_arrivals: float = 1.0) -> float:
    """Approximate M/G/c (or G/G/c) mean delay, ``UNAVAILABLE`` if unstable."""
    if c <= 0:
        return UNAVAILABLE
    try:
        sojourn = mean_sojourn(alpha, svc.rate, c)
    except UnstableQueueError:
        return UNAVAILABLE
    return sojourn * kingman_factor(cv_arrivals, svc.cv_service)


def delay_table(alpha: float, svc: ServiceStats, max_servers: int, cv_arrivals: float = 1.0) -> np.ndarray:
    """``kingman_mean_delay`` for every server count ``0..max_servers``."""
    return np.array([kingman_mean_delay(alpha, svc, c, cv_arrivals) for c in range(max_servers + 1)])
