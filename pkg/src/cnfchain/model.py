"""Multi-state CTMC model of a single containerized network function (CNF).

A CNF stacks three layers: per-tenant container pools, a shared container
engine (Docker) and the host infrastructure.  Its state is either a vector
``eta`` of working instances per tenant, or one of the two layer-failure
states that zero out every tenant's capacity.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import connected_components


class ModelError(Exception):
    """Raised when a model cannot be built or solved."""


class SingularGeneratorError(ModelError):
    pass


class StateKind(enum.Enum):
    WORKING = "working"
    DOCKER_FAILED = "DLF"
    INFRA_FAILED = "ILF"


@dataclass(frozen=True)
class TenantSpec:
    """Workload and container failure/repair rates of one tenant.

    All rates are per second.
    """

    tenant_id: int
    n: int
    lambda_c: float
    mu_c: float
    arrival_rate: float
    cv_arrivals: float = 1.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"tenant {self.tenant_id}: n must be a positive integer, got {self.n}")
        for name in ("lambda_c", "mu_c", "arrival_rate"):
            if not getattr(self, name) > 0:
                raise ValueError(f"tenant {self.tenant_id}: {name} must be > 0")
        if not self.cv_arrivals >= 0:
            raise ValueError(f"tenant {self.tenant_id}: cv_arrivals must be >= 0")


@dataclass(frozen=True)
class CnfSpec:
    tenants: tuple[TenantSpec, ...]
    lambda_d: float
    mu_d: float
    lambda_i: float
    mu_i: float
    gamma: int

    def __post_init__(self):
        object.__setattr__(self, "tenants", tuple(self.tenants))
        if not self.tenants:
            raise ValueError("a CNF needs at least one tenant")
        for name in ("lambda_d", "mu_d", "lambda_i", "mu_i"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if int(self.gamma) != self.gamma or self.gamma < 1:
            raise ValueError(f"gamma must be a positive integer, got {self.gamma}")

    @property
    def tenant_count(self) -> int:
        return len(self.tenants)

    @property
    def n(self) -> tuple[int, ...]:
        return tuple(t.n for t in self.tenants)

    def permuted(self, order) -> CnfSpec:
        """Same CNF with tenants relabelled in ``order``."""
        return CnfSpec(tuple(self.tenants[i] for i in order), self.lambda_d, self.mu_d,
                       self.lambda_i, self.mu_i, self.gamma)


@dataclass(frozen=True)
class CnfState:
    kind: StateKind
    eta: tuple[int, ...]

    @property
    def label(self) -> str:
        if self.kind is StateKind.WORKING:
            return "(" + ",".join(map(str, self.eta)) + ")"
        return self.kind.value


@dataclass(frozen=True)
class StateSpace:
    states: tuple[CnfState, ...]
    index: dict = field(compare=False, repr=False)

    def __len__(self):
        return len(self.states)

    @property
    def full_index(self) -> int:
        return 0

    @property
    def docker_index(self) -> int:
        return len(self.states) - 2

    @property
    def infra_index(self) -> int:
        return len(self.states) - 1


def state_count(n) -> int:
    """Number of CNF states, ``prod(n_i + 1) + 2``."""
    total = 1
    for n_i in n:
        total *= n_i + 1
    return total + 2


def enumerate_states(spec: CnfSpec) -> StateSpace:
    """All CNF states in a fixed order.

    Working states come first, lexicographically descending from the
    fully-working vector ``(n_1, ..., n_K)``; DLF and ILF close the list.
    """
    n = spec.n
    if not n or any(n_i < 1 for n_i in n):
        raise ValueError(f"invalid instance counts {n}")
    etas = itertools.product(*(range(n_i, -1, -1) for n_i in n))
    zero = (0,) * len(n)
    states = [CnfState(StateKind.WORKING, eta) for eta in etas]
    states.append(CnfState(StateKind.DOCKER_FAILED, zero))
    states.append(CnfState(StateKind.INFRA_FAILED, zero))
    index = {s: i for i, s in enumerate(states)}
    return StateSpace(tuple(states), index)


def build_generator(spec: CnfSpec, space: StateSpace | None = None) -> np.ndarray:
    """Infinitesimal generator ``Q`` (rates per second) over ``space``.

    Container failures and repairs are independent per instance, so tenant
    ``i`` loses an instance at ``eta_i * lambda_c`` and regains one at
    ``(n_i - eta_i) * mu_c``.  Layer repairs restart the CNF fully working.
    """
    if space is None:
        space = enumerate_states(spec)
    size = len(space)
    q = np.zeros((size, size))
    full = space.full_index
    dlf, ilf = space.docker_index, space.infra_index
    for s, state in enumerate(space.states):
        if state.kind is not StateKind.WORKING:
            continue
        eta = state.eta
        for i, tenant in enumerate(spec.tenants):
            if eta[i] > 0:
                down = eta[:i] + (eta[i] - 1,) + eta[i + 1:]
                q[s, space.index[CnfState(StateKind.WORKING, down)]] += eta[i] * tenant.lambda_c
            if eta[i] < tenant.n:
                up = eta[:i] + (eta[i] + 1,) + eta[i + 1:]
                q[s, space.index[CnfState(StateKind.WORKING, up)]] += (tenant.n - eta[i]) * tenant.mu_c
        q[s, dlf] += spec.lambda_d
        q[s, ilf] += spec.lambda_i
    q[dlf, ilf] += spec.lambda_i
    q[dlf, full] += spec.mu_d
    q[ilf, full] += spec.mu_i
    np.fill_diagonal(q, 0.0)
    np.fill_diagonal(q, -q.sum(axis=1))
    return q


def is_irreducible(q: np.ndarray) -> bool:
    adjacency = (q > 0).astype(np.int8)
    np.fill_diagonal(adjacency, 0)
    n_comp, _ = connected_components(adjacency, directed=True, connection="strong")
    return n_comp == 1


def solve_steady_state(q: np.ndarray) -> np.ndarray:
    """Stationary distribution ``p`` with ``p Q = 0`` and ``sum(p) = 1``.

    The last balance equation is replaced by the normalization constraint
    and the system is solved densely.
    """
    q = np.asarray(q, dtype=float)
    size = q.shape[0]
    a = q.T.copy()
    a[-1, :] = 1.0
    b = np.zeros(size)
    b[-1] = 1.0
    try:
        p = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise SingularGeneratorError(f"generator is singular: {exc}") from exc
    if not np.all(np.isfinite(p)) or np.linalg.cond(a) > 1e14:
        raise SingularGeneratorError("generator is numerically singular (reducible chain?)")
    # round-off can leave entries like -1e-21
    p = np.clip(p, 0.0, None)
    p /= p.sum()
    return p


def generator_residual(q: np.ndarray, p: np.ndarray) -> float:
    """``max |p Q|`` relative to the largest rate in ``Q``."""
    return float(np.max(np.abs(p @ q)) / np.max(np.abs(q)))


def capacity_vector(state: CnfState, gamma: int) -> tuple[int, ...]:
    if state.kind is not StateKind.WORKING:
        return (0,) * len(state.eta)
    return tuple(gamma * e for e in state.eta)


def capacity_matrix(space: StateSpace, gamma: int) -> np.ndarray:
    """Per-state capacity vectors stacked into an ``(N, K)`` integer array."""
    return np.array([capacity_vector(s, gamma) for s in space.states], dtype=np.int64)
