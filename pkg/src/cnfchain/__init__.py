"""Latency-driven availability of multi-tenant containerized service chains.

CNF state models (``model``), per-state queueing delays (``queueing``),
MUGF composition of tiers and chains (``mugf``), redundancy optimization
(``optimize``) and simulation oracles (``simulate``).
"""
from .kernels import BACKEND
from .model import (CnfSpec, CnfState, ModelError, SingularGeneratorError, StateKind, StateSpace, TenantSpec,
                    build_generator, capacity_matrix, capacity_vector, enumerate_states, is_irreducible,
                    solve_steady_state, state_count)
from .mugf import (ChainSpec, Mugf, MugfTooLargeError, TierSpec, availability, availability_bounds,
                   chain_availability, chain_mugf, cnf_capacity_distribution, joint_state_count, merge_terms,
                   mugf_report, tier_capacity_distribution, tier_mugf)
from .optimize import (CostModel, EmptyFeasibleSetError, LedgerEntry, OptimizationLedger, configuration_cost,
                       evaluate_configuration, optimize)
from .queueing import (UNAVAILABLE, ServiceStats, UnstableQueueError, erlang_c_mean_jobs, kingman_factor,
                       kingman_mean_delay, mean_sojourn)
from .simulate import (SimulationConfig, simulate_chain_availability, simulate_cnf_occupancy,
                       simulate_mgc_sojourn)

__version__ = "0.1.0"
