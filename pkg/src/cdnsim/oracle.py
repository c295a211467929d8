"""Independent ground truths the simulator is checked against.

Closed-form queueing results (M/M/1 sojourn, the power-of-d-choices mean
queue) validate the event engine, and a brute-force search over all
feasible assignment sequences of a tiny instance bounds every mapping
strategy from below on a fixed trace. Nothing here imports the engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from random import Random
from typing import Sequence

from .model import CacheAllocation, ConfigError, CostMatrix, ServiceSpec, StrategySpec
from .popularity import candidate_table
from . import strategies


def mm1_mean_sojourn(arrival_rate: float, service_rate: float) -> float:
    """Mean time in system of an M/M/1 queue: 1 / (mu - lambda)."""
    if arrival_rate <= 0.0 or service_rate <= 0.0:
        raise ConfigError("rates must be strictly positive")
    if arrival_rate >= service_rate:
        raise ConfigError(
            f"unstable queue: arrival rate {arrival_rate} >= service rate {service_rate}"
        )
    return 1.0 / (service_rate - arrival_rate)


def supermarket_mean_queue(load: float, n_choices: int) -> float:
    """Mean jobs per server when each arrival joins the shortest of
    n_choices uniformly sampled queues (unit-rate exponential service).

    Evaluates the fixed-point series sum_{i>=1} load^((d^i - 1)/(d - 1)),
    truncated once terms drop below 1e-12. n_choices = 1 recovers the
    M/M/1 mean load/(1 - load).
    """
    if not 0.0 < load < 1.0:
        raise ConfigError(f"load must lie in (0, 1), got {load}")
    if n_choices < 1:
        raise ConfigError("n_choices must be >= 1")
    total = 0.0
    exponent = 1.0
    while True:
        term = load**exponent
        if term < 1e-12:
            return total
        total += term
        exponent = exponent * n_choices + 1.0


@dataclass(frozen=True)
class TinyInstance:
    """A fixed request trace over a toy system, small enough to enumerate
    every feasible assignment sequence."""

    cost: CostMatrix
    allocation: CacheAllocation
    arrival_times: tuple[float, ...]
    users: tuple[int, ...]
    files: tuple[int, ...]
    service: ServiceSpec

    def __post_init__(self) -> None:
        t = len(self.arrival_times)
        if not (len(self.users) == len(self.files) == t):
            raise ConfigError("arrival_times, users and files must have equal length")
        if not 1 <= t <= 8:
            raise ConfigError("instance must carry between 1 and 8 requests")
        if any(b <= a for a, b in zip(self.arrival_times, self.arrival_times[1:])):
            raise ConfigError("arrival times must be strictly increasing")
        for u in self.users:
            if not 0 <= u < self.cost.n_users:
                raise ConfigError(f"unknown user {u}")
        for f in self.files:
            if not 0 <= f < self.allocation.n_files:
                raise ConfigError(f"unknown file {f}")
        size = 1
        for cands in self.request_candidates():
            size *= len(cands)
            if size > 10_000:
                raise ConfigError("assignment space exceeds the 1e4 enumeration bound")

    @property
    def n_requests(self) -> int:
        return len(self.arrival_times)

    def request_candidates(self) -> list[tuple[int, ...]]:
        table = candidate_table(self.allocation)
        return [table[f] for f in self.files]


def _service_samples(inst: TinyInstance, n_paths: int, rng: Random) -> list[list[float]]:
    # One row per sample path, one duration per request index. Shared across
    # sequences so comparisons use common random numbers.
    if inst.service.kind == "const":
        return [[inst.service.value] * inst.n_requests]
    return [
        [rng.expovariate(inst.service.value) for _ in range(inst.n_requests)]
        for _ in range(n_paths)
    ]


def replay_assignments(
    inst: TinyInstance, servers: Sequence[int], services: Sequence[float]
) -> tuple[float, float]:
    """FIFO replay of a fixed assignment sequence; returns (mean cost,
    mean sojourn) over the trace."""
    free_at = [0.0] * inst.cost.n_servers
    total_cost = 0.0
    total_sojourn = 0.0
    for j, k in enumerate(servers):
        t = inst.arrival_times[j]
        start = free_at[k] if free_at[k] > t else t
        done = start + services[j]
        free_at[k] = done
        total_cost += inst.cost.entries[inst.users[j]][k]
        total_sojourn += done - t
    n = inst.n_requests
    return total_cost / n, total_sojourn / n


def sequence_objective(
    inst: TinyInstance,
    servers: Sequence[int],
    cost_weight: float,
    sample_paths: Sequence[Sequence[float]],
) -> float:
    """cost_weight * mean cost + (1 - cost_weight) * mean sojourn, the
    sojourn averaged over the given service sample paths."""
    # Cost depends only on the assignments, so any path reports the same value.
    mean_cost = 0.0
    mean_sojourn = 0.0
    for services in sample_paths:
        mean_cost, d = replay_assignments(inst, servers, services)
        mean_sojourn += d
    mean_sojourn /= len(sample_paths)
    return cost_weight * mean_cost + (1.0 - cost_weight) * mean_sojourn


def exhaustive_objective_search(
    inst: TinyInstance,
    cost_weight: float,
    n_service_samples: int = 1,
    rng: Random | None = None,
) -> tuple[tuple[int, ...], float]:
    """Enumerate every feasible assignment sequence and return the one
    minimizing the mixed objective, with its value.

    Ties keep the first sequence in candidate order. With constant
    service the single sample path makes the bound exact for any policy,
    adaptive or not; with random service it bounds fixed sequences under
    common random numbers.
    """
    if not 0.0 <= cost_weight <= 1.0:
        raise ValueError(f"cost_weight must lie in [0, 1], got {cost_weight}")
    if n_service_samples < 1:
        raise ValueError("n_service_samples must be >= 1")
    if rng is None:
        rng = Random(0)
    paths = _service_samples(inst, n_service_samples, rng)
    best_seq: tuple[int, ...] | None = None
    best_val = math.inf
    for seq in product(*inst.request_candidates()):
        val = sequence_objective(inst, seq, cost_weight, paths)
        if val < best_val:
            best_val = val
            best_seq = seq
    assert best_seq is not None
    return best_seq, best_val


def replay_strategy(
    inst: TinyInstance,
    strategy: StrategySpec | str,
    cost_weight: float,
    sample_paths: Sequence[Sequence[float]],
    rng: Random,
) -> float:
    """Run a mapping strategy over the instance's trace and score it with
    the same objective and service samples as the exhaustive search.

    The strategy sees the true jobs-in-system vector at each arrival, so
    its decisions may differ between sample paths.
    """
    if isinstance(strategy, str):
        strategy = StrategySpec.parse(strategy)
    cands = inst.request_candidates()
    n_servers = inst.cost.n_servers
    objective = 0.0
    for services in sample_paths:
        completion: list[list[float]] = [[] for _ in range(n_servers)]
        free_at = [0.0] * n_servers
        total_cost = 0.0
        total_sojourn = 0.0
        for j in range(inst.n_requests):
            t = inst.arrival_times[j]
            queues = [sum(1 for c in completion[k] if c > t) for k in range(n_servers)]
            decision = _dispatch(strategy, inst.users[j], cands[j],
                                 inst.cost.entries[inst.users[j]], queues, rng)
            k = decision.server
            start = free_at[k] if free_at[k] > t else t
            done = start + services[j]
            free_at[k] = done
            completion[k].append(done)
            total_cost += inst.cost.entries[inst.users[j]][k]
            total_sojourn += done - t
        n = inst.n_requests
        objective += (
            cost_weight * (total_cost / n) + (1.0 - cost_weight) * (total_sojourn / n)
        )
    return objective / len(sample_paths)


def _dispatch(spec: StrategySpec, user, cands, costs, queues, rng):
    if spec.kind == "mincost":
        return strategies.min_cost_map(user, cands, costs, rng)
    if spec.kind == "minqueue":
        return strategies.min_queue_map(user, cands, queues, rng)
    if spec.kind == "pss":
        return strategies.pss_map(user, cands, costs, queues, spec.param, rng)
    if spec.kind == "wmc":
        return strategies.wmc_map(user, cands, costs, queues, spec.param, rng)
    return strategies.mcs_map(user, cands, costs, queues, spec.param, rng)


def random_tiny_instance(rng: Random, *, n_requests: int = 6) -> TinyInstance:
    """A feasible random instance: at most 3 servers, users, and files,
    continuous costs (almost surely tie-free), constant unit service."""
    n_servers = rng.randint(2, 3)
    n_users = rng.randint(1, 3)
    n_files = rng.randint(2, 3)
    cache_size = rng.randint(math.ceil(n_files / n_servers), n_files)
    cost = CostMatrix.from_rows(
        [[rng.uniform(0.0, 10.0) for _ in range(n_servers)] for _ in range(n_users)]
    )
    while True:
        caches = [frozenset(rng.sample(range(n_files), cache_size)) for _ in range(n_servers)]
        if set().union(*caches) == set(range(n_files)):
            break
    allocation = CacheAllocation(tuple(caches), n_files)
    times = []
    t = 0.0
    for _ in range(n_requests):
        t += rng.expovariate(1.0)
        times.append(t)
    return TinyInstance(
        cost=cost,
        allocation=allocation,
        arrival_times=tuple(times),
        users=tuple(rng.randrange(n_users) for _ in range(n_requests)),
        files=tuple(rng.randrange(n_files) for _ in range(n_requests)),
        service=ServiceSpec.constant(1.0),
    )
