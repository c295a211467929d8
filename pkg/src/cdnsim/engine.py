"""Event-driven simulation core.

One run: Poisson request arrivals superposed over all users, each request
mapped to a candidate server by the configured strategy, FIFO service at
every server, drain after the final arrival until every counted job has
departed. Events are processed in nondecreasing time order with
departures ahead of arrivals at equal timestamps.

All randomness of a run derives from one 64-bit run seed, split into
fixed named sub-streams (layout, placement, arrivals, files, service,
strategy) so that two runs with the same seed see identical arrival,
file, and service sequences regardless of the strategy under test.
"""

from __future__ import annotations

import hashlib
from bisect import bisect_right
from collections import deque
from heapq import heappop, heappush
from random import Random

from .model import (
    ConfigError,
    RunResult,
    ServiceSpec,
    SimConfig,
    StrategySpec,
    validate_config,
)
from .popularity import candidate_table, proportional_placement, zipf_profile
from .strategies import bind_strategy
from .topology import manhattan_cost_matrix, random_lattice_layout


def mix_seed(*parts) -> int:
    """Collapse integers and string labels into one 64-bit seed.

    Stable across processes and platforms (unlike hash()), so sweep
    points, run indices, and stream labels always map to the same seeds.
    """
    h = hashlib.blake2b(digest_size=8)
    for part in parts:
        if isinstance(part, str):
            h.update(b"s")
            h.update(part.encode("utf-8"))
            h.update(b"\x00")
        elif isinstance(part, int):
            h.update(b"i")
            h.update(part.to_bytes(16, "little", signed=True))
        else:
            raise TypeError(f"seed parts must be int or str, got {type(part).__name__}")
    return int.from_bytes(h.digest(), "little")


def substream(run_seed: int, label: str) -> Random:
    """Independent named generator derived from the run seed."""
    return Random(mix_seed(run_seed, label))


def next_arrival(rates, rng: Random, *, cum: list[float] | None = None) -> tuple[float, int]:
    """Time to the next request of the superposed process and its user.

    The gap is exponential at the total rate; the user is chosen with
    probability proportional to its own rate, independently of the gap.
    """
    if cum is None:
        cum = []
        acc = 0.0
        for r in rates:
            acc += r
            cum.append(acc)
    total = cum[-1]
    gap = rng.expovariate(total)
    user = bisect_right(cum, rng.random() * total)
    if user >= len(cum):
        user = len(cum) - 1
    return gap, user


def sample_service(service: ServiceSpec, rng: Random) -> float:
    """One service duration; constant service consumes no randomness."""
    if service.kind == "exp":
        return rng.expovariate(service.value)
    return service.value


def run_simulation(
    cfg: SimConfig,
    strategy: StrategySpec | str,
    run_seed: int,
    *,
    cost_matrix=None,
    allocation=None,
    trace=None,
    decision_hook=None,
    debug_checks: bool = False,
) -> RunResult:
    """Simulate exactly cfg.horizon_events arrivals and return the averages
    over the counted window (arrivals after the warmup, followed to their
    departures).

    cost_matrix and allocation are drawn from the run seed unless injected.
    trace, when given, receives one text line per arrival:
    time,user,file,server,queue_len_seen,queries. decision_hook(time, user,
    file, candidates, queues, decision) is called on every assignment.
    debug_checks turns on per-event structural assertions (slow).
    """
    validate_config(cfg)
    if isinstance(strategy, str):
        strategy = StrategySpec.parse(strategy)

    n_servers = cfg.n_servers
    n_users = cfg.n_users
    n_files = cfg.n_files

    if cost_matrix is None:
        layout = random_lattice_layout(
            n_users, n_servers, cfg.lattice_side, substream(run_seed, "layout")
        )
        cost_matrix = manhattan_cost_matrix(layout)
    elif cost_matrix.n_users != n_users or cost_matrix.n_servers != n_servers:
        raise ConfigError(
            f"cost matrix is {cost_matrix.n_users}x{cost_matrix.n_servers}, "
            f"config needs {n_users}x{n_servers}"
        )

    profile = zipf_profile(n_files, cfg.zipf_beta)
    if allocation is None:
        allocation = proportional_placement(
            profile, n_servers, cfg.cache_size, substream(run_seed, "placement")
        )
    elif allocation.n_servers != n_servers or allocation.n_files != n_files:
        raise ConfigError("allocation does not match the configured system size")

    rows = [list(r) for r in cost_matrix.entries]
    cands_by_file = candidate_table(allocation)

    arr_rng = substream(run_seed, "arrivals")
    file_rng = substream(run_seed, "files")
    svc_rng = substream(run_seed, "service")
    decide = bind_strategy(
        strategy, rows, cands_by_file, n_users, n_files, substream(run_seed, "strategy")
    )

    cum_rates: list[float] = []
    acc = 0.0
    for r in cfg.arrival_rates:
        acc += r
        cum_rates.append(acc)
    total_rate = cum_rates[-1]
    cum_probs = profile.cumulative()

    horizon = cfg.horizon_events
    warmup = cfg.warmup_events
    n_counted = horizon - warmup

    # Per-server state. njobs mirrors len(pending) plus the in-service job
    # and is the queue vector strategies see.
    pending = [deque() for _ in range(n_servers)]
    in_service: list = [None] * n_servers
    njobs = [0] * n_servers
    njobs_total = 0

    dep_heap: list = []
    seq = 0

    sum_cost = 0.0
    sum_wait = 0.0
    sum_queries = 0
    counted_outstanding = 0
    counted_departures = 0

    measuring = False
    area = 0.0
    t_last = 0.0
    t_meas_start = 0.0
    t_meas_end = 0.0

    # Hot-loop local bindings.
    push = heappush
    pop = heappop
    bis = bisect_right
    arr_exp = arr_rng.expovariate
    arr_u = arr_rng.random
    file_u = file_rng.random
    svc_exp = svc_rng.expovariate
    service_is_exp = cfg.service.kind == "exp"
    svc_param = cfg.service.value
    last_file = n_files - 1
    last_user = n_users - 1
    INF = float("inf")

    gap = arr_exp(total_rate)
    next_user = bis(cum_rates, arr_u() * total_rate)
    if next_user > last_user:
        next_user = last_user
    next_t = gap
    arrivals_done = 0
    prev_event_t = 0.0

    while True:
        if dep_heap and (arrivals_done >= horizon or dep_heap[0][0] <= next_t):
            tdep, _, k = pop(dep_heap)
            if measuring:
                area += njobs_total * (tdep - t_last)
                t_last = tdep
            arrived_at, counted = in_service[k]
            q = pending[k]
            if q:
                nxt = q.popleft()
                in_service[k] = (nxt[0], nxt[1])
                seq += 1
                push(dep_heap, (tdep + nxt[2], seq, k))
            else:
                in_service[k] = None
            njobs[k] -= 1
            njobs_total -= 1
            if debug_checks:
                assert tdep >= prev_event_t
                prev_event_t = tdep
                _check_state(k, pending, in_service, njobs)
            if counted:
                sum_wait += tdep - arrived_at
                counted_departures += 1
                counted_outstanding -= 1
                if counted_outstanding == 0 and arrivals_done >= horizon:
                    t_meas_end = tdep
                    break
        elif arrivals_done < horizon:
            t = next_t
            if measuring:
                area += njobs_total * (t - t_last)
                t_last = t
            x = file_u()
            fidx = bis(cum_probs, x)
            if fidx > last_file:
                fidx = last_file
            svc = svc_exp(svc_param) if service_is_exp else svc_param
            decision = decide(next_user, fidx, njobs)
            k = decision.server
            counted = arrivals_done >= warmup
            if counted:
                if not measuring:
                    measuring = True
                    t_meas_start = t
                    t_last = t
                sum_cost += rows[next_user][k]
                sum_queries += decision.queries_used
                counted_outstanding += 1
            if trace is not None:
                trace.write(
                    f"{t!r},{next_user},{fidx},{k},{njobs[k]},{decision.queries_used}\n"
                )
            if decision_hook is not None:
                decision_hook(t, next_user, fidx, cands_by_file[fidx], njobs, decision)
            if debug_checks:
                assert t >= prev_event_t
                prev_event_t = t
                cands = cands_by_file[fidx]
                assert k in cands, f"strategy chose server {k} outside candidates {cands}"
                assert decision.queries_used <= len(cands)
            if in_service[k] is None:
                in_service[k] = (t, counted)
                seq += 1
                push(dep_heap, (t + svc, seq, k))
            else:
                pending[k].append((t, counted, svc))
            njobs[k] += 1
            njobs_total += 1
            if debug_checks:
                _check_state(k, pending, in_service, njobs)
            arrivals_done += 1
            if arrivals_done < horizon:
                gap = arr_exp(total_rate)
                next_user = bis(cum_rates, arr_u() * total_rate)
                if next_user > last_user:
                    next_user = last_user
                next_t = t + gap
            else:
                next_t = INF
        else:
            break

    assert arrivals_done == horizon, "simulation ended before the horizon"
    assert counted_departures == n_counted, (
        f"counted {counted_departures} departures for {n_counted} counted arrivals"
    )

    span = t_meas_end - t_meas_start
    avg_jobs = area / (span * n_servers) if span > 0.0 else 0.0
    return RunResult(
        avg_cost=sum_cost / n_counted,
        avg_wait=sum_wait / n_counted,
        avg_queries=sum_queries / n_counted,
        avg_jobs=avg_jobs,
        counted_events=n_counted,
        seed_used=run_seed,
    )


def _check_state(k, pending, in_service, njobs) -> None:
    # Structural invariants around server k after an event touched it.
    busy = in_service[k] is not None
    assert njobs[k] == len(pending[k]) + (1 if busy else 0)
    assert njobs[k] >= 0
    assert busy or not pending[k], f"server {k} idles with a non-empty queue"
    if busy and pending[k]:
        assert in_service[k][0] <= pending[k][0][0], f"server {k} violates FIFO order"
