"""Aggregation of replication results into mean and confidence interval."""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import fsum
from statistics import stdev
from typing import Sequence

from .model import ConfigError, RunResult


@dataclass(frozen=True)
class AggregateResult:
    """Across-run summary of one sweep point.

    ci95 fields are half-widths: 1.96 * sample standard deviation / sqrt(n).
    A single run has zero-width intervals. The context fields (strategy,
    cache_size, zipf_beta, events) are filled by the sweep driver for
    CSV output and stay None for bare aggregations.
    """

    mean_cost: float
    mean_wait: float
    mean_queries: float
    ci95_cost: float
    ci95_wait: float
    n_runs: int
    param: float | None = None
    strategy: str | None = None
    cache_size: int | None = None
    zipf_beta: float | None = None
    events: int | None = None


def _ci95(values: Sequence[float]) -> float:
    if len(values) < 2:
        return 0.0
    return 1.96 * stdev(values) / math.sqrt(len(values))


def aggregate_runs(results: Sequence[RunResult], param: float | None = None) -> AggregateResult:
    """Sample means and 95% half-widths over a non-empty batch of runs.

    Sums use fsum, so the aggregate is exactly invariant under
    permutation of the runs.
    """
    if not results:
        raise ConfigError("cannot aggregate zero runs")
    costs = [r.avg_cost for r in results]
    waits = [r.avg_wait for r in results]
    queries = [r.avg_queries for r in results]
    n = len(results)
    return AggregateResult(
        mean_cost=fsum(costs) / n,
        mean_wait=fsum(waits) / n,
        mean_queries=fsum(queries) / n,
        ci95_cost=_ci95(costs),
        ci95_wait=_ci95(waits),
        n_runs=n,
        param=param,
    )
