"""Window-cycle receive-rate model for loss-driven additive-increase transfer
over parallel paths.

The congestion window saws between floor(w_max/2) and w_max, where w_max is
the largest window whose sharing still fits inside every path's pipeline.
Each window value is one round: a round at window w delivers w messages at
the aggregate rate the sharing sustains, so the steady receive-rate is the
cycle's message total over the cycle's duration.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import (Scenario, SharingVector, StrategyId, pipeline_capacity,
                   rate_msgs, rtt, scenario_with)
from .sharing import sharing_function

# Slack for the real-valued sharing functions when checked against integer
# capacities; whole-number allocations compare exactly.
_FEAS_EPS = 1e-9

# A window past this is a misconfigured scenario (runaway buffer or rate),
# not a workload worth modeling.
_SEARCH_CAP = 10_000_000


class ModelError(Exception):
    """No feasible window exists, or the search for one ran away."""


@dataclass(frozen=True)
class RoundStats:
    w_k: int                          # window held during this round
    per_path_pending: SharingVector   # how the window spreads over paths
    per_path_rate: tuple[float, ...]  # msgs/s each path contributes
    b_k: float                        # aggregate delivery rate, msgs/s
    x_k: float                        # round duration, seconds


@dataclass(frozen=True)
class CycleStats:
    w_max: int
    t_interests: int     # messages delivered over one full cycle
    a_seconds: float     # duration of one full cycle
    y_msgs_per_s: float  # t_interests / a_seconds
    y_gross_bps: float   # receive-rate counting whole Data messages
    y_net_bps: float     # receive-rate counting payload bytes only
    rounds: tuple[RoundStats, ...]


@dataclass(frozen=True)
class SweepPoint:
    value: float              # the varied parameter, SI units
    stats: CycleStats | None  # None when this point failed
    error: str | None


def wmax(scenario: Scenario, strategy: StrategyId) -> int:
    """Largest window whose sharing stays within every pipeline capacity.

    Exponential probing then bisection; allocations only grow with the
    window, so feasibility is monotone and the bracket is sound.
    """
    share = sharing_function(strategy)
    caps = [pipeline_capacity(p, rate_msgs(scenario, i))
            for i, p in enumerate(scenario.paths)]
    n = len(caps)

    def fits(w):
        per = share(scenario, w).per_path
        return all(per[i] <= caps[i] + _FEAS_EPS for i in range(n))

    if not fits(1):
        raise ModelError(
            "no feasible window: a single pending Interest already "
            "overflows a path")
    lo, hi = 1, 2
    while fits(hi):
        lo = hi
        hi *= 2
        if hi > _SEARCH_CAP:
            raise ModelError(
                f"no window bound found below {_SEARCH_CAP}; "
                "path capacities look unbounded")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if fits(mid):
            lo = mid
        else:
            hi = mid
    return lo


def cycle(scenario: Scenario, strategy: StrategyId) -> CycleStats:
    """Steady-state statistics of one halving-to-peak window cycle."""
    w_hi = wmax(scenario, strategy)
    # The halved window never drops below one Interest, so a cycle on a
    # one-Interest peak is the single round w == 1, not an empty round.
    w_lo = max(1, w_hi // 2)
    share = sharing_function(strategy)
    n = len(scenario.paths)
    paths = scenario.paths
    rates = [rate_msgs(scenario, i) for i in range(n)]

    rounds = []
    t_total = 0
    a_total = 0.0
    for w in range(w_lo, w_hi + 1):
        sv = share(scenario, w)
        per_rate = tuple(
            sv.per_path[i] / rtt(paths[i], sv.per_path[i], rates[i])
            for i in range(n))
        b_k = sum(per_rate)
        x_k = w / b_k
        rounds.append(RoundStats(w, sv, per_rate, b_k, x_k))
        t_total += w
        a_total += x_k
    y = t_total / a_total
    return CycleStats(
        w_max=w_hi,
        t_interests=t_total,
        a_seconds=a_total,
        y_msgs_per_s=y,
        y_gross_bps=y * 8.0 * scenario.data_msg_bytes,
        y_net_bps=y * 8.0 * scenario.payload_bytes,
        rounds=tuple(rounds))


def sweep_model(scenario: Scenario, strategy: StrategyId, path_index: int,
                param: str, values) -> list[SweepPoint]:
    """cycle() across variations of one path parameter ('delay' in s or
    'rate' in bits/s).  A point that has no feasible window is reported in
    place instead of aborting the sweep."""
    points = []
    for v in values:
        varied = scenario_with(scenario, path_index, param, v)
        try:
            points.append(SweepPoint(v, cycle(varied, strategy), None))
        except ModelError as exc:
            points.append(SweepPoint(v, None, str(exc)))
    return points
