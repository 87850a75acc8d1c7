"""Event-driven simulator of windowed Interest/Data transfer over parallel
paths.

Per path, an Interest crosses a one-way propagation delay, the producer
answers instantly, and the Data message passes through a rate-limited
drop-tail FIFO before crossing the same propagation delay back.  A message
keeps its buffer slot while it is being transmitted, so a path carries at
most 2·delay·rate + buffer messages without dropping — exactly the pipeline
capacity.  The receiver grows a fractional window by 1/W per delivered Data and
halves it on loss, sending one Interest per free window slot; the forwarding
strategy picks the face for every Interest individually.

Losses are signaled either at the drop instant ("oracle-immediate", the
default) or by a retransmission timer ("timeout").  Loss counters count
detections; under the oracle signal these coincide with the physical drops.
"""

from __future__ import annotations

import heapq
import math
import random
from collections import deque
from dataclasses import dataclass

from .core import (Scenario, StrategyId, pipeline_capacity, rate_msgs,
                   rtt, scenario_with, validate)

LOSS_ORACLE = "oracle-immediate"
LOSS_TIMEOUT = "timeout"

FPF_CAP_ORACLE = "oracle"
FPF_CAP_ESTIMATED = "estimated"

# Retransmission timer, as a multiple of the smoothed RTT (timeout mode).
_RTO_FACTOR = 2.0

# Learned capacity after a loss: keep this fraction of what was in flight.
_EST_GUARD = 0.75

# Event kinds, ordered only by (time, insertion seq) in the heap.
_EV_QUEUE = 0    # Interest reached the path bottleneck; Data enters the FIFO
_EV_DATA = 1     # Data reached the receiver
_EV_TIMEOUT = 2  # retransmission timer fired


@dataclass(frozen=True)
class SimConfig:
    duration: float | None = None    # stop after this much simulated time, s
    total_chunks: int | None = None  # ...or once this many chunks delivered
    initial_window: int = 1
    seed: int = 0                    # 0 = deterministic lowest-index tie-breaks
    loss_signal: str = LOSS_ORACLE
    fpf_capacity_mode: str = FPF_CAP_ORACLE
    rtt_smoothing_alpha: float = 0.125
    trace_window: bool = False


def validate_config(config: SimConfig) -> list[str]:
    """Returns the list of problems; an empty list means runnable."""
    errors = []
    if (config.duration is None) == (config.total_chunks is None):
        errors.append("exactly one of duration and total_chunks must be set")
    if config.duration is not None and not config.duration > 0:
        errors.append(f"duration must be > 0, got {config.duration}")
    if config.total_chunks is not None and config.total_chunks < 1:
        errors.append(f"total_chunks must be >= 1, got {config.total_chunks}")
    if config.initial_window < 1:
        errors.append(f"initial_window must be >= 1, got {config.initial_window}")
    if not 0.0 < config.rtt_smoothing_alpha <= 1.0:
        errors.append(
            f"rtt_smoothing_alpha must be in (0, 1], got {config.rtt_smoothing_alpha}")
    if config.loss_signal not in (LOSS_ORACLE, LOSS_TIMEOUT):
        errors.append(f"loss_signal must be {LOSS_ORACLE!r} or {LOSS_TIMEOUT!r}, "
                      f"got {config.loss_signal!r}")
    if config.fpf_capacity_mode not in (FPF_CAP_ORACLE, FPF_CAP_ESTIMATED):
        errors.append(f"fpf_capacity_mode must be {FPF_CAP_ORACLE!r} or "
                      f"{FPF_CAP_ESTIMATED!r}, got {config.fpf_capacity_mode!r}")
    return errors


@dataclass(slots=True)
class FaceState:
    pending: int = 0             # Interests outstanding on this face
    srtt: float | None = None    # smoothed RTT; None until the first sample
    rr_credit: float = 0.0       # deficit counter for the weighted round robins
    est_capacity: float | None = None  # learned pipeline size (estimated fpf)


@dataclass(frozen=True)
class SimResult:
    delivered_msgs: int
    elapsed: float       # simulated seconds the measurement covers
    rate_msgs_per_s: float
    gross_bps: float     # counting whole Data messages
    net_bps: float       # counting payload bytes only
    losses: int
    loss_times: tuple[float, ...]
    per_face_delivered: tuple[int, ...]
    per_face_sent: tuple[int, ...]
    per_face_dropped: tuple[int, ...]
    per_face_inflight: tuple[int, ...]  # still outstanding when the run stopped
    per_face_max_pending: tuple[int, ...]  # high-water mark of in-flight
    max_window: int                     # largest effective window reached
    window_trace: tuple[tuple[float, int], ...] | None


# ---------------------------------------------------------------------------
# per-Interest face selection

def _pick(candidates, keys, rng):
    # Least key wins; exact ties fall to the lowest index, or to a seeded
    # random choice when an rng is supplied.
    best_key = min(keys)
    if rng is None:
        return candidates[keys.index(best_key)]
    tied = [c for c, k in zip(candidates, keys) if k == best_key]
    return tied[0] if len(tied) == 1 else rng.choice(tied)


def _path_rtts(faces, scenario):
    # Queue-aware round trip per path: propagation floor, or the time the
    # current backlog needs to drain, whichever dominates.  Matching the
    # per-Interest decisions to this quantity is what makes the simulated
    # splits track the analytical allocation point for point.
    return [rtt(p, faces[i].pending, rate_msgs(scenario, i))
            for i, p in enumerate(scenario.paths)]


def _select_pe(faces, rng):
    return _pick(range(len(faces)), [(f.pending,) for f in faces], rng)


def _select_re(faces, rtts, rng):
    # Lowest current round trip wins; pending then index break ties, so
    # identical paths interleave instead of piling onto one face.
    return _pick(range(len(faces)),
                 [(rtts[i], faces[i].pending) for i in range(len(faces))],
                 rng)


def _select_ug(faces, rng):
    # Stride scheduling: every dispatch grants each face credit proportional
    # to 1/srtt and the winner pays one unit, so long-run dispatch shares
    # follow the weights.  Unsampled faces borrow the best known srtt.
    known = [f.srtt for f in faces if f.srtt is not None]
    probe = min(known) if known else 1.0
    inv = [1.0 / (f.srtt if f.srtt is not None else probe) for f in faces]
    inv_sum = sum(inv)
    for f, w in zip(faces, inv):
        f.rr_credit += w / inv_sum
    i = _pick(range(len(faces)),
              [(-f.rr_credit, f.pending) for f in faces], rng)
    faces[i].rr_credit -= 1.0
    return i


def _select_cf(faces, rng):
    # An idle face has unbounded weight: take it at once.
    zeros = [i for i, f in enumerate(faces) if f.pending == 0]
    if zeros:
        return zeros[0] if rng is None or len(zeros) == 1 else rng.choice(zeros)
    inv = [1.0 / f.pending for f in faces]
    inv_sum = sum(inv)
    for f, w in zip(faces, inv):
        f.rr_credit += w / inv_sum
    i = _pick(range(len(faces)),
              [(-f.rr_credit, f.pending) for f in faces], rng)
    faces[i].rr_credit -= 1.0
    return i


def _select_fpf(faces, caps, rtts, rng):
    # Fill the quickest pipe first, but never push a face past its capacity
    # while another face still has room.  With every cap reached the Interest
    # goes out anyway (lowest round trip), which is what eventually overflows
    # a buffer and turns the window around.
    eligible = [i for i, f in enumerate(faces) if f.pending < caps[i]]
    pool = eligible if eligible else list(range(len(faces)))
    keys = [(rtts[i], faces[i].pending) for i in pool]
    return _pick(pool, keys, rng)


def _fpf_caps(faces, scenario, config):
    if config.fpf_capacity_mode == FPF_CAP_ESTIMATED:
        return [math.inf if f.est_capacity is None else f.est_capacity
                for f in faces]
    return [pipeline_capacity(p, rate_msgs(scenario, i))
            for i, p in enumerate(scenario.paths)]


def select_face(strategy: StrategyId, faces, scenario: Scenario,
                config: SimConfig, rng=None) -> int:
    """Pick the face for one outgoing Interest.

    Mutates the round-robin credits for ug/cf.  Deterministic for a given
    face state and rng state; with no rng, ties go to the lowest index.
    """
    if strategy is StrategyId.PE:
        return _select_pe(faces, rng)
    if strategy is StrategyId.RE:
        return _select_re(faces, _path_rtts(faces, scenario), rng)
    if strategy is StrategyId.UG:
        return _select_ug(faces, rng)
    if strategy is StrategyId.CF:
        return _select_cf(faces, rng)
    if strategy is StrategyId.FPF:
        return _select_fpf(faces, _fpf_caps(faces, scenario, config),
                           _path_rtts(faces, scenario), rng)
    raise ValueError(f"unknown strategy {strategy!r}")


# ---------------------------------------------------------------------------
# the simulation proper

def run(scenario: Scenario, strategy: StrategyId, config: SimConfig) -> SimResult:
    """Simulate one transfer and return its delivery statistics.

    Identical (scenario, strategy, config) always produce an identical
    result: the event queue is ordered by (time, insertion sequence) and the
    only randomness is the seeded tie-breaker.
    """
    problems = validate(scenario) + validate_config(config)
    if problems:
        raise ValueError("; ".join(problems))

    n = len(scenario.paths)
    delays = [p.delay for p in scenario.paths]
    svc = [8.0 * scenario.data_msg_bytes / p.rate_bps for p in scenario.paths]
    bufs = [p.buffer_msgs for p in scenario.paths]
    rates = [rate_msgs(scenario, i) for i in range(n)]
    two_d = [2.0 * p.delay for p in scenario.paths]
    oracle_caps = [pipeline_capacity(p, rates[i])
                   for i, p in enumerate(scenario.paths)]

    def cur_rtts():
        return [max(two_d[i], faces[i].pending / rates[i]) for i in range(n)]

    faces = [FaceState() for _ in range(n)]
    rng = random.Random(config.seed) if config.seed != 0 else None
    alpha = config.rtt_smoothing_alpha
    oracle_loss = config.loss_signal == LOSS_ORACLE
    est_mode = config.fpf_capacity_mode == FPF_CAP_ESTIMATED

    if strategy is StrategyId.PE:
        choose = lambda: _select_pe(faces, rng)
    elif strategy is StrategyId.RE:
        choose = lambda: _select_re(faces, cur_rtts(), rng)
    elif strategy is StrategyId.UG:
        choose = lambda: _select_ug(faces, rng)
    elif strategy is StrategyId.CF:
        choose = lambda: _select_cf(faces, rng)
    elif est_mode:
        choose = lambda: _select_fpf(
            faces,
            [math.inf if f.est_capacity is None else f.est_capacity
             for f in faces],
            cur_rtts(), rng)
    else:
        choose = lambda: _select_fpf(faces, oracle_caps, cur_rtts(), rng)

    # Per-face bottleneck: finish times of the Data messages it still holds
    # (head is in transmission, the rest wait in the buffer).
    queues = [deque() for _ in range(n)]

    heap = []
    push = heapq.heappush
    pop = heapq.heappop
    seq = 0

    wnd = float(config.initial_window)
    cur_w = int(wnd)
    max_w = cur_w
    in_flight = 0
    next_chunk = 0
    retx = deque()          # lost chunks go back to the front of the line
    total = config.total_chunks
    delivered = 0
    per_del = [0] * n
    per_sent = [0] * n
    per_drop = [0] * n
    max_pending = [0] * n
    losses = 0
    loss_times = []
    r_srtt = None           # receiver-level smoothed RTT, times loss rounds
    absorb_until = -1.0     # drops before this instant share one halving
    fallback_absorb = 2.0 * max(delays)
    trace = [(0.0, cur_w)] if config.trace_window else None
    live = set() if not oracle_loss else None  # outstanding Interest instances

    def note_window(now):
        nonlocal cur_w, max_w
        w = int(wnd)
        if w != cur_w:
            cur_w = w
            if w > max_w:
                max_w = w
            if trace is not None:
                trace.append((now, w))

    def dispatch(now):
        nonlocal seq, in_flight, next_chunk
        while in_flight < cur_w:
            if retx:
                chunk = retx.popleft()
            elif total is None or next_chunk < total:
                chunk = next_chunk
                next_chunk += 1
            else:
                break
            i = choose()
            faces[i].pending += 1
            if faces[i].pending > max_pending[i]:
                max_pending[i] = faces[i].pending
            in_flight += 1
            per_sent[i] += 1
            inst = seq
            push(heap, (now + delays[i], seq, _EV_QUEUE, i, chunk, now, inst))
            seq += 1
            if not oracle_loss:
                live.add(inst)
                rto = _RTO_FACTOR * (r_srtt if r_srtt is not None
                                     else fallback_absorb + svc[i])
                push(heap, (now + rto, seq, _EV_TIMEOUT, i, chunk, now, inst))
                seq += 1

    def register_loss(now, i, chunk):
        nonlocal losses, in_flight, wnd
        losses += 1
        loss_times.append(now)
        per_drop[i] += 1
        f = faces[i]
        if est_mode:
            f.est_capacity = _EST_GUARD * f.pending
        f.pending -= 1
        in_flight -= 1
        retx.appendleft(chunk)
        if now >= absorb_until:
            _halve(now)
        dispatch(now)

    def _halve(now):
        nonlocal wnd, absorb_until
        wnd = float(max(1, int(wnd / 2.0)))
        absorb_until = now + (r_srtt if r_srtt is not None else fallback_absorb)
        note_window(now)

    dispatch(0.0)
    end = config.duration  # None while running to a chunk target
    now = 0.0

    while heap:
        ev = pop(heap)
        t = ev[0]
        if end is not None and t > end:
            now = end
            break
        now = t
        kind = ev[2]
        if kind == _EV_QUEUE:
            i = ev[3]
            q = queues[i]
            while q and q[0] <= t:  # finished transmissions free their slot first
                q.popleft()
            if not q:
                fin = t + svc[i]
            elif len(q) >= bufs[i]:
                # Buffer full: drop-tail.  The message in transmission still
                # holds its slot until it finishes, so a path sustains at most
                # 2·delay·rate + buffer in flight, the pipeline capacity.
                if oracle_loss:
                    register_loss(t, i, ev[4])
                # under the timeout signal the loss stays silent until the
                # timer fires
                continue
            else:
                fin = q[-1] + svc[i]
            q.append(fin)
            push(heap, (fin + delays[i], seq, _EV_DATA, i, ev[4], ev[5], ev[6]))
            seq += 1
        elif kind == _EV_DATA:
            i = ev[3]
            if not oracle_loss:
                if ev[6] in live:
                    live.discard(ev[6])
                else:
                    # written off by its timer; the late Data still counts as
                    # a delivery but its Interest was already released
                    delivered += 1
                    per_del[i] += 1
                    if total is not None and delivered >= total:
                        break
                    continue
            f = faces[i]
            f.pending -= 1
            in_flight -= 1
            delivered += 1
            per_del[i] += 1
            sample = t - ev[5]
            f.srtt = sample if f.srtt is None else \
                f.srtt + alpha * (sample - f.srtt)
            r_srtt = sample if r_srtt is None else \
                r_srtt + alpha * (sample - r_srtt)
            wnd += 1.0 / wnd
            note_window(t)
            if total is not None and delivered >= total:
                break
            dispatch(t)
        else:  # _EV_TIMEOUT
            if ev[6] in live:
                live.discard(ev[6])
                register_loss(t, ev[3], ev[4])

    elapsed = config.duration if config.duration is not None else now
    rate = delivered / elapsed
    return SimResult(
        delivered_msgs=delivered,
        elapsed=elapsed,
        rate_msgs_per_s=rate,
        gross_bps=rate * 8.0 * scenario.data_msg_bytes,
        net_bps=rate * 8.0 * scenario.payload_bytes,
        losses=losses,
        loss_times=tuple(loss_times),
        per_face_delivered=tuple(per_del),
        per_face_sent=tuple(per_sent),
        per_face_dropped=tuple(per_drop),
        per_face_inflight=tuple(f.pending for f in faces),
        per_face_max_pending=tuple(max_pending),
        max_window=max_w,
        window_trace=tuple(trace) if trace is not None else None)


@dataclass(frozen=True)
class SimSweepPoint:
    value: float             # the varied parameter, SI units
    result: SimResult | None
    error: str | None


def sweep_sim(scenario: Scenario, strategy: StrategyId, path_index: int,
              param: str, values, config: SimConfig) -> list[SimSweepPoint]:
    """run() across variations of one path parameter ('delay' in s or 'rate'
    in bits/s), each point on a fresh simulator; failures are reported in
    place instead of aborting the sweep."""
    points = []
    for v in values:
        varied = scenario_with(scenario, path_index, param, v)
        try:
            points.append(SimSweepPoint(v, run(varied, strategy, config), None))
        except ValueError as exc:
            points.append(SimSweepPoint(v, None, str(exc)))
    return points


def halving_points(trace):
    """(peak, post-halving) window pairs read from a window trace."""
    pairs = []
    for k in range(1, len(trace)):
        if trace[k][1] < trace[k - 1][1]:
            pairs.append((trace[k - 1][1], trace[k][1]))
    return pairs
