"""Event-driven simulation of one multicast packet epoch under three schemes.

clustering
    The BS broadcasts once.  Members that miss the packet recover it from
    their own cluster over a shared per-cluster channel: missing members
    contend (slotted CSMA/CA backoff) to send a short request; hearing a
    request for a packet they also miss, other members hold their own
    requests and wait for the reply.  Members that hold the packet contend
    to send one relayed copy; one completed reply answers the request and
    every overhearing missing member may cache it.  Members whose reception
    of the reply failed re-enter contention with a new request.

benchmark
    The BS re-broadcasts until every member has the packet; each newly
    served member returns an ACK (serialized after the broadcast slot).

rnc
    The BS streams random-network-coded packets; a member needs any
    `rnc_generation_size` coded receptions to decode the generation, and a
    single terminal ACK round closes the epoch.

Per-cluster channels are isolated from each other and from the BS downlink.
Collided frames occupy the channel and are lost; frame headers are assumed
short enough that any non-collided frame is always decodable, so request
and reply suppression never fails.  Data receptions are decided by drawing
Rayleigh fading against the SNR threshold.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field

import numpy as np

from .channel import LinkKind, RadioParams, reception_success
from .errors import IntegrityError, ParameterError
from .geometry import Topology

PACKET_ID = 0  # single-packet epochs; RNC events carry coded-packet indices


@dataclass(frozen=True)
class SimParams:
    """Protocol timing and MAC constants (times in ms)."""

    packet_len_ms: float = 10.0
    t_req_ms: float = 1.0
    t_ack_ms: float = 1.0
    slot_ms: float = 0.009
    cw_min: int = 16
    cw_max: int = 64
    max_time_ms: float = 10_000.0
    rnc_generation_size: int = 8
    opportunistic_caching: bool = True

    def __post_init__(self):
        if self.packet_len_ms <= 0 or self.t_req_ms < 0 or self.t_ack_ms < 0:
            raise ParameterError("packet_len_ms must be positive, "
                                 "t_req_ms and t_ack_ms non-negative")
        if self.slot_ms <= 0:
            raise ParameterError(f"slot_ms must be positive, got {self.slot_ms}")
        if not (1 <= self.cw_min <= self.cw_max):
            raise ParameterError(
                f"need 1 <= cw_min <= cw_max, got {self.cw_min}, {self.cw_max}")
        if self.max_time_ms <= 0:
            raise ParameterError(f"max_time_ms must be positive, got {self.max_time_ms}")
        if self.rnc_generation_size < 1:
            raise ParameterError(
                f"rnc_generation_size must be >= 1, got {self.rnc_generation_size}")


class EventKind(enum.Enum):
    BS_BROADCAST_END = "bs_broadcast_end"
    REQUEST_TX_END = "request_tx_end"
    REPLY_TX_END = "reply_tx_end"
    BACKOFF_EXPIRY = "backoff_expiry"
    ACK_RX_END = "ack_rx_end"


@dataclass(frozen=True)
class Event:
    """One timestamped protocol event; actor -1 denotes the base station."""

    time_ms: float
    kind: EventKind
    actor: int
    packet_id: int
    cluster_id: int
    collided: bool = False


@dataclass
class UavState:
    """Per-member protocol state inside one epoch.

    The suppression sets record which packet ids this member has withheld a
    request (or reply) for after overhearing traffic; they only ever grow
    within an epoch.
    """

    received: set[int] = field(default_factory=set)
    pending_request: int | None = None
    backoff_cw: int = 16
    suppressed_requests: set[int] = field(default_factory=set)
    suppressed_replies: set[int] = field(default_factory=set)


@dataclass
class MediumState:
    """Busy horizon of one shared channel; transmissions must serialize."""

    busy_until_ms: float = 0.0

    def occupy(self, start_ms: float, end_ms: float) -> None:
        if start_ms < self.busy_until_ms - 1e-9:
            raise IntegrityError(
                f"channel occupied at {start_ms} ms until {self.busy_until_ms} ms")
        self.busy_until_ms = end_ms


@dataclass
class SchemeOutcome:
    """Result of one epoch: per-member delivery records and traffic counts.

    `delivery_time_ms` is NaN where `undelivered` is set.  `via_broadcast`
    marks members served directly by the first BS transmission.  Counters
    include collided frames (they occupied the channel).
    """

    scheme: str
    delivery_time_ms: np.ndarray
    undelivered: np.ndarray
    via_broadcast: np.ndarray
    cluster_ids: np.ndarray
    bs_transmissions: int
    uav_transmissions: int
    control_messages: int
    events: list[Event] | None = None

    @property
    def n_uavs(self) -> int:
        return int(self.delivery_time_ms.size)

    @property
    def delivered(self) -> np.ndarray:
        return ~self.undelivered


def _default_broadcast_model(radio: RadioParams):
    def model(distances: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return np.atleast_1d(reception_success(
            radio.p_bs_mw, distances, LinkKind.BS_TO_UAV, radio, rng))
    return model


def _default_peer_model(radio: RadioParams):
    def model(distances: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return np.atleast_1d(reception_success(
            radio.p_uav_mw, distances, LinkKind.UAV_TO_UAV, radio, rng))
    return model


def _flatten(topology: Topology):
    """Member coordinates, cluster ids, and 3D distances to the BS."""
    xy = topology.members_xy()
    cluster_of = topology.cluster_index()
    bs = topology.bs_position
    if xy.shape[0]:
        heights = np.concatenate([
            np.full(c.n_members, c.center.height) for c in topology.clusters])
    else:
        heights = np.empty(0)
    d_bs = np.sqrt((xy[:, 0] - bs.planar.x) ** 2
                   + (xy[:, 1] - bs.planar.y) ** 2
                   + (heights - bs.height) ** 2)
    return xy, cluster_of, d_bs


class _EpochLog:
    """Collects events when enabled; appends are cheap no-ops otherwise."""

    def __init__(self, enabled: bool):
        self.events: list[Event] | None = [] if enabled else None

    def add(self, *args, **kwargs) -> None:
        if self.events is not None:
            self.events.append(Event(*args, **kwargs))

    def finish(self) -> list[Event] | None:
        if self.events is None:
            return None
        return sorted(self.events, key=lambda e: e.time_ms)


def _contend(contenders, states, medium, t, airtime_ms, sim, rng, log, kind,
             cluster_id, packet_id, counters, counter_key):
    """Run one backoff contention until a frame of `airtime_ms` gets through.

    Every contender draws a uniform slot from its own window and counts
    down; the earliest transmits.  Ties collide: the frames burn the
    airtime, the colliders double their windows and redraw, while everyone
    else freezes its residual count during the burst and resumes after it
    (802.11-style).  Returns (winner, end time), or (None, t) once the next
    attempt would run past max_time_ms.
    """
    residual = {u: int(rng.integers(0, states[u].backoff_cw)) for u in contenders}
    while True:
        slot = min(residual.values())
        winners = [u for u in contenders if residual[u] == slot]
        start = t + slot * sim.slot_ms
        end = start + airtime_ms
        if end > sim.max_time_ms:
            return None, t
        medium.occupy(start, end)
        counters[counter_key] += len(winners)
        collided = len(winners) > 1
        for u in winners:
            log.add(start, EventKind.BACKOFF_EXPIRY, u, packet_id, cluster_id)
            log.add(end, kind, u, packet_id, cluster_id, collided)
        if not collided:
            states[winners[0]].backoff_cw = sim.cw_min
            return winners[0], end
        for u in contenders:
            if residual[u] == slot:
                states[u].backoff_cw = min(states[u].backoff_cw * 2, sim.cw_max)
                residual[u] = int(rng.integers(0, states[u].backoff_cw))
            else:
                residual[u] -= slot
        t = end


def run_clustering_scheme(topology: Topology, radio: RadioParams,
                          sim: SimParams, rng: np.random.Generator, *,
                          collect_events: bool = False,
                          broadcast_success=None,
                          peer_success=None) -> SchemeOutcome:
    """One epoch of the clustering recovery scheme.

    `broadcast_success` and `peer_success` are (distances, rng) -> bool
    array hooks; tests inject deterministic links through them.  Cluster
    channels run independently, so recovery timelines overlap across
    clusters while staying serialized within each cluster.
    """
    if broadcast_success is None:
        broadcast_success = _default_broadcast_model(radio)
    if peer_success is None:
        peer_success = _default_peer_model(radio)
    xy, cluster_of, d_bs = _flatten(topology)
    n = xy.shape[0]
    log = _EpochLog(collect_events)
    delivery = np.full(n, np.nan)
    undelivered = np.zeros(n, dtype=bool)
    via_broadcast = np.zeros(n, dtype=bool)
    counters = {"bs": 0, "uav": 0, "control": 0}
    states = [UavState(backoff_cw=sim.cw_min) for _ in range(n)]

    counters["bs"] += 1
    t_bcast = sim.packet_len_ms
    log.add(t_bcast, EventKind.BS_BROADCAST_END, -1, PACKET_ID, -1)
    got = (broadcast_success(d_bs, rng) if n else
           np.zeros(0, dtype=bool))
    for u in np.flatnonzero(got):
        states[u].received.add(PACKET_ID)
    delivery[got] = t_bcast
    via_broadcast[got] = True

    for cid in range(len(topology.clusters)):
        members = np.flatnonzero(cluster_of == cid)
        missing = [int(u) for u in members if not got[u]]
        if not missing:
            continue
        holders = [int(u) for u in members if got[u]]
        for u in missing:
            states[u].pending_request = PACKET_ID
        if not holders:
            undelivered[missing] = True
            continue
        medium = MediumState()
        t = t_bcast
        while missing:
            requester, t = _contend(sorted(missing), states, medium, t,
                                    sim.t_req_ms, sim, rng, log,
                                    EventKind.REQUEST_TX_END, cid, PACKET_ID,
                                    counters, "control")
            if requester is None:
                break
            for u in missing:
                if u != requester:
                    states[u].suppressed_requests.add(PACKET_ID)
            replier, t = _contend(sorted(holders), states, medium, t,
                                  sim.packet_len_ms, sim, rng, log,
                                  EventKind.REPLY_TX_END, cid, PACKET_ID,
                                  counters, "uav")
            if replier is None:
                break
            for h in holders:
                if h != replier:
                    states[h].suppressed_replies.add(PACKET_ID)
            listeners = (sorted(missing) if sim.opportunistic_caching
                         else [requester])
            dist = np.hypot(xy[listeners, 0] - xy[replier, 0],
                            xy[listeners, 1] - xy[replier, 1])
            ok = peer_success(dist, rng)
            for u, success in zip(listeners, ok):
                if success:
                    states[u].received.add(PACKET_ID)
                    states[u].pending_request = None
                    delivery[u] = t
                    missing.remove(u)
                    holders.append(u)
        if missing:
            undelivered[missing] = True

    return SchemeOutcome(
        scheme="clustering", delivery_time_ms=delivery, undelivered=undelivered,
        via_broadcast=via_broadcast, cluster_ids=cluster_of,
        bs_transmissions=counters["bs"], uav_transmissions=counters["uav"],
        control_messages=counters["control"], events=log.finish())


def run_ack_benchmark(topology: Topology, radio: RadioParams, sim: SimParams,
                      rng: np.random.Generator, *,
                      collect_events: bool = False,
                      broadcast_success=None) -> SchemeOutcome:
    """One epoch of the retransmission benchmark.

    The BS repeats the broadcast until all members are served (or time runs
    out); after each round the newly served members send one ACK each,
    serialized on the uplink.
    """
    if broadcast_success is None:
        broadcast_success = _default_broadcast_model(radio)
    xy, cluster_of, d_bs = _flatten(topology)
    n = xy.shape[0]
    log = _EpochLog(collect_events)
    delivery = np.full(n, np.nan)
    via_broadcast = np.zeros(n, dtype=bool)
    counters = {"bs": 0, "uav": 0, "control": 0}
    unserved = np.ones(n, dtype=bool)
    t = 0.0
    rounds = 0
    while unserved.any() and t + sim.packet_len_ms <= sim.max_time_ms:
        rounds += 1
        counters["bs"] += 1
        t += sim.packet_len_ms
        log.add(t, EventKind.BS_BROADCAST_END, -1, PACKET_ID, -1)
        idx = np.flatnonzero(unserved)
        ok = broadcast_success(d_bs[idx], rng)
        newly = idx[ok]
        delivery[newly] = t
        via_broadcast[newly] = rounds == 1
        unserved[newly] = False
        for u in newly:
            t += sim.t_ack_ms
            counters["control"] += 1
            log.add(t, EventKind.ACK_RX_END, int(u), PACKET_ID,
                    int(cluster_of[u]))
    return SchemeOutcome(
        scheme="benchmark", delivery_time_ms=delivery,
        undelivered=unserved.copy(), via_broadcast=via_broadcast,
        cluster_ids=cluster_of, bs_transmissions=counters["bs"],
        uav_transmissions=counters["uav"],
        control_messages=counters["control"], events=log.finish())


def run_rnc_scheme(topology: Topology, radio: RadioParams, sim: SimParams,
                   rng: np.random.Generator, *,
                   collect_events: bool = False,
                   broadcast_success=None) -> SchemeOutcome:
    """One epoch of the random-network-coding baseline.

    The BS streams coded packets; any `rnc_generation_size` receptions let a
    member decode the whole generation (large-field assumption, so every
    received coded packet is innovative).  `delivery_time_ms` records the
    decode instant of the generation; per-packet figures subtract the
    streaming amortization (generation_size - 1) * packet_len_ms downstream.
    One terminal ACK per member closes a completed epoch.
    """
    if broadcast_success is None:
        broadcast_success = _default_broadcast_model(radio)
    xy, cluster_of, d_bs = _flatten(topology)
    n = xy.shape[0]
    g = sim.rnc_generation_size
    log = _EpochLog(collect_events)
    delivery = np.full(n, np.nan)
    via_broadcast = np.zeros(n, dtype=bool)
    counters = {"bs": 0, "uav": 0, "control": 0}
    received_counts = np.zeros(n, dtype=int)
    t = 0.0
    while n and (received_counts < g).any() \
            and t + sim.packet_len_ms <= sim.max_time_ms:
        coded_id = counters["bs"]
        counters["bs"] += 1
        t += sim.packet_len_ms
        log.add(t, EventKind.BS_BROADCAST_END, -1, coded_id, -1)
        idx = np.flatnonzero(received_counts < g)
        ok = broadcast_success(d_bs[idx], rng)
        received_counts[idx[ok]] += 1
        done = idx[ok][received_counts[idx[ok]] == g]
        delivery[done] = t
        via_broadcast[done] = True
    undelivered = received_counts < g
    if n and not undelivered.any():
        for u in range(n):
            t += sim.t_ack_ms
            counters["control"] += 1
            log.add(t, EventKind.ACK_RX_END, u, PACKET_ID, int(cluster_of[u]))
    return SchemeOutcome(
        scheme="rnc", delivery_time_ms=delivery, undelivered=undelivered,
        via_broadcast=via_broadcast, cluster_ids=cluster_of,
        bs_transmissions=counters["bs"], uav_transmissions=counters["uav"],
        control_messages=counters["control"], events=log.finish())


SCHEME_RUNNERS = {
    "clustering": run_clustering_scheme,
    "benchmark": run_ack_benchmark,
    "rnc": run_rnc_scheme,
}


def write_event_log(path, events: list[Event]) -> None:
    """Serialize events as CSV: time,actor,event_kind,packet_id,cluster_id."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time", "actor", "event_kind", "packet_id", "cluster_id"])
        for e in events:
            writer.writerow([f"{e.time_ms:.9g}", e.actor, e.kind.value,
                             e.packet_id, e.cluster_id])
