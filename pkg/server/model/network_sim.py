"""
Token-level discrete-event simulation of the Swallow interconnect

Messages travel as worms: a worm owns each channel from the moment its first
token is granted the channel until its close token passes, and a token only
enters a link when the channel's downstream buffer has a free credit. Packet
mode frames every packet with a three token header and a close token. Circuit
mode opens the route once per channel end and keeps it until the last send
of that channel.
"""

import heapq
import logging
from collections import defaultdict
from collections.abc import Iterable, Sequence
from typing import Literal, NamedTuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..errors import (
    InvalidArgumentError,
    NotFoundError,
    SimulationDeadlockError,
    TrafficValidationError,
)
from .routing import Channel, Route, RoutingTables, route
from .topology import LinkClass, LinkSpec, NodeId, Topology

logger = logging.getLogger(__name__)

Mode = Literal["packet", "circuit"]
TokenKind = Literal["data", "header", "end_of_packet", "control"]
HEADER_TOKENS = 3
BITS_PER_TOKEN = 8


class NetworkParams(BaseModel):
    """Clocking, buffering and overhead constants of the network"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    clock_mhz: float = Field(default=500.0, gt=0)
    framing_cycles: int = Field(default=1, ge=0)
    buffer_depth: int = Field(default=8, ge=1)
    switch_delay_cycles: int = Field(default=3, ge=0)
    interface_delay_cycles: int = Field(default=3, ge=0)
    sync_overhead_ns: float = Field(default=260.0, ge=0)
    packet_payload_bytes: int = Field(default=27, ge=1)

    @property
    def cycle_ns(self) -> float:
        return 1000.0 / self.clock_mhz

    @property
    def instruction_ns(self) -> float:
        """One instruction slot of a single thread (four-stage pipeline)"""
        return 4 * self.cycle_ns


class Token(NamedTuple):
    kind: TokenKind
    payload: int = 0


class ChannelEnd(BaseModel):
    """Sending end of a channel between two cores"""

    model_config = ConfigDict(frozen=True)

    owner: NodeId
    id: int = 0
    mode: Mode = "packet"
    peer: NodeId | None = None

    def __str__(self) -> str:
        return f"{self.owner}->{self.peer}#{self.id}/{self.mode}"


class TrafficEntry(BaseModel):
    """One timed send request"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    time_ns: float = Field(ge=0)
    src: NodeId
    dst: NodeId
    bytes: int = Field(ge=0)
    mode: Mode = "packet"
    channel: int = Field(default=0, ge=0)
    established: bool = False
    reply_bytes: int | None = Field(default=None, ge=0)
    service_ns: float = Field(default=0.0, ge=0)

    @property
    def channel_end(self) -> ChannelEnd:
        return ChannelEnd(owner=self.src, id=self.channel, mode=self.mode, peer=self.dst)


class LinkState(BaseModel):
    """Snapshot of one link direction at the end of a run"""

    busy_until: float = 0.0
    credits: int = 0
    held_by: str | None = None


class MessageRecord(BaseModel):
    index: int
    channel: str
    src: str
    dst: str
    mode: Mode
    bytes: int
    injected_ns: float
    delivered_ns: float | None = None
    latency_ns: float | None = None
    blocked_ns: float = 0.0
    hops: int = 0
    reply_of: int | None = None


class ChannelStats(BaseModel):
    delivered_bytes: int = 0
    data_tokens: int = 0
    first_data_ns: float | None = None
    last_data_ns: float | None = None


class LinkUsage(BaseModel):
    link: int
    link_class: LinkClass
    rate_bps: float
    busy_ns: float = 0.0
    tokens: int = 0
    bits: int = 0


class SimReport(BaseModel):
    """Aggregate outcome of one simulation run"""

    wall_ns: float = 0.0
    node_count: int = 0
    horizon_ns: float | None = None
    injected_bytes: int = 0
    delivered_bytes: int = 0
    in_flight_bytes: int = 0
    channels: dict[str, ChannelStats] = {}
    messages: list[MessageRecord] = []
    links: dict[int, LinkUsage] = {}
    node_blocked_ns: dict[int, float] = {}
    node_active_ns: dict[int, float] = {}
    max_buffer_occupancy: int = 0
    buffer_depth: int = 0
    link_states: dict[str, LinkState] = {}

    @property
    def delivered_per_channel(self) -> dict[str, int]:
        return {k: v.delivered_bytes for k, v in self.channels.items()}

    def conserved(self) -> bool:
        return self.injected_bytes == self.delivered_bytes + self.in_flight_bytes


def token_time(link: LinkSpec, params: NetworkParams | None = None) -> int:
    """Switch cycles one token occupies a link: 3Ts + Tt plus the framing cycle"""
    params = params or NetworkParams()
    return 3 * link.symbol_delay + link.token_delay + params.framing_cycles


def token_ns(link: LinkSpec, params: NetworkParams | None = None) -> float:
    params = params or NetworkParams()
    return token_time(link, params) * params.cycle_ns


def effective_rate_bps(link: LinkSpec, params: NetworkParams | None = None) -> float:
    """Raw token throughput of a link in bits per second"""
    return BITS_PER_TOKEN / token_ns(link, params) * 1e9


def instructions_for(ns: float, params: NetworkParams | None = None) -> float:
    """How many instructions the sending thread could issue in ``ns``"""
    params = params or NetworkParams()
    return ns / params.instruction_ns


class _Hop:
    __slots__ = ("channel", "link", "busy_key", "token_ns")

    def __init__(self, channel: Channel, link: int, busy_key: tuple[int, int], token_ns: float):
        self.channel = channel
        self.link = link
        self.busy_key = busy_key
        self.token_ns = token_ns


class _Worm:
    """Tokens that share one channel reservation along a route"""

    def __init__(self, wid: int, owner: str, hops: list[_Hop], opens: bool, src: int):
        self.id = wid
        self.owner = owner
        self.hops = hops
        self.opens = opens
        self.src = src
        self.tokens: list[Token] = []
        self.msg_of: list[int] = []
        self.last_of_msg: dict[int, int] = {}
        self.first_of_msg: dict[int, int] = {}
        self.arrive: list[list[float]] = [[] for _ in hops]
        self.sent = [0] * len(hops)
        self.pending = [False] * len(hops)
        self.delivered = 0
        self.closes = False

    def complete(self) -> bool:
        return self.closes and self.delivered == len(self.tokens)


class _ChannelState:
    __slots__ = ("held_by", "occupancy", "waiters", "credit_waiters")

    def __init__(self) -> None:
        self.held_by: str | None = None
        self.occupancy = 0
        self.waiters: list[tuple[_Worm, int]] = []
        self.credit_waiters: list[tuple[_Worm, int]] = []


class NetworkSimulator:
    """One run's mutable state. Not shared between threads; build one per run."""

    def __init__(
        self,
        topology: Topology,
        tables: RoutingTables,
        params: NetworkParams | None = None,
    ):
        if tables.topology is not topology and (
            tables.topology.node_count != topology.node_count
            or tables.topology.wiring != topology.wiring
        ):
            raise TrafficValidationError("routing tables were built for a different machine")
        self.topology = topology
        self.tables = tables
        self.params = params or NetworkParams()
        self._queue: list[tuple[float, int, str, object, int]] = []
        self._seq = 0
        self._now = 0.0
        self._channels: dict[Channel, _ChannelState] = defaultdict(_ChannelState)
        self._busy: dict[tuple[int, int], float] = defaultdict(float)
        self._iface_free: dict[int, float] = defaultdict(float)
        self._streams: dict[str, _Worm] = {}
        self._worms: list[_Worm] = []
        self._rr: dict[tuple[int, str], int] = defaultdict(int)
        self._report = SimReport(
            node_count=topology.node_count, buffer_depth=self.params.buffer_depth
        )
        self._intervals: dict[int, list[tuple[float, float]]] = defaultdict(list)
        self._routes: dict[tuple[int, int], Route] = {}
        self._last_circuit_msg: dict[str, int] = {}
        self._entries: list[TrafficEntry] = []
        self._reply_of: dict[int, int] = {}
        self._packets_left: dict[int, int] = {}

    def _push(self, at: float, kind: str, obj: object, arg: int = 0) -> None:
        self._seq += 1
        heapq.heappush(self._queue, (at, self._seq, kind, obj, arg))

    def validate(self, traffic: Sequence[TrafficEntry]) -> None:
        """Reject traffic that names missing nodes or cannot be routed"""
        for i, entry in enumerate(traffic):
            try:
                src = self.topology.index_of(entry.src)
                dst = self.topology.index_of(entry.dst)
            except NotFoundError as e:
                raise TrafficValidationError(f"traffic entry {i}: {e}") from e
            if src != dst:
                self._route(src, dst)
                if entry.reply_bytes is not None:
                    self._route(dst, src)

    def _route(self, src: int, dst: int) -> Route:
        key = (src, dst)
        if key not in self._routes:
            nodes = self.topology.nodes
            self._routes[key] = route(self.tables, nodes[src], nodes[dst])
        return self._routes[key]

    def run(self, traffic: Sequence[TrafficEntry], until_ns: float | None = None) -> SimReport:
        self.validate(traffic)
        self._entries = list(traffic)
        # injection order is (time, index); the close token rides on the last send in that order
        for i, entry in sorted(enumerate(self._entries), key=lambda p: (p[1].time_ns, p[0])):
            if entry.mode == "circuit":
                self._last_circuit_msg[str(entry.channel_end)] = i
            self._push(entry.time_ns, "inject", entry, i)
        logger.debug(f"Simulating {len(self._entries)} traffic entries")

        while self._queue:
            at, _, kind, obj, arg = self._queue[0]
            if until_ns is not None and at > until_ns:
                break
            heapq.heappop(self._queue)
            self._now = at
            if kind == "inject":
                self._inject(obj, arg)  # type: ignore[arg-type]
            elif kind == "attempt":
                self._attempt(obj, arg)  # type: ignore[arg-type]
            else:
                self._deliver(obj, arg)  # type: ignore[arg-type]

        if until_ns is None:
            stuck = [w for w in self._worms if not w.complete()]
            if stuck:
                detail = "; ".join(
                    f"worm {w.id} ({w.owner}) delivered {w.delivered}/{len(w.tokens)} tokens"
                    for w in stuck[:5]
                )
                raise SimulationDeadlockError(f"event queue drained with {len(stuck)} worms in the network: {detail}")
        return self._finish(until_ns)

    def _record(self, entry: TrafficEntry, index: int, reply_of: int | None) -> MessageRecord:
        rec = MessageRecord(
            index=index,
            channel=str(entry.channel_end),
            src=str(entry.src),
            dst=str(entry.dst),
            mode=entry.mode,
            bytes=entry.bytes,
            injected_ns=self._now,
            reply_of=reply_of,
        )
        self._report.messages.append(rec)
        self._report.injected_bytes += entry.bytes
        self._report.channels.setdefault(rec.channel, ChannelStats())
        return rec

    def _inject(self, entry: TrafficEntry, index: int) -> None:
        msg_id = len(self._report.messages)
        rec = self._record(entry, index, self._reply_of.get(index))
        src = self.topology.index_of(entry.src)
        dst = self.topology.index_of(entry.dst)

        if src == dst:
            done = self._now + (2 + entry.bytes) * self.params.instruction_ns
            self._push(done, "deliver", None, msg_id)
            return

        path = self._route(src, dst)
        rec.hops = len(path.hops)
        key = rec.channel
        if entry.mode == "packet":
            payload = self.params.packet_payload_bytes
            sizes = [min(payload, entry.bytes - k) for k in range(0, entry.bytes, payload)] or [0]
            self._packets_left[msg_id] = len(sizes)
            for size in sizes:
                worm = self._new_worm(f"pkt{len(self._worms)}", path, opens=True, src=src)
                self._frame(worm, msg_id, size, header=True, close=True)
            return

        worm = self._streams.get(key)
        first = worm is None
        if worm is None:
            worm = self._new_worm(key, path, opens=not entry.established, src=src, circuit=True)
            self._streams[key] = worm
        last = self._last_circuit_msg.get(key) == index
        self._frame(worm, msg_id, entry.bytes, header=first and not entry.established, close=last)

    def _new_worm(self, owner: str, path: Route, opens: bool, src: int, circuit: bool = False) -> _Worm:
        hops = []
        for hop in path.hops:
            link_id = self._pick_link(hop.link, circuit)
            link = self.topology.link_by_id[link_id]
            hops.append(
                _Hop(
                    (link_id, hop.direction, hop.lane),
                    link_id,
                    (link_id, hop.direction),
                    token_ns(link, self.params),
                )
            )
        worm = _Worm(len(self._worms), owner, hops, opens, src)
        self._worms.append(worm)
        return worm

    def _pick_link(self, link_id: int, circuit: bool) -> int:
        """Round-robin over parallel links when a circuit is set up"""
        link = self.topology.link_by_id[link_id]
        if not circuit:
            return link_id
        a = self.topology.index_of(link.a)
        parallel = [
            i
            for i in self.topology.port_links[a].get(link.a_port, [])
            if self.topology.link_by_id[i].b == link.b
        ]
        if len(parallel) < 2:
            return link_id
        slot = (a, link.a_port)
        choice = parallel[self._rr[slot] % len(parallel)]
        self._rr[slot] += 1
        return choice

    def _frame(self, worm: _Worm, msg_id: int, size: int, header: bool, close: bool) -> None:
        kinds: list[Token] = []
        if header:
            kinds += [Token("header", b) for b in range(HEADER_TOKENS)]
        kinds += [Token("data", k & 0xFF) for k in range(size)]
        if close:
            kinds.append(Token("end_of_packet"))
            worm.closes = True
        if not kinds:
            rec = self._report.messages[msg_id]
            self._finish_message(rec, msg_id)
            return

        start = len(worm.tokens)
        worm.tokens += kinds
        worm.msg_of += [msg_id] * len(kinds)
        worm.first_of_msg.setdefault(msg_id, start)
        # a message is out once its last data byte is; framing-only ones on their last token
        last = start + len(kinds) - 1 - int(close and size > 0)
        worm.last_of_msg[msg_id] = last

        cycle = self.params.cycle_ns
        ready = self._now + self.params.interface_delay_cycles * cycle
        for _ in kinds:
            at = max(ready, self._iface_free[worm.src])
            self._iface_free[worm.src] = at + cycle
            worm.arrive[0].append(at)
        if not worm.pending[0]:
            worm.pending[0] = True
            self._push(worm.arrive[0][worm.sent[0]], "attempt", worm, 0)

    def _attempt(self, worm: _Worm, j: int) -> None:
        i = worm.sent[j]
        if i >= len(worm.arrive[j]):
            worm.pending[j] = False
            return
        if worm.arrive[j][i] > self._now:
            self._push(worm.arrive[j][i], "attempt", worm, j)
            return
        hop = worm.hops[j]
        state = self._channels[hop.channel]

        if state.held_by != worm.owner:
            if state.held_by is None and (i == 0 or not worm.opens):
                state.held_by = worm.owner
            else:
                if (worm, j) not in state.waiters:
                    state.waiters.append((worm, j))
                return

        if state.occupancy >= self.params.buffer_depth:
            state.credit_waiters.append((worm, j))
            return

        free_at = self._busy[hop.busy_key]
        if free_at > self._now:
            self._push(free_at, "attempt", worm, j)
            return

        # commit token i onto hop j
        self._busy[hop.busy_key] = self._now + hop.token_ns
        state.occupancy += 1
        self._report.max_buffer_occupancy = max(self._report.max_buffer_occupancy, state.occupancy)
        self._use_link(hop)
        worm.sent[j] += 1
        msg_id = worm.msg_of[i]
        if worm.first_of_msg.get(msg_id) == i:
            self._report.messages[msg_id].blocked_ns += self._now - worm.arrive[j][i]
        if j > 0:
            self._free_credit(worm.hops[j - 1].channel)

        token = worm.tokens[i]
        if token.kind == "end_of_packet":
            self._release(state)

        arrival = self._now + hop.token_ns + self.params.switch_delay_cycles * self.params.cycle_ns
        if j + 1 < len(worm.hops):
            worm.arrive[j + 1].append(arrival)
            if not worm.pending[j + 1]:
                worm.pending[j + 1] = True
                self._push(arrival, "attempt", worm, j + 1)
        else:
            self._push(arrival, "deliver", worm, i)

        if worm.sent[j] < len(worm.arrive[j]):
            self._push(max(self._now, worm.arrive[j][worm.sent[j]]), "attempt", worm, j)
        else:
            worm.pending[j] = False

    def _use_link(self, hop: _Hop) -> None:
        usage = self._report.links.get(hop.link)
        if usage is None:
            link = self.topology.link_by_id[hop.link]
            usage = LinkUsage(link=hop.link, link_class=link.link_class, rate_bps=link.rate_bps)
            self._report.links[hop.link] = usage
        usage.busy_ns += hop.token_ns
        usage.tokens += 1
        usage.bits += BITS_PER_TOKEN

    def _free_credit(self, channel: Channel) -> None:
        state = self._channels[channel]
        state.occupancy -= 1
        if state.credit_waiters:
            waiter, hop = state.credit_waiters.pop(0)
            self._push(self._now, "attempt", waiter, hop)

    def _release(self, state: _ChannelState) -> None:
        """Close token has passed: hand the channel to the next waiting worm"""
        state.held_by = None
        if state.waiters:
            waiter, hop = state.waiters.pop(0)
            state.held_by = waiter.owner
            self._push(self._now, "attempt", waiter, hop)

    def _deliver(self, worm: _Worm | None, arg: int) -> None:
        if worm is None:
            rec = self._report.messages[arg]
            self._report.delivered_bytes += rec.bytes
            stats = self._report.channels[rec.channel]
            stats.delivered_bytes += rec.bytes
            self._finish_message(rec, arg)
            return

        i = arg
        self._free_credit(worm.hops[-1].channel)
        worm.delivered += 1
        msg_id = worm.msg_of[i]
        rec = self._report.messages[msg_id]
        if worm.tokens[i].kind == "data":
            stats = self._report.channels[rec.channel]
            stats.delivered_bytes += 1
            stats.data_tokens += 1
            if stats.first_data_ns is None:
                stats.first_data_ns = self._now
            stats.last_data_ns = self._now
            self._report.delivered_bytes += 1
        if worm.last_of_msg.get(msg_id) == i:
            # a packet-mode message is out once every one of its packets is
            left = self._packets_left.get(msg_id, 1) - 1
            self._packets_left[msg_id] = left
            if left == 0:
                self._finish_message(rec, msg_id)

    def _finish_message(self, rec: MessageRecord, msg_id: int) -> None:
        rec.delivered_ns = self._now
        rec.latency_ns = self._now - rec.injected_ns
        src = self.topology.index_of(NodeId.parse(rec.src))
        dst = self.topology.index_of(NodeId.parse(rec.dst))
        for node in {src, dst}:
            self._intervals[node].append((rec.injected_ns, self._now))
        entry = self._entries[rec.index] if rec.reply_of is None else None
        if entry is not None and entry.reply_bytes is not None:
            reply = TrafficEntry(
                time_ns=self._now + entry.service_ns,
                src=entry.dst,
                dst=entry.src,
                bytes=entry.reply_bytes,
                channel=entry.channel,
            )
            index = len(self._entries)
            self._entries.append(reply)
            self._reply_of[index] = msg_id
            self._push(reply.time_ns, "inject", reply, index)

    def _finish(self, until_ns: float | None) -> SimReport:
        rep = self._report
        last = max((m.delivered_ns or 0.0 for m in rep.messages), default=0.0)
        rep.wall_ns = until_ns if until_ns is not None else last
        rep.horizon_ns = until_ns
        rep.in_flight_bytes = rep.injected_bytes - rep.delivered_bytes
        for m in rep.messages:
            node = self.topology.index_of(NodeId.parse(m.src))
            rep.node_blocked_ns[node] = rep.node_blocked_ns.get(node, 0.0) + m.blocked_ns
            if m.delivered_ns is None:
                for n in {node, self.topology.index_of(NodeId.parse(m.dst))}:
                    self._intervals[n].append((m.injected_ns, rep.wall_ns))
        rep.node_active_ns = {
            node: _union_length(spans) for node, spans in sorted(self._intervals.items())
        }
        for (link, direction, lane), state in sorted(self._channels.items()):
            rep.link_states[f"{link}:{direction}:{lane}"] = LinkState(
                busy_until=self._busy[(link, direction)],
                credits=self.params.buffer_depth - state.occupancy,
                held_by=state.held_by,
            )
        logger.debug(
            f"Run finished at {rep.wall_ns:.1f} ns: injected={rep.injected_bytes} "
            f"delivered={rep.delivered_bytes} in_flight={rep.in_flight_bytes}"
        )
        return rep


def _union_length(spans: Iterable[tuple[float, float]]) -> float:
    total, cur_start, cur_end = 0.0, None, None
    for start, end in sorted(spans):
        if cur_end is None or start > cur_end:
            if cur_end is not None:
                total += cur_end - cur_start  # type: ignore[operator]
            cur_start, cur_end = start, end
        else:
            cur_end = max(cur_end, end)
    if cur_end is not None:
        total += cur_end - cur_start  # type: ignore[operator]
    return total


def run(
    t: Topology,
    tables: RoutingTables,
    traffic: Sequence[TrafficEntry],
    params: NetworkParams | None = None,
    until_ns: float | None = None,
) -> SimReport:
    """Simulate ``traffic`` to completion (or to ``until_ns``)"""
    return NetworkSimulator(t, tables, params).run(traffic, until_ns)


def send(
    t: Topology,
    tables: RoutingTables,
    ch: ChannelEnd,
    payload_bytes: int,
    at_ns: float = 0.0,
    params: NetworkParams | None = None,
    established: bool = False,
) -> MessageRecord:
    """Send one message on ``ch`` over an otherwise idle network and return its completion"""
    if ch.peer is None:
        raise TrafficValidationError(f"channel {ch.owner}#{ch.id} is not bound to a peer")
    entry = TrafficEntry(
        time_ns=at_ns,
        src=ch.owner,
        dst=ch.peer,
        bytes=payload_bytes,
        mode=ch.mode,
        channel=ch.id,
        established=established,
    )
    return run(t, tables, [entry], params).messages[0]


def measure_latency(
    t: Topology,
    tables: RoutingTables,
    src: NodeId,
    dst: NodeId,
    payload_bytes: int,
    params: NetworkParams | None = None,
) -> float:
    """First byte in to last byte out on an idle network, over an open circuit.

    Network messages carry the synchronisation overhead; a core-local message
    is only the sending thread's instructions.
    """
    params = params or NetworkParams()
    entry = TrafficEntry(
        time_ns=0.0, src=src, dst=dst, bytes=payload_bytes, mode="circuit", established=True
    )
    rep = run(t, tables, [entry], params)
    latency = rep.messages[0].latency_ns or 0.0
    if src == dst:
        return latency
    return latency + params.sync_overhead_ns


def measure_throughput(
    t: Topology,
    tables: RoutingTables,
    src: NodeId,
    dst: NodeId,
    mode: Mode,
    total_bytes: int = 4096,
    params: NetworkParams | None = None,
) -> float:
    """Steady-state data rate in Mbit/s of one stream on an idle path"""
    entry = TrafficEntry(time_ns=0.0, src=src, dst=dst, bytes=total_bytes, mode=mode)
    rep = run(t, tables, [entry], params)
    stats = next(iter(rep.channels.values()))
    if stats.data_tokens < 2 or stats.first_data_ns is None or stats.last_data_ns is None:
        return 0.0
    span = stats.last_data_ns - stats.first_data_ns
    return (stats.data_tokens - 1) * BITS_PER_TOKEN / span * 1000.0


def flow_throughput_mbps(rep: SimReport, channel: str) -> float:
    """Delivered data rate of one channel between its first and last data token"""
    stats = rep.channels.get(channel)
    if stats is None or stats.data_tokens < 2:
        return 0.0
    span = (stats.last_data_ns or 0.0) - (stats.first_data_ns or 0.0)
    return (stats.data_tokens - 1) * BITS_PER_TOKEN / span * 1000.0 if span > 0 else 0.0


def random_traffic(
    t: Topology,
    count: int,
    seed: int | None = None,
    max_bytes: int = 64,
    span_ns: float = 10_000.0,
    circuit_share: float = 0.25,
) -> list[TrafficEntry]:
    """Uniformly random sends between distinct cores, sorted by time"""
    if count < 0 or max_bytes < 1:
        raise InvalidArgumentError(f"need count >= 0 and max_bytes >= 1, got {count}, {max_bytes}")
    if t.node_count < 2:
        raise InvalidArgumentError("random traffic needs at least two cores")
    rng = np.random.default_rng(seed)
    times = np.sort(rng.uniform(0.0, span_ns, size=count))
    srcs = rng.integers(0, t.node_count, size=count)
    # shift the destination past the source so the pair is always distinct
    dsts = (srcs + rng.integers(1, t.node_count, size=count)) % t.node_count
    sizes = rng.integers(1, max_bytes + 1, size=count)
    circuit = rng.random(count) < circuit_share
    return [
        TrafficEntry(
            time_ns=float(round(times[k], 3)),
            src=t.nodes[int(srcs[k])],
            dst=t.nodes[int(dsts[k])],
            bytes=int(sizes[k]),
            mode="circuit" if circuit[k] else "packet",
            channel=k,
        )
        for k in range(count)
    ]
