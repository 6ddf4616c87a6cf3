"""
Prefix-structured addressing, per-switch routing tables and their verification

Addresses are left-aligned in 16 bits as ``row | column | layer``. Vertical
switches match on the row field alone, horizontal switches on row and column,
so a lookup decides "same row?" before "same column?" and routes realise
vertical-first dimension order across the two layers.
"""

import logging
import math
from collections.abc import Iterable, Mapping
from typing import Literal

import networkx as nx
import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..errors import CapacityExceededError, InvalidArgumentError, NotFoundError, RoutingError, TableIncompleteError
from .topology import LinkSpec, NodeId, Topology

logger = logging.getLogger(__name__)

ADDRESS_WIDTH = 16
MAX_TRANSITIONS = 2

OutPort = Literal["local", "die", "north", "south", "east", "west"]
Strategy = Literal["vertical_first", "naive_xy", "loaded"]
Lane = Literal["injection", "transit"]
Channel = tuple[int, int, Lane]
"""(link id, direction, lane); direction 0 runs a->b, 1 runs b->a"""

VERTICAL_PORTS = frozenset({"north", "south"})
HORIZONTAL_PORTS = frozenset({"east", "west"})


class AddressScheme(BaseModel):
    """Bit widths of the row and column fields; the layer field is one bit"""

    model_config = ConfigDict(frozen=True)

    row_bits: int = Field(ge=1)
    col_bits: int = Field(ge=1)

    @property
    def bits(self) -> int:
        return self.row_bits + self.col_bits + 1

    @property
    def shift(self) -> int:
        return ADDRESS_WIDTH - self.bits

    def encode(self, row: int, column: int, layer_bit: int) -> int:
        value = (row << (self.col_bits + 1)) | (column << 1) | layer_bit
        return value << self.shift

    def row_prefix(self, row: int) -> int:
        return row << (ADDRESS_WIDTH - self.row_bits)

    def cell_prefix(self, row: int, column: int) -> int:
        return ((row << self.col_bits) | column) << (ADDRESS_WIDTH - self.row_bits - self.col_bits)


def scheme_for(t: Topology) -> AddressScheme:
    scheme = AddressScheme(
        row_bits=max(1, math.ceil(math.log2(t.height))),
        col_bits=max(1, math.ceil(math.log2(t.width))),
    )
    if scheme.bits > ADDRESS_WIDTH:
        raise CapacityExceededError(
            f"{t.width}x{t.height} device grid needs {scheme.bits} address bits, "
            f"the network supports {ADDRESS_WIDTH}"
        )
    return scheme


def assign_addresses(t: Topology) -> dict[NodeId, int]:
    """Give every node its 16-bit network address"""
    scheme = scheme_for(t)
    addrs = {}
    for node in t.nodes:
        row, col = t.position(node)
        addrs[node] = scheme.encode(row, col, node.core)
    return addrs


def format_address(addr: int) -> str:
    return f"0x{addr:04x}"


class RouteEntry(BaseModel):
    """Match the top ``length`` bits of ``prefix`` and leave through ``port``"""

    model_config = ConfigDict(frozen=True)

    prefix: int = Field(ge=0, lt=1 << ADDRESS_WIDTH)
    length: int = Field(ge=0, le=ADDRESS_WIDTH)
    port: OutPort

    def matches(self, addr: int) -> bool:
        if self.length == 0:
            return True
        drop = ADDRESS_WIDTH - self.length
        return (addr >> drop) == (self.prefix >> drop)


class RoutingTable(BaseModel):
    """One switch's longest-prefix-first entry list"""

    model_config = ConfigDict(frozen=True)

    owner: NodeId
    entries: tuple[RouteEntry, ...]

    def lookup(self, addr: int) -> OutPort | None:
        for entry in self.entries:
            if entry.matches(addr):
                return entry.port
        return None


def range_to_prefixes(lo: int, hi: int, width: int) -> list[tuple[int, int]]:
    """Cover the integer range [lo, hi] of a width-bit field with aligned prefixes.

    Returns (value, prefix_length) pairs; value is the first integer of the
    block, prefix_length counts bits of the field that are fixed.
    """
    blocks: list[tuple[int, int]] = []
    while lo <= hi:
        size = lo & -lo if lo else 1 << width
        while size > hi - lo + 1:
            size >>= 1
        blocks.append((lo, width - size.bit_length() + 1))
        lo += size
    return blocks


class RoutingTables:
    """Tables for every switch of one topology plus compiled lookup state.

    Immutable after construction; the next-hop memo only caches results of
    pure lookups, so sharing an instance across threads is safe.
    """

    def __init__(
        self,
        topology: Topology,
        tables: Mapping[NodeId, RoutingTable],
        strategy: Strategy,
    ):
        self.topology = topology
        self.strategy = strategy
        self.addresses = assign_addresses(topology)
        self.tables = [tables[n] for n in topology.nodes]
        self._addr_list = [self.addresses[n] for n in topology.nodes]
        self._compiled = [_compile(tbl) for tbl in self.tables]
        self._memo: dict[tuple[int, int], tuple[OutPort, int | None] | None] = {}

    def table_of(self, node: NodeId) -> RoutingTable:
        return self.tables[self.topology.index_of(node)]

    def port_for(self, cur: int, dst: int) -> OutPort | None:
        addr = self._addr_list[dst]
        for length, entries in self._compiled[cur]:
            port = entries.get(addr >> (ADDRESS_WIDTH - length) if length else 0)
            if port is not None:
                return port
        return None

    def next_hop(self, cur: int, dst: int) -> tuple[OutPort, int | None] | None:
        """Port chosen at switch ``cur`` for ``dst`` and the link it leaves on.

        None means no entry matched; a link of None means the entry names an
        unpopulated port.
        """
        key = (cur, dst)
        if key in self._memo:
            return self._memo[key]
        port = self.port_for(cur, dst)
        if port is None:
            result = None
        elif port == "local":
            result = (port, None)
        else:
            ids = self.topology.port_links[cur].get(port, [])
            result = (port, ids[0] if ids else None)
        self._memo[key] = result
        return result


def _compile(table: RoutingTable) -> list[tuple[int, dict[int, OutPort]]]:
    by_length: dict[int, dict[int, OutPort]] = {}
    for entry in table.entries:
        key = entry.prefix >> (ADDRESS_WIDTH - entry.length) if entry.length else 0
        # first entry of a given prefix wins, as in the ordered list
        by_length.setdefault(entry.length, {}).setdefault(key, entry.port)
    return sorted(by_length.items(), key=lambda kv: kv[0], reverse=True)


def _sorted_entries(entries: Iterable[RouteEntry]) -> tuple[RouteEntry, ...]:
    return tuple(sorted(entries, key=lambda e: (-e.length, e.prefix)))


def _vertical_first_table(t: Topology, scheme: AddressScheme, node: NodeId) -> RoutingTable:
    row, col = t.position(node)
    ports = t.port_links[t.index_of(node)]
    entries = [RouteEntry(prefix=scheme.encode(row, col, node.core), length=ADDRESS_WIDTH, port="local")]

    if node.core == 0:
        entries.append(RouteEntry(prefix=scheme.row_prefix(row), length=scheme.row_bits, port="die"))
        top = (1 << scheme.row_bits) - 1
        for port, lo, hi in (("north", row + 1, top), ("south", 0, row - 1)):
            if port not in ports:
                continue
            for value, length in range_to_prefixes(lo, hi, scheme.row_bits):
                entries.append(RouteEntry(prefix=scheme.row_prefix(value), length=length, port=port))
    else:
        cell_bits = scheme.row_bits + scheme.col_bits
        entries.append(RouteEntry(prefix=scheme.cell_prefix(row, col), length=cell_bits, port="die"))
        base = row << scheme.col_bits
        last = (1 << scheme.col_bits) - 1
        for port, lo, hi in (("east", col + 1, last), ("west", 0, col - 1)):
            if port not in ports:
                continue
            for value, length in range_to_prefixes(base | lo, base | hi, cell_bits):
                entries.append(
                    RouteEntry(
                        prefix=value << (ADDRESS_WIDTH - cell_bits), length=length, port=port
                    )
                )
        entries.append(RouteEntry(prefix=0, length=0, port="die"))
    return RoutingTable(owner=node, entries=_sorted_entries(entries))


def _naive_xy_table(t: Topology, addrs: Mapping[NodeId, int], node: NodeId) -> RoutingTable:
    """Column first, then row, as if every switch owned all four directions"""
    row, col = t.position(node)
    ports = t.port_links[t.index_of(node)]
    entries = []
    for dst, addr in addrs.items():
        d_row, d_col = t.position(dst)
        if dst == node:
            port: OutPort = "local"
        elif d_col != col:
            port = "east" if d_col > col else "west"
        elif d_row != row:
            port = "north" if d_row > row else "south"
        else:
            port = "die"
        if port == "local" or port in ports:
            entries.append(RouteEntry(prefix=addr, length=ADDRESS_WIDTH, port=port))
    return RoutingTable(owner=node, entries=_sorted_entries(entries))


def generate_tables(
    t: Topology,
    addrs: Mapping[NodeId, int] | None = None,
    strategy: Strategy = "vertical_first",
) -> RoutingTables:
    """Synthesise a table for every switch.

    ``naive_xy`` ignores the layer split and exists to show why it fails.
    """
    addrs = addrs if addrs is not None else assign_addresses(t)
    scheme = scheme_for(t)
    if strategy == "vertical_first":
        tables = {n: _vertical_first_table(t, scheme, n) for n in t.nodes}
    elif strategy == "naive_xy":
        tables = {n: _naive_xy_table(t, addrs, n) for n in t.nodes}
    else:
        raise InvalidArgumentError(f"cannot generate tables with strategy {strategy!r}")
    logger.info(f"Generated {strategy} tables for {t.node_count} switches")
    return RoutingTables(t, tables, strategy)


class Hop(BaseModel):
    """One link traversal of a route"""

    model_config = ConfigDict(frozen=True)

    link: int
    direction: int
    port: OutPort
    lane: Lane

    @property
    def channel(self) -> Channel:
        return (self.link, self.direction, self.lane)


class Route(BaseModel):
    """Hops from src to dst in order"""

    model_config = ConfigDict(frozen=True)

    src: NodeId
    dst: NodeId
    hops: tuple[Hop, ...] = ()

    @property
    def layer_transitions(self) -> int:
        """On-die hops after which the route continues; the final one is delivery"""
        return sum(1 for hop in self.hops[:-1] if hop.port == "die")

    def dimension_ordered(self) -> bool:
        """No north/south hop once east/west movement has begun"""
        seen_horizontal = False
        for hop in self.hops:
            if hop.port in HORIZONTAL_PORTS:
                seen_horizontal = True
            elif hop.port in VERTICAL_PORTS and seen_horizontal:
                return False
        return True


def _hop(link: LinkSpec, from_node: NodeId, port: OutPort, first: bool) -> Hop:
    direction = 0 if link.a == from_node and link.a_port == port else 1
    lane: Lane = "injection" if first and port == "die" else "transit"
    return Hop(link=link.id, direction=direction, port=port, lane=lane)


def route(tables: RoutingTables, src: NodeId, dst: NodeId) -> Route:
    """Follow table lookups from src until dst"""
    t = tables.topology
    cur, goal = t.index_of(src), t.index_of(dst)
    hops: list[Hop] = []
    while cur != goal:
        switch = t.nodes[cur]
        step = tables.next_hop(cur, goal)
        if step is None:
            raise TableIncompleteError(str(switch), f"no entry matches {dst} ({format_address(tables.addresses[dst])})")
        port, link_id = step
        if port == "local":
            raise RoutingError(f"switch {switch} claims {dst} is local")
        if link_id is None:
            raise TableIncompleteError(str(switch), f"entry for {dst} names unpopulated port {port}")
        link = t.link_by_id[link_id]
        hops.append(_hop(link, switch, port, not hops))
        cur = t.index_of(link.other_end(switch))
        if len(hops) > t.node_count:
            raise RoutingError(f"routing loop from {src} to {dst} through {switch}")
    return Route(src=src, dst=dst, hops=tuple(hops))


class VerificationReport(BaseModel):
    """All-pairs check of a table set"""

    strategy: str
    node_count: int
    pairs: int
    deliverable: bool
    failure_count: int = 0
    failures: list[str] = []
    max_layer_transitions: int = 0
    dimension_order_violations: int = 0
    cdg_acyclic: bool = True
    cdg_cycle: list[str] = []
    link_load: dict[int, int] = {}
    load_histogram: dict[int, int] = {}

    @property
    def ok(self) -> bool:
        return (
            self.deliverable
            and self.cdg_acyclic
            and self.max_layer_transitions <= MAX_TRANSITIONS
            and self.dimension_order_violations == 0
        )


MAX_LISTED_FAILURES = 50


def verify_tables(tables: RoutingTables) -> VerificationReport:
    """Walk every (src, dst) pair, build the channel dependency graph and count link loads.

    Routes to one destination form a tree, so each destination is resolved
    once per node rather than once per pair.
    """
    t = tables.topology
    n = t.node_count
    logger.info(f"Verifying {tables.strategy} tables over {n * (n - 1)} pairs")

    load = np.zeros(max((link.id for link in t.links), default=-1) + 1, dtype=np.int64)
    cdg = nx.DiGraph()
    failures: list[str] = []
    failure_count = 0
    max_transitions = 0
    order_violations = 0

    for goal in range(n):
        step: list[tuple[OutPort, int, int] | None] = [None] * n
        reason: dict[int, str] = {}
        for cur in range(n):
            if cur == goal:
                continue
            hop = tables.next_hop(cur, goal)
            if hop is None:
                reason[cur] = "lookup miss"
            elif hop[0] == "local":
                reason[cur] = "local entry for remote node"
            elif hop[1] is None:
                reason[cur] = f"unpopulated port {hop[0]}"
            else:
                link = t.link_by_id[hop[1]]
                nxt = t.index_of(link.other_end(t.nodes[cur]))
                step[cur] = (hop[0], hop[1], nxt)

        # resolve each node's path once: transitions, ordering, ok
        state: list[tuple[bool, int, bool, bool] | None] = [None] * n
        state[goal] = (True, 0, False, False)
        depth = [0] * n
        for start in range(n):
            trail: list[int] = []
            cur = start
            on_trail = set()
            while state[cur] is None:
                if cur in on_trail or step[cur] is None:
                    break
                trail.append(cur)
                on_trail.add(cur)
                cur = step[cur][2]  # type: ignore[index]
            tail = state[cur]
            if tail is None:
                bad = (False, 0, False, False)
                if cur in on_trail:
                    reason.setdefault(cur, "routing loop")
                tail = bad
                state[cur] = bad
            for node in reversed(trail):
                port, _, nxt = step[node]  # type: ignore[misc]
                ok, trans, vertical_ahead, violation = tail
                if ok:
                    if port == "die" and nxt != goal:
                        trans += 1
                    violation = violation or (port in HORIZONTAL_PORTS and vertical_ahead)
                    vertical_ahead = vertical_ahead or port in VERTICAL_PORTS
                    depth[node] = depth[nxt] + 1
                tail = (ok, trans, vertical_ahead, violation)
                state[node] = tail

        # subtree sizes give per-link loads without walking each pair
        carried = [1] * n
        order = sorted(
            (i for i in range(n) if i != goal and state[i] and state[i][0]),  # type: ignore[index]
            key=lambda i: -depth[i],
        )
        for cur in order:
            port, link_id, nxt = step[cur]  # type: ignore[misc]
            load[link_id] += carried[cur]
            if nxt != goal:
                carried[nxt] += carried[cur]

        has_pred = [False] * n
        for cur in order:
            has_pred[step[cur][2]] = True  # type: ignore[index]
        for cur in order:
            port, link_id, nxt = step[cur]  # type: ignore[misc]
            if nxt == goal:
                continue
            link = t.link_by_id[link_id]
            nport, nlink_id, _ = step[nxt]  # type: ignore[misc]
            after = _hop(t.link_by_id[nlink_id], t.nodes[nxt], nport, False).channel
            cdg.add_edge(_hop(link, t.nodes[cur], port, True).channel, after)
            if has_pred[cur]:
                cdg.add_edge(_hop(link, t.nodes[cur], port, False).channel, after)

        for src in range(n):
            if src == goal:
                continue
            ok, trans, _, violation = state[src]  # type: ignore[misc]
            if not ok:
                failure_count += 1
                if len(failures) < MAX_LISTED_FAILURES:
                    why = _first_reason(step, reason, src, goal)
                    failures.append(f"{t.nodes[src]} -> {t.nodes[goal]}: {why}")
                continue
            max_transitions = max(max_transitions, trans)
            order_violations += int(violation)

    cycle: list[str] = []
    try:
        found = nx.find_cycle(cdg)
        cycle = [f"{u}->{v}" for u, v in found]
    except nx.NetworkXNoCycle:
        pass

    loads = load[[link.id for link in t.links]] if t.links else np.zeros(0, dtype=np.int64)
    counts = np.bincount(loads) if loads.size else np.zeros(0, dtype=np.int64)
    report = VerificationReport(
        strategy=tables.strategy,
        node_count=n,
        pairs=n * (n - 1),
        deliverable=failure_count == 0,
        failure_count=failure_count,
        failures=failures,
        max_layer_transitions=max_transitions,
        dimension_order_violations=order_violations,
        cdg_acyclic=not cycle,
        cdg_cycle=cycle,
        link_load={link.id: int(load[link.id]) for link in t.links},
        load_histogram={i: int(c) for i, c in enumerate(counts) if c},
    )
    logger.info(
        f"Verification done: deliverable={report.deliverable} "
        f"failures={failure_count} max_transitions={max_transitions} "
        f"cdg_acyclic={report.cdg_acyclic}"
    )
    return report


def _first_reason(
    step: list[tuple[OutPort, int, int] | None], reason: dict[int, str], src: int, goal: int
) -> str:
    cur, seen = src, set()
    while cur not in reason and cur not in seen and step[cur] is not None:
        seen.add(cur)
        cur = step[cur][2]  # type: ignore[index]
    return f"{reason.get(cur, 'routing loop')} at switch index {cur}"


def table_rows(tables: RoutingTables) -> list[dict[str, str | int]]:
    """Flat (node, prefix, mask_length, out_port) rows for CSV dumps"""
    return [
        {
            "node": str(tbl.owner),
            "prefix": format_address(entry.prefix),
            "mask_length": entry.length,
            "out_port": entry.port,
        }
        for tbl in tables.tables
        for entry in tbl.entries
    ]


def tables_from_rows(t: Topology, rows: Iterable[Mapping[str, str]]) -> RoutingTables:
    """Rebuild tables from rows written by table_rows"""
    grouped: dict[NodeId, list[RouteEntry]] = {n: [] for n in t.nodes}
    for row in rows:
        node = NodeId.parse(row["node"])
        if node not in grouped:
            raise NotFoundError(f"table row for {node}, which this machine does not have")
        try:
            entry = RouteEntry(
                prefix=int(row["prefix"], 16),
                length=int(row["mask_length"]),
                port=row["out_port"],  # type: ignore[arg-type]
            )
        except (KeyError, ValueError) as e:
            raise InvalidArgumentError(f"bad routing table row {dict(row)}: {e}") from e
        grouped[node].append(entry)
    tables = {
        n: RoutingTable(owner=n, entries=_sorted_entries(entries)) for n, entries in grouped.items()
    }
    return RoutingTables(t, tables, "loaded")
