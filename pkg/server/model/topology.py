"""
Swallow machine graph: slices of dual-core devices joined by a lattice network

A slice carries eight XS1-L2A devices laid out in two columns and four rows.
Core 0 of every device sits in the vertical routing layer and owns the
device's North/South links; core 1 sits in the horizontal layer and owns
East/West. The two cores are joined by the on-die link, which is the only way
between layers.
"""

import logging
from collections import Counter
from collections.abc import Sequence
from functools import cached_property
from typing import Literal

import networkx as nx
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..errors import InvalidArgumentError, NotFoundError

logger = logging.getLogger(__name__)

LinkClass = Literal[
    "on_die", "on_board_vertical", "on_board_horizontal", "off_board_cable"
]
Layer = Literal["vertical", "horizontal"]
Port = Literal["north", "south", "east", "west", "die"]

EXTERNAL_CLASSES: tuple[LinkClass, ...] = (
    "on_board_vertical",
    "on_board_horizontal",
    "off_board_cable",
)
DEVICES_PER_SLICE = 8
CORES_PER_DEVICE = 2
CORES_PER_SLICE = DEVICES_PER_SLICE * CORES_PER_DEVICE
SLICE_COLUMNS = 2
SLICE_ROWS = 4
SWITCH_PORTS = 12
EXTERNAL_ATTACHMENTS = 4
BRIDGE_RATE_BPS = 80e6
MAX_BRIDGES_PER_SLICE = 2

PORTS_OF_LAYER: dict[Layer, tuple[Port, ...]] = {
    "vertical": ("north", "south"),
    "horizontal": ("east", "west"),
}
OPPOSITE_PORT: dict[Port, Port] = {
    "north": "south",
    "south": "north",
    "east": "west",
    "west": "east",
    "die": "die",
}


class NodeId(BaseModel):
    """One processor: its slice, device within the slice and core within the device"""

    model_config = ConfigDict(frozen=True)

    slice: int = Field(ge=0)
    device: int = Field(ge=0, lt=DEVICES_PER_SLICE)
    core: int = Field(ge=0, lt=CORES_PER_DEVICE)

    @model_validator(mode="before")
    @classmethod
    def _from_text(cls, data: object) -> object:
        # config files and tool arguments name nodes as "s0.d1.c0"
        if isinstance(data, str):
            try:
                s, d, c = data.strip().split(".")
                return {"slice": int(s[1:]), "device": int(d[1:]), "core": int(c[1:])}
            except (ValueError, IndexError) as e:
                raise ValueError(f"not a node id: {data!r}") from e
        return data

    def __str__(self) -> str:
        return f"s{self.slice}.d{self.device}.c{self.core}"

    @classmethod
    def parse(cls, text: str) -> "NodeId":
        """Parse the ``s<slice>.d<device>.c<core>`` form used in files"""
        try:
            s, d, c = text.strip().split(".")
            return cls(slice=int(s[1:]), device=int(d[1:]), core=int(c[1:]))
        except (ValueError, IndexError) as e:
            raise InvalidArgumentError(f"not a node id: {text!r}") from e


class LinkClassProfile(BaseModel):
    """Timing, rate and energy shared by every link of one class"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    symbol_delay: int = Field(ge=1, description="Ts, switch cycles between symbols")
    token_delay: int = Field(ge=1, description="Tt, switch cycles between tokens")
    rate_bps: float = Field(gt=0)
    energy_pj_per_bit: float = Field(ge=0)


class LinkProfile(BaseModel):
    """Per-class link defaults; the stock values describe the built machine"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    on_die: LinkClassProfile = LinkClassProfile(
        symbol_delay=2, token_delay=1, rate_bps=500e6, energy_pj_per_bit=1.63
    )
    on_board_vertical: LinkClassProfile = LinkClassProfile(
        symbol_delay=10, token_delay=1, rate_bps=125e6, energy_pj_per_bit=106.0
    )
    on_board_horizontal: LinkClassProfile = LinkClassProfile(
        symbol_delay=10, token_delay=1, rate_bps=125e6, energy_pj_per_bit=101.0
    )
    off_board_cable: LinkClassProfile = LinkClassProfile(
        symbol_delay=10, token_delay=1, rate_bps=125e6, energy_pj_per_bit=5440.0
    )

    def for_class(self, link_class: LinkClass) -> LinkClassProfile:
        return getattr(self, link_class)

    @classmethod
    def fastest(cls) -> "LinkProfile":
        """Every link in the Ts=2, Tt=1 mode, as used for latency characterisation"""
        stock = cls()
        fast = {
            name: getattr(stock, name).model_copy(
                update={"symbol_delay": 2, "token_delay": 1, "rate_bps": 500e6}
            )
            for name in ("on_die", *EXTERNAL_CLASSES)
        }
        return cls(**fast)


class LinkSpec(BaseModel):
    """One populated, bidirectional physical link"""

    model_config = ConfigDict(frozen=True)

    id: int
    link_class: LinkClass
    symbol_delay: int = Field(ge=1)
    token_delay: int = Field(ge=1)
    rate_bps: float = Field(gt=0)
    energy_pj_per_bit: float = Field(ge=0)
    a: NodeId
    a_port: Port
    b: NodeId
    b_port: Port

    def other_end(self, node: NodeId) -> NodeId:
        if node == self.a:
            return self.b
        if node == self.b:
            return self.a
        raise NotFoundError(f"{node} is not an endpoint of link {self.id}")

    def port_at(self, node: NodeId) -> Port:
        return self.a_port if node == self.a else self.b_port


class WiringOverride(BaseModel):
    """Re-cable one attachment point: drop the link on it or add a new one"""

    model_config = ConfigDict(extra="forbid")

    op: Literal["remove", "add"]
    a: NodeId
    a_port: Port
    b: NodeId | None = None
    b_port: Port | None = None
    link_class: LinkClass | None = None

    @model_validator(mode="after")
    def _add_needs_far_end(self) -> "WiringOverride":
        if self.op == "add" and (self.b is None or self.b_port is None):
            raise ValueError("an 'add' override needs both b and b_port")
        return self


class BridgeSpec(BaseModel):
    """Request for an ethernet bridge under one column of a bottom-row slice"""

    model_config = ConfigDict(extra="forbid")

    slice: int = Field(ge=0)
    column: int = Field(ge=0, lt=SLICE_COLUMNS)
    rate_bps: float = Field(default=BRIDGE_RATE_BPS, gt=0)


class BridgeAttachment(BaseModel):
    """An ethernet bridge sitting on a free South port"""

    model_config = ConfigDict(frozen=True)

    id: int
    node: NodeId
    port: Port = "south"
    rate_bps: float = BRIDGE_RATE_BPS


class Topology(BaseModel):
    """Immutable node/link graph of a Swallow machine"""

    model_config = ConfigDict(frozen=True)

    slices_x: int = Field(ge=1)
    slices_y: int = Field(ge=1)
    links: tuple[LinkSpec, ...]
    bridges: tuple[BridgeAttachment, ...] = ()

    @property
    def slice_count(self) -> int:
        return self.slices_x * self.slices_y

    @property
    def node_count(self) -> int:
        return self.slice_count * CORES_PER_SLICE

    @property
    def device_count(self) -> int:
        return self.slice_count * DEVICES_PER_SLICE

    @property
    def width(self) -> int:
        """Device columns across the whole machine"""
        return self.slices_x * SLICE_COLUMNS

    @property
    def height(self) -> int:
        """Device rows across the whole machine"""
        return self.slices_y * SLICE_ROWS

    @cached_property
    def nodes(self) -> tuple[NodeId, ...]:
        return tuple(
            NodeId(slice=s, device=d, core=c)
            for s in range(self.slice_count)
            for d in range(DEVICES_PER_SLICE)
            for c in range(CORES_PER_DEVICE)
        )

    def index_of(self, node: NodeId) -> int:
        if node.slice >= self.slice_count:
            raise NotFoundError(f"node {node} is not part of this machine")
        return node.slice * CORES_PER_SLICE + node.device * CORES_PER_DEVICE + node.core

    def layer_of(self, node: NodeId) -> Layer:
        return "vertical" if node.core == 0 else "horizontal"

    def position(self, node: NodeId) -> tuple[int, int]:
        """(row, column) of the node's device in the machine-wide grid"""
        sx, sy = node.slice % self.slices_x, node.slice // self.slices_x
        return (
            sy * SLICE_ROWS + node.device // SLICE_COLUMNS,
            sx * SLICE_COLUMNS + node.device % SLICE_COLUMNS,
        )

    def node_at(self, row: int, column: int, core: int) -> NodeId:
        if not (0 <= row < self.height and 0 <= column < self.width):
            raise NotFoundError(f"no device at row {row}, column {column}")
        sy, r = divmod(row, SLICE_ROWS)
        sx, c = divmod(column, SLICE_COLUMNS)
        return NodeId(
            slice=sy * self.slices_x + sx, device=r * SLICE_COLUMNS + c, core=core
        )

    @cached_property
    def port_links(self) -> tuple[dict[Port, list[int]], ...]:
        """Per node index, the link ids populated on each port"""
        table: list[dict[Port, list[int]]] = [{} for _ in range(self.node_count)]
        for link in self.links:
            for node, port in ((link.a, link.a_port), (link.b, link.b_port)):
                table[self.index_of(node)].setdefault(port, []).append(link.id)
        return tuple(table)

    @cached_property
    def link_by_id(self) -> dict[int, LinkSpec]:
        return {link.id: link for link in self.links}

    @cached_property
    def wiring(self) -> tuple[tuple[int, str, str, str, str], ...]:
        """Which ports each link joins, independent of link speeds"""
        return tuple(
            (link.id, str(link.a), link.a_port, str(link.b), link.b_port) for link in self.links
        )

    @cached_property
    def graph(self) -> nx.MultiGraph:
        """Physical graph over node indices, one edge per link"""
        g = nx.MultiGraph()
        g.add_nodes_from(range(self.node_count))
        for link in self.links:
            g.add_edge(
                self.index_of(link.a), self.index_of(link.b), key=link.id, link=link
            )
        return g

    def without_link(self, link_id: int) -> "Topology":
        """A copy with one link unplugged (used for fault what-ifs)"""
        if link_id not in self.link_by_id:
            raise NotFoundError(f"no link with id {link_id}")
        return Topology(
            slices_x=self.slices_x,
            slices_y=self.slices_y,
            links=tuple(link for link in self.links if link.id != link_id),
            bridges=self.bridges,
        )


class Finding(BaseModel):
    """One problem found by validate_topology"""

    kind: Literal["degree", "connectivity", "link_class", "rate_hierarchy"]
    message: str


class ValidationReport(BaseModel):
    """Findings for a topology; empty for anything build_topology produces"""

    findings: list[Finding] = []

    @property
    def ok(self) -> bool:
        return not self.findings

    def of_kind(self, kind: str) -> list[Finding]:
        return [f for f in self.findings if f.kind == kind]


def expected_class(t: Topology, a: NodeId, b: NodeId) -> LinkClass:
    """Class a link between a and b should carry given where they sit"""
    if a.slice == b.slice and a.device == b.device:
        return "on_die"
    if a.slice != b.slice:
        return "off_board_cable"
    (ra, ca), (rb, cb) = t.position(a), t.position(b)
    return "on_board_vertical" if ca == cb else "on_board_horizontal"


def _make_link(
    link_id: int,
    link_class: LinkClass,
    profile: LinkProfile,
    a: NodeId,
    a_port: Port,
    b: NodeId,
    b_port: Port,
) -> LinkSpec:
    timing = profile.for_class(link_class)
    return LinkSpec(
        id=link_id,
        link_class=link_class,
        symbol_delay=timing.symbol_delay,
        token_delay=timing.token_delay,
        rate_bps=timing.rate_bps,
        energy_pj_per_bit=timing.energy_pj_per_bit,
        a=a,
        a_port=a_port,
        b=b,
        b_port=b_port,
    )


def build_topology(
    slices_x: int,
    slices_y: int,
    link_profile: LinkProfile | None = None,
    wiring: Sequence[WiringOverride] = (),
    bridges: Sequence[BridgeSpec] = (),
) -> Topology:
    """Build the lattice for a slices_x by slices_y arrangement of slices"""
    if slices_x < 1 or slices_y < 1:
        raise InvalidArgumentError(
            f"slice dimensions must be positive, got {slices_x}x{slices_y}"
        )
    profile = link_profile or LinkProfile()
    skeleton = Topology(slices_x=slices_x, slices_y=slices_y, links=())
    links: list[LinkSpec] = []

    def add(a: NodeId, a_port: Port, b: NodeId, b_port: Port) -> None:
        cls = expected_class(skeleton, a, b)
        links.append(_make_link(len(links), cls, profile, a, a_port, b, b_port))

    for row in range(skeleton.height):
        for col in range(skeleton.width):
            vert = skeleton.node_at(row, col, 0)
            horiz = skeleton.node_at(row, col, 1)
            add(vert, "die", horiz, "die")
            if row + 1 < skeleton.height:
                add(vert, "north", skeleton.node_at(row + 1, col, 0), "south")
            if col + 1 < skeleton.width:
                add(horiz, "east", skeleton.node_at(row, col + 1, 1), "west")

    for override in wiring:
        links = _apply_override(skeleton, profile, links, override)

    attachments = _attach_bridges(skeleton, links, bridges)
    t = Topology(
        slices_x=slices_x, slices_y=slices_y, links=tuple(links), bridges=attachments
    )
    logger.info(
        f"Built {slices_x}x{slices_y}-slice machine: {t.node_count} cores, "
        f"{len(t.links)} links, {len(t.bridges)} bridges"
    )
    return t


def _apply_override(
    skeleton: Topology,
    profile: LinkProfile,
    links: list[LinkSpec],
    override: WiringOverride,
) -> list[LinkSpec]:
    skeleton.index_of(override.a)
    if override.op == "remove":
        kept = [
            link
            for link in links
            if not (
                (link.a == override.a and link.a_port == override.a_port)
                or (link.b == override.a and link.b_port == override.a_port)
            )
        ]
        if len(kept) == len(links):
            raise NotFoundError(f"no link on {override.a} port {override.a_port}")
        return kept
    assert override.b is not None and override.b_port is not None
    skeleton.index_of(override.b)
    cls = override.link_class or expected_class(skeleton, override.a, override.b)
    next_id = max((link.id for link in links), default=-1) + 1
    return links + [
        _make_link(
            next_id, cls, profile, override.a, override.a_port, override.b, override.b_port
        )
    ]


def _attach_bridges(
    skeleton: Topology, links: list[LinkSpec], bridges: Sequence[BridgeSpec]
) -> tuple[BridgeAttachment, ...]:
    per_slice = Counter(b.slice for b in bridges)
    crowded = [s for s, n in per_slice.items() if n > MAX_BRIDGES_PER_SLICE]
    if crowded:
        raise InvalidArgumentError(f"at most two bridges per slice, slices {crowded}")
    used = {(link.a, link.a_port) for link in links} | {
        (link.b, link.b_port) for link in links
    }
    attached: list[BridgeAttachment] = []
    for spec in bridges:
        if spec.slice >= skeleton.slice_count:
            raise NotFoundError(f"bridge on missing slice {spec.slice}")
        node = NodeId(slice=spec.slice, device=spec.column, core=0)
        if (node, "south") in used:
            raise InvalidArgumentError(
                f"bridge needs a free South port but {node} south is wired"
            )
        used.add((node, "south"))
        attached.append(
            BridgeAttachment(id=len(attached), node=node, rate_bps=spec.rate_bps)
        )
    return tuple(attached)


def links_of(t: Topology, n: NodeId) -> list[LinkSpec]:
    """Populated links on a node's switch"""
    ports = t.port_links[t.index_of(n)]
    return [t.link_by_id[i] for ids in ports.values() for i in ids]


def validate_topology(t: Topology) -> ValidationReport:
    """Check degree, connectivity, link classes and the rate hierarchy"""
    findings: list[Finding] = []
    findings += _degree_findings(t)
    findings += _connectivity_findings(t)
    for link in t.links:
        want = expected_class(t, link.a, link.b)
        if link.link_class != want:
            findings.append(
                Finding(
                    kind="link_class",
                    message=f"link {link.id} {link.a}-{link.b} is {link.link_class}, expected {want}",
                )
            )
    findings += _rate_findings(t)
    if findings:
        logger.debug(f"Topology validation raised {len(findings)} findings")
    return ValidationReport(findings=findings)


def _degree_findings(t: Topology) -> list[Finding]:
    findings: list[Finding] = []
    external_per_device: Counter[tuple[int, int]] = Counter()
    for idx, ports in enumerate(t.port_links):
        node = t.nodes[idx]
        total = sum(len(ids) for ids in ports.values())
        if total > SWITCH_PORTS:
            findings.append(
                Finding(kind="degree", message=f"{node} has {total} links, switch has {SWITCH_PORTS}")
            )
        dies = [i for i in ports.get("die", []) if t.link_by_id[i].link_class == "on_die"]
        if len(dies) != 1:
            findings.append(
                Finding(kind="degree", message=f"{node} has {len(dies)} on-die links, expected 1")
            )
        for port, ids in ports.items():
            if port != "die":
                external_per_device[(node.slice, node.device)] += len(ids)
                allowed = PORTS_OF_LAYER[t.layer_of(node)]
                if port not in allowed:
                    findings.append(
                        Finding(kind="degree", message=f"{node} in the {t.layer_of(node)} layer has a {port} link")
                    )
    for (s, d), count in sorted(external_per_device.items()):
        if count > EXTERNAL_ATTACHMENTS:
            findings.append(
                Finding(kind="degree", message=f"device s{s}.d{d} has {count} external links, budget is {EXTERNAL_ATTACHMENTS}")
            )
    return findings


def _connectivity_findings(t: Topology) -> list[Finding]:
    findings: list[Finding] = []
    components = nx.number_connected_components(t.graph)
    if components > 1:
        findings.append(
            Finding(kind="connectivity", message=f"physical graph has {components} components")
        )
    # each column's vertical chain and each row's horizontal chain must be whole,
    # otherwise dimension-ordered routes across the gap are lost
    for layer, ports in PORTS_OF_LAYER.items():
        core = 0 if layer == "vertical" else 1
        sub = nx.Graph()
        sub.add_nodes_from(i for i, n in enumerate(t.nodes) if n.core == core)
        for link in t.links:
            if link.a_port in ports and link.b_port in ports:
                sub.add_edge(t.index_of(link.a), t.index_of(link.b))
        lines = t.width if layer == "vertical" else t.height
        pieces = nx.number_connected_components(sub)
        if pieces > lines:
            findings.append(
                Finding(
                    kind="connectivity",
                    message=f"potential disconnection: {layer} layer splits into {pieces} segments, expected {lines}",
                )
            )
    return findings


def _rate_findings(t: Topology) -> list[Finding]:
    findings: list[Finding] = []
    internal = {link.rate_bps for link in t.links if link.link_class == "on_die"}
    external = {
        (link.link_class, link.rate_bps)
        for link in t.links
        if link.link_class != "on_die"
    }
    for rate in sorted(internal):
        for cls, ext_rate in sorted(external):
            if rate != 4 * ext_rate:
                findings.append(
                    Finding(
                        kind="rate_hierarchy",
                        message=(
                            f"internal bandwidths exceed external by 4 violated: "
                            f"on_die {rate:.0f} bit/s vs {cls} {ext_rate:.0f} bit/s"
                        ),
                    )
                )
    return findings


def adjacency_rows(t: Topology) -> list[dict[str, str | int | float]]:
    """Adjacency list, one row per link plus one per bridge, for CSV export"""
    rows: list[dict[str, str | int | float]] = [
        {
            "link": link.id,
            "a": str(link.a),
            "a_port": link.a_port,
            "b": str(link.b),
            "b_port": link.b_port,
            "class": link.link_class,
            "rate_bps": link.rate_bps,
            "pj_per_bit": link.energy_pj_per_bit,
        }
        for link in t.links
    ]
    for bridge in t.bridges:
        rows.append(
            {
                "link": f"bridge{bridge.id}",
                "a": str(bridge.node),
                "a_port": bridge.port,
                "b": f"bridge{bridge.id}",
                "b_port": "eth",
                "class": "bridge",
                "rate_bps": bridge.rate_bps,
                "pj_per_bit": 0.0,
            }
        )
    return rows


def to_dot(t: Topology) -> str:
    """Graphviz description with devices pinned at their grid positions"""
    lines = ["graph swallow {", "  node [shape=circle fontsize=8];"]
    for node in t.nodes:
        row, col = t.position(node)
        x = col * 2 + node.core
        lines.append(f'  "{node}" [pos="{x},{row * 2 + node.core}!"];')
    for link in t.links:
        lines.append(f'  "{link.a}" -- "{link.b}" [label="{link.link_class}"];')
    for bridge in t.bridges:
        lines.append(f'  "bridge{bridge.id}" [shape=box];')
        lines.append(f'  "{bridge.node}" -- "bridge{bridge.id}" [style=dashed];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def bridge_traffic_ceiling(t: Topology, link_profile: LinkProfile | None = None) -> float:
    """Share of one external link's rate an ethernet bridge can carry"""
    profile = link_profile or LinkProfile()
    if not t.bridges:
        return 0.0
    external = min(profile.for_class(cls).rate_bps for cls in EXTERNAL_CLASSES)
    return min(b.rate_bps for b in t.bridges) / external
