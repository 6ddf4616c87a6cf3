"""
Shared memory emulated over distributed stores

Addresses are interleaved over n controllers (controller = address mod n);
each access becomes a request to the controller's core and a response back.
"""

import logging
from collections.abc import Sequence
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..errors import InvalidArgumentError
from ..model.network_sim import NetworkParams, SimReport, TrafficEntry, run
from ..model.routing import RoutingTables
from ..model.topology import NodeId, Topology

logger = logging.getLogger(__name__)

REQUEST_HEADER_BYTES = 8
ACK_BYTES = 1
SLICE_DRAM_BITS = 256 * 1024 * 1024
DEFAULT_SERVICE_NS = 40.0


class SharedMemoryMap(BaseModel):
    """n controllers with per-controller capacities m_i"""

    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=1)
    sizes: tuple[int, ...]
    controllers: tuple[NodeId, ...] = ()

    @model_validator(mode="after")
    def _consistent(self) -> "SharedMemoryMap":
        if len(self.sizes) != self.n:
            raise ValueError(f"{len(self.sizes)} capacities for {self.n} controllers")
        if self.controllers and len(self.controllers) != self.n:
            raise ValueError(f"{len(self.controllers)} controller nodes for {self.n} controllers")
        return self

    @property
    def total(self) -> int:
        return sum(self.sizes)


class Location(BaseModel):
    controller: int
    node: NodeId | None
    offset: int


def place_controllers(n: int, t: Topology) -> tuple[NodeId, ...]:
    """n controller cores spread evenly over the machine"""
    if n > t.node_count:
        raise InvalidArgumentError(f"{n} controllers on a {t.node_count}-core machine")
    return tuple(t.nodes[i * t.node_count // n] for i in range(n))


def shared_mem_map(n: int, total_bytes: int, t: Topology | None = None) -> SharedMemoryMap:
    """Interleave ``total_bytes`` over n controllers spread evenly across the machine"""
    if n < 1:
        raise InvalidArgumentError(f"need at least one controller, got {n}")
    if total_bytes < 0:
        raise InvalidArgumentError(f"total size must be non-negative, got {total_bytes}")
    sizes = tuple((total_bytes - i + n - 1) // n for i in range(n))
    controllers = place_controllers(n, t) if t is not None else ()
    return SharedMemoryMap(n=n, sizes=sizes, controllers=controllers)


def dram_map(t: Topology, slice_index: int) -> SharedMemoryMap:
    """The slice DRAM as a single controller behind the slice's first core"""
    if not 0 <= slice_index < t.slice_count:
        raise InvalidArgumentError(f"slice {slice_index} is not part of this machine")
    node = NodeId(slice=slice_index, device=0, core=0)
    return SharedMemoryMap(n=1, sizes=(SLICE_DRAM_BITS // 8,), controllers=(node,))


def locate(m: SharedMemoryMap, address: int) -> Location:
    if not 0 <= address < m.total:
        raise InvalidArgumentError(f"address {address} outside shared space of {m.total} bytes")
    controller = address % m.n
    offset = address // m.n
    if offset >= m.sizes[controller]:
        raise InvalidArgumentError(
            f"address {address} is past the {m.sizes[controller]} bytes of controller {controller}"
        )
    return Location(
        controller=controller,
        node=m.controllers[controller] if m.controllers else None,
        offset=offset,
    )


class MemoryAccess(BaseModel):
    """One line of an access trace"""

    model_config = ConfigDict(extra="forbid")

    time_ns: float = Field(ge=0)
    op: Literal["read", "write"]
    address: int = Field(ge=0)
    size: int = Field(default=4, ge=1)
    node: NodeId | None = None


class SharedMemResult(BaseModel):
    memory_map: SharedMemoryMap
    report: SimReport
    latencies_ns: list[float]
    histogram_edges: list[float]
    histogram_counts: list[int]
    mean_latency_ns: float
    throughput_mbps: float


def uniform_trace(
    t: Topology,
    m: SharedMemoryMap,
    accesses: int,
    size: int = 4,
    interval_ns: float = 100.0,
    seed: int | None = None,
) -> list[MemoryAccess]:
    """Reads and writes at uniformly random addresses from random requesters"""
    if accesses and m.total == 0:
        raise InvalidArgumentError("no shared memory to access")
    rng = np.random.default_rng(seed)
    sizes = np.asarray(m.sizes, dtype=float)
    # uniform over the bytes each controller actually holds
    controllers = rng.choice(m.n, size=accesses, p=sizes / sizes.sum()) if accesses else np.zeros(0, dtype=int)
    offsets = (rng.random(accesses) * sizes[controllers]).astype(int)
    addresses = offsets * m.n + controllers
    ops = rng.random(accesses) < 0.5
    nodes = rng.integers(0, t.node_count, size=accesses)
    return [
        MemoryAccess(
            time_ns=k * interval_ns,
            op="read" if ops[k] else "write",
            address=int(addresses[k]),
            size=size,
            node=t.nodes[int(nodes[k])],
        )
        for k in range(accesses)
    ]


def run_shared_mem(
    t: Topology,
    tables: RoutingTables,
    m: SharedMemoryMap,
    trace: Sequence[MemoryAccess],
    params: NetworkParams | None = None,
    service_ns: float = DEFAULT_SERVICE_NS,
    bins: int = 20,
) -> SharedMemResult:
    """Turn every access into a request and a response and simulate them"""
    if not m.controllers:
        m = m.model_copy(update={"controllers": place_controllers(m.n, t)})
    traffic = []
    for k, access in enumerate(trace):
        where = locate(m, access.address)
        requester = access.node or t.nodes[k % t.node_count]
        read = access.op == "read"
        traffic.append(
            TrafficEntry(
                time_ns=access.time_ns,
                src=requester,
                dst=where.node,  # type: ignore[arg-type]
                bytes=REQUEST_HEADER_BYTES + (0 if read else access.size),
                reply_bytes=access.size if read else ACK_BYTES,
                service_ns=service_ns,
                channel=k,
            )
        )
    report = run(t, tables, traffic, params)

    latencies = []
    for rec in report.messages:
        if rec.reply_of is None or rec.delivered_ns is None:
            continue
        request = report.messages[rec.reply_of]
        latencies.append(rec.delivered_ns - request.injected_ns)

    values = np.asarray(latencies, dtype=float)
    if values.size:
        counts, edges = np.histogram(values, bins=bins)
        mean = float(values.mean())
    else:
        counts, edges = np.zeros(0, dtype=int), np.zeros(0)
        mean = 0.0
    moved = report.delivered_bytes * 8
    throughput = moved / report.wall_ns * 1000.0 if report.wall_ns > 0 else 0.0
    logger.debug(f"Shared memory over {m.n} controllers: mean latency {mean:.1f} ns")
    return SharedMemResult(
        memory_map=m,
        report=report,
        latencies_ns=latencies,
        histogram_edges=[float(e) for e in edges],
        histogram_counts=[int(c) for c in counts],
        mean_latency_ns=mean,
        throughput_mbps=throughput,
    )
