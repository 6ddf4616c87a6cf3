"""
Farmer-worker and pipeline workloads: placement plus the traffic they produce
"""

import logging
from collections import Counter
from typing import Literal

import networkx as nx
from pydantic import BaseModel, ConfigDict, Field

from ..errors import CapacityExceededError, InvalidArgumentError
from ..model.network_sim import Mode, NetworkParams, TrafficEntry, effective_rate_bps
from ..model.routing import RoutingTables, route
from ..model.topology import NodeId, Topology

logger = logging.getLogger(__name__)

WorkloadKind = Literal["farmer_worker", "pipeline", "neuron_sim", "shared_memory"]


class WorkloadSpec(BaseModel):
    """Declarative description of one workload run"""

    model_config = ConfigDict(extra="forbid")

    kind: WorkloadKind = "farmer_worker"
    workers: int = Field(default=15, ge=1)
    stages: int = Field(default=2, ge=1)
    rounds: int = Field(default=1, ge=1)
    message_bytes: int = Field(default=64, ge=0)
    result_bytes: int = Field(default=16, ge=0)
    service_ns: float = Field(default=1000.0, ge=0)
    interval_ns: float = Field(default=100_000.0, ge=0)
    mode: Mode = "packet"
    coordinator: NodeId | None = None
    placement: list[NodeId] | None = None
    neurons: int = Field(default=100, ge=1)
    connectivity: float = Field(default=0.10, gt=0, le=1)
    duration_ms: int = Field(default=100, ge=1)
    stimulus_current: float = Field(default=10.0)
    stimulated: list[int] = [0]
    controllers: int = Field(default=16, ge=1)
    shared_bytes: int = Field(default=1 << 20, ge=1)
    accesses: int = Field(default=256, ge=0)
    access_bytes: int = Field(default=4, ge=1)
    seed: int | None = None


def weighted_graph(t: Topology, params: NetworkParams | None = None) -> nx.Graph:
    """Physical graph weighted by per-bit transfer time (ns) of each link"""
    g = nx.Graph()
    g.add_nodes_from(range(t.node_count))
    for link in t.links:
        a, b = t.index_of(link.a), t.index_of(link.b)
        weight = 1e9 / effective_rate_bps(link, params)
        if not g.has_edge(a, b) or g[a][b]["weight"] > weight:
            g.add_edge(a, b, weight=weight)
    return g


def centre_node(t: Topology) -> NodeId:
    return t.node_at(t.height // 2, t.width // 2, 0)


def nearest_nodes(
    t: Topology, origin: NodeId, count: int, params: NetworkParams | None = None
) -> list[NodeId]:
    """The ``count`` nodes closest to origin, ties broken by node index"""
    dist = nx.single_source_dijkstra_path_length(
        weighted_graph(t, params), t.index_of(origin), weight="weight"
    )
    ranked = sorted((d, i) for i, d in dist.items() if i != t.index_of(origin))
    return [t.nodes[i] for _, i in ranked[:count]]


class FarmerWorkerPlan(BaseModel):
    coordinator: NodeId
    workers: list[NodeId]
    traffic: list[TrafficEntry]
    link_load: dict[int, int]
    busiest_link: int | None = None
    hub_bottleneck: bool = False
    off_board_links_used: int = 0


def _route_loads(tables: RoutingTables, pairs: list[tuple[NodeId, NodeId]]) -> Counter[int]:
    load: Counter[int] = Counter()
    for src, dst in pairs:
        for hop in route(tables, src, dst).hops:
            load[hop.link] += 1
    return load


def gen_farmer_worker(
    t: Topology,
    tables: RoutingTables,
    spec: WorkloadSpec,
    params: NetworkParams | None = None,
) -> FarmerWorkerPlan:
    """Scatter sub-sets from a coordinator to its nearest workers and gather results"""
    if spec.workers + 1 > t.node_count:
        raise CapacityExceededError(
            f"{spec.workers} workers plus a coordinator need {spec.workers + 1} cores, "
            f"machine has {t.node_count}"
        )
    coordinator = spec.coordinator or centre_node(t)
    workers = nearest_nodes(t, coordinator, spec.workers, params)

    traffic = [
        TrafficEntry(
            time_ns=r * spec.interval_ns,
            src=coordinator,
            dst=worker,
            bytes=spec.message_bytes,
            mode=spec.mode,
            channel=r,
            reply_bytes=spec.result_bytes,
            service_ns=spec.service_ns,
        )
        for r in range(spec.rounds)
        for worker in workers
    ]

    pairs = [(coordinator, w) for w in workers] + [(w, coordinator) for w in workers]
    load = _route_loads(tables, pairs)
    busiest = max(sorted(load), key=lambda k: load[k]) if load else None
    hub_links = {link.id for link in t.links if coordinator in (link.a, link.b)}
    partner = NodeId(slice=coordinator.slice, device=coordinator.device, core=1 - coordinator.core)
    hub_links |= {link.id for link in t.links if partner in (link.a, link.b)}
    off_board = sum(
        1 for link_id in load if t.link_by_id[link_id].link_class == "off_board_cable"
    )
    plan = FarmerWorkerPlan(
        coordinator=coordinator,
        workers=workers,
        traffic=traffic,
        link_load=dict(sorted(load.items())),
        busiest_link=busiest,
        hub_bottleneck=busiest is not None and busiest in hub_links,
        off_board_links_used=off_board,
    )
    if plan.hub_bottleneck:
        logger.info(
            f"Farmer at {coordinator}: busiest link {busiest} carries "
            f"{load[busiest]} routes and touches the coordinator's device"
        )
    return plan


class PipelinePlan(BaseModel):
    stages: list[NodeId]
    traffic: list[TrafficEntry]
    stage_rates_bps: list[float]
    throughput_bps: float | None = None


def gen_pipeline(
    t: Topology,
    tables: RoutingTables,
    spec: WorkloadSpec,
    params: NetworkParams | None = None,
    items: int = 64,
) -> PipelinePlan:
    """Chain the stages over nearby cores and stream items down the chain.

    Every stage streams concurrently, so the steady-state rate is that of the
    slowest link on any stage-to-stage route.
    """
    if spec.stages > t.node_count:
        raise CapacityExceededError(
            f"{spec.stages} stages exceed the machine's {t.node_count} cores"
        )
    if spec.placement is not None:
        if len(spec.placement) != spec.stages:
            raise InvalidArgumentError(
                f"placement names {len(spec.placement)} cores for {spec.stages} stages"
            )
        stages = list(spec.placement)
    else:
        stages = [spec.coordinator or t.nodes[0]]
        used = {stages[0]}
        graph = weighted_graph(t, params)
        while len(stages) < spec.stages:
            dist = nx.single_source_dijkstra_path_length(
                graph, t.index_of(stages[-1]), weight="weight"
            )
            nxt = min(
                (d, i) for i, d in dist.items() if t.nodes[i] not in used
            )[1]
            stages.append(t.nodes[nxt])
            used.add(t.nodes[nxt])

    rates = []
    traffic = []
    for k, (src, dst) in enumerate(zip(stages, stages[1:], strict=False)):
        hops = route(tables, src, dst).hops
        rates.append(
            min(effective_rate_bps(t.link_by_id[h.link], params) for h in hops)
        )
        traffic.append(
            TrafficEntry(
                time_ns=0.0,
                src=src,
                dst=dst,
                bytes=spec.message_bytes * items,
                mode="circuit",
                channel=k,
            )
        )
    return PipelinePlan(
        stages=stages,
        traffic=traffic,
        stage_rates_bps=rates,
        throughput_bps=min(rates) if rates else None,
    )
