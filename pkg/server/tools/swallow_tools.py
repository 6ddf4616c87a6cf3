"""
Swallow simulator tools exposed over MCP
"""

import logging
from typing import Any, Literal

from mcp import types
from pydantic import BaseModel, Field

from ..config import SwallowConfig, config_hash, load_config, output_dir
from ..model.energy_model import system_power
from ..model.network_sim import TrafficEntry, measure_latency, run
from ..model.paper_tables import TABLES, paper_table
from ..model.routing import Strategy, generate_tables, verify_tables
from ..model.topology import LinkProfile, NodeId, Topology, build_topology, validate_topology
from ..storage.report_storage import ReportStorage, read_trace, read_traffic
from ..workloads.paradigms import WorkloadKind
from ..workloads.runner import run_workload

logger = logging.getLogger(__name__)

report_storage = ReportStorage(output_dir())


class MachineInputSchema(BaseModel):
    """Fields shared by every tool that builds a machine"""

    config_path: str | None = Field(
        default=None, description="YAML configuration file; SWALLOW_CONFIG when omitted"
    )
    slices_x: int | None = Field(default=None, ge=1, description="Slices across")
    slices_y: int | None = Field(default=None, ge=1, description="Slices down")
    seed: int | None = Field(default=None, description="Seed recorded in outputs")


class ToolOutputSchema(BaseModel):
    success: bool
    error: str | None = None
    files: list[str] = []


class TopologyInputSchema(MachineInputSchema):
    write_files: bool = Field(default=True, description="Write adjacency CSV and DOT")


class TopologyOutputSchema(ToolOutputSchema):
    nodes: int = 0
    links: int = 0
    bridges: int = 0
    findings: list[str] = []


class RoutingInputSchema(MachineInputSchema):
    strategy: Strategy = Field(default="vertical_first", description="Table generation strategy")


class RoutingOutputSchema(ToolOutputSchema):
    strategy: str = ""
    pairs: int = 0
    deliverable: bool = False
    failure_count: int = 0
    failures: list[str] = []
    max_layer_transitions: int = 0
    cdg_acyclic: bool = False


class SimulateInputSchema(MachineInputSchema):
    traffic: list[TrafficEntry] = Field(default=[], description="Timed send requests")
    traffic_path: str | None = Field(default=None, description="Traffic CSV to load instead")
    until_ns: float | None = Field(default=None, ge=0, description="Stop at this time")


class SimulateOutputSchema(ToolOutputSchema):
    wall_ns: float = 0.0
    injected_bytes: int = 0
    delivered_bytes: int = 0
    in_flight_bytes: int = 0
    messages: int = 0
    mean_latency_ns: float | None = None


class LatencyInputSchema(MachineInputSchema):
    src: str = Field(description="Sending core, e.g. s0.d0.c0")
    dst: str = Field(description="Receiving core")
    payload_bytes: int = Field(default=4, ge=0)
    fastest_links: bool = Field(default=False, description="Run every link in its fastest mode")


class LatencyOutputSchema(ToolOutputSchema):
    latency_ns: float = 0.0


class WorkloadInputSchema(MachineInputSchema):
    kind: WorkloadKind | None = Field(default=None, description="Override the configured workload")
    trace_path: str | None = Field(
        default=None, description="Shared-memory access trace CSV to replay instead of generating one"
    )


class WorkloadOutputSchema(ToolOutputSchema):
    kind: str = ""
    summary: dict[str, Any] = {}


class PowerInputSchema(BaseModel):
    config_path: str | None = None
    slices: int = Field(default=30, ge=1)
    clock_mhz: float = Field(default=500.0, gt=0, le=500)
    load: Literal["idle", "active_loaded"] = "active_loaded"


class PowerOutputSchema(ToolOutputSchema):
    cores_w: float = 0.0
    wall_w: float = 0.0
    core_mw: float = 0.0
    breakdown_w: dict[str, float] = {}


class PaperTableInputSchema(BaseModel):
    name: str = Field(description=f"One of: {', '.join(TABLES)}")
    config_path: str | None = None


class PaperTableOutputSchema(ToolOutputSchema):
    name: str = ""
    rows: list[dict[str, Any]] = []


def _machine(args: MachineInputSchema) -> tuple[SwallowConfig, Topology]:
    cfg = load_config(args.config_path)
    machine = cfg.machine.model_copy(
        update={
            k: v
            for k, v in (("slices_x", args.slices_x), ("slices_y", args.slices_y))
            if v is not None
        }
    )
    cfg = cfg.model_copy(update={"machine": machine})
    if args.seed is not None:
        cfg = cfg.model_copy(update={"seed": args.seed})
    t = build_topology(machine.slices_x, machine.slices_y, cfg.links, machine.wiring, machine.bridges)
    return cfg, t


def _storage(cfg: SwallowConfig, run_name: str) -> ReportStorage:
    return report_storage.for_run(run_name, config_hash(cfg), cfg.seed)


swallow_tools: list[types.Tool] = [
    types.Tool(
        name="build_topology",
        description="Build and validate a Swallow machine, exporting its adjacency",
        inputSchema=TopologyInputSchema.model_json_schema(),
    ),
    types.Tool(
        name="verify_routing",
        description="Generate routing tables and check all-pairs delivery and deadlock freedom",
        inputSchema=RoutingInputSchema.model_json_schema(),
    ),
    types.Tool(
        name="simulate_traffic",
        description="Simulate timed messages through the network and report delivery",
        inputSchema=SimulateInputSchema.model_json_schema(),
    ),
    types.Tool(
        name="measure_latency",
        description="Latency of one message between two cores on an idle network",
        inputSchema=LatencyInputSchema.model_json_schema(),
    ),
    types.Tool(
        name="run_workload",
        description="Run the farmer-worker, pipeline, neuron or shared-memory workload",
        inputSchema=WorkloadInputSchema.model_json_schema(),
    ),
    types.Tool(
        name="estimate_power",
        description="Core and wall power of a machine of the given number of slices",
        inputSchema=PowerInputSchema.model_json_schema(),
    ),
    types.Tool(
        name="paper_table",
        description="Model values printed beside the published figures",
        inputSchema=PaperTableInputSchema.model_json_schema(),
    ),
]


async def build_topology_handler(args: dict) -> dict[str, Any]:
    """Handle topology construction"""
    validated_args = TopologyInputSchema(**args)

    try:
        cfg, t = _machine(validated_args)
        report = validate_topology(t)
        files = []
        if validated_args.write_files:
            stored = _storage(cfg, "topo").write_topology(t, report)
            files = [f.path for f in stored]
        logger.info(f"Built topology with {t.node_count} cores and {len(t.links)} links")
        return TopologyOutputSchema(
            success=report.ok,
            nodes=t.node_count,
            links=len(t.links),
            bridges=len(t.bridges),
            findings=[f.message for f in report.findings],
            files=files,
        ).model_dump()

    except Exception as error:
        logger.error(f"Failed to build topology: {error}")
        return TopologyOutputSchema(success=False, error=str(error)).model_dump()


async def verify_routing_handler(args: dict) -> dict[str, Any]:
    """Handle table generation and verification"""
    validated_args = RoutingInputSchema(**args)

    try:
        cfg, t = _machine(validated_args)
        tables = generate_tables(t, strategy=validated_args.strategy)
        report = verify_tables(tables)
        storage = _storage(cfg, "route")
        files = [storage.write_tables(tables).path, storage.write_verification(report).path]
        return RoutingOutputSchema(
            success=report.ok,
            strategy=report.strategy,
            pairs=report.pairs,
            deliverable=report.deliverable,
            failure_count=report.failure_count,
            failures=report.failures[:10],
            max_layer_transitions=report.max_layer_transitions,
            cdg_acyclic=report.cdg_acyclic,
            files=files,
        ).model_dump()

    except Exception as error:
        logger.error(f"Failed to verify routing: {error}")
        return RoutingOutputSchema(success=False, error=str(error)).model_dump()


async def simulate_traffic_handler(args: dict) -> dict[str, Any]:
    """Handle a traffic simulation"""
    validated_args = SimulateInputSchema(**args)

    try:
        cfg, t = _machine(validated_args)
        traffic = (
            read_traffic(validated_args.traffic_path)
            if validated_args.traffic_path
            else validated_args.traffic
        )
        tables = generate_tables(t)
        rep = run(t, tables, traffic, cfg.network, validated_args.until_ns)
        stored = _storage(cfg, "sim").write_sim_report(rep)
        latencies = [m.latency_ns for m in rep.messages if m.latency_ns is not None]
        return SimulateOutputSchema(
            success=True,
            wall_ns=rep.wall_ns,
            injected_bytes=rep.injected_bytes,
            delivered_bytes=rep.delivered_bytes,
            in_flight_bytes=rep.in_flight_bytes,
            messages=len(rep.messages),
            mean_latency_ns=sum(latencies) / len(latencies) if latencies else None,
            files=[f.path for f in stored],
        ).model_dump()

    except Exception as error:
        logger.error(f"Failed to simulate traffic: {error}")
        return SimulateOutputSchema(success=False, error=str(error)).model_dump()


async def measure_latency_handler(args: dict) -> dict[str, Any]:
    """Handle a single latency measurement"""
    validated_args = LatencyInputSchema(**args)

    try:
        cfg, t = _machine(validated_args)
        if validated_args.fastest_links:
            m = cfg.machine
            t = build_topology(m.slices_x, m.slices_y, LinkProfile.fastest(), m.wiring, m.bridges)
        latency = measure_latency(
            t,
            generate_tables(t),
            NodeId.parse(validated_args.src),
            NodeId.parse(validated_args.dst),
            validated_args.payload_bytes,
            cfg.network,
        )
        return LatencyOutputSchema(success=True, latency_ns=latency).model_dump()

    except Exception as error:
        logger.error(f"Failed to measure latency: {error}")
        return LatencyOutputSchema(success=False, error=str(error)).model_dump()


async def run_workload_handler(args: dict) -> dict[str, Any]:
    """Handle a workload run"""
    validated_args = WorkloadInputSchema(**args)

    try:
        cfg, t = _machine(validated_args)
        if validated_args.kind is not None:
            spec = cfg.workload.model_copy(update={"kind": validated_args.kind})
            cfg = cfg.model_copy(update={"workload": spec})
        trace = read_trace(validated_args.trace_path) if validated_args.trace_path else None
        outcome = run_workload(cfg, t, generate_tables(t), seed=cfg.seed, trace=trace)
        storage = _storage(cfg, f"workload_{outcome.kind}")
        files = [f.path for f in storage.write_sim_report(outcome.report)]
        for name, rows in outcome.tables.items():
            files.append(storage.write_rows(name, rows).path)
        return WorkloadOutputSchema(
            success=True, kind=outcome.kind, summary=outcome.summary, files=files
        ).model_dump()

    except Exception as error:
        logger.error(f"Failed to run workload: {error}")
        return WorkloadOutputSchema(success=False, error=str(error)).model_dump()


async def estimate_power_handler(args: dict) -> dict[str, Any]:
    """Handle a power estimate"""
    validated_args = PowerInputSchema(**args)

    try:
        cfg = load_config(validated_args.config_path)
        power = system_power(
            validated_args.slices,
            validated_args.load,
            validated_args.clock_mhz,
            cfg.power.profile,
            cfg.power.breakdown,
        )
        return PowerOutputSchema(
            success=True,
            cores_w=power.cores_w,
            wall_w=power.wall_w,
            core_mw=power.core_mw,
            breakdown_w=power.breakdown_w,
        ).model_dump()

    except Exception as error:
        logger.error(f"Failed to estimate power: {error}")
        return PowerOutputSchema(success=False, error=str(error)).model_dump()


async def paper_table_handler(args: dict) -> dict[str, Any]:
    """Handle a golden-number table"""
    validated_args = PaperTableInputSchema(**args)

    try:
        cfg = load_config(validated_args.config_path)
        rows = paper_table(validated_args.name, cfg)
        return PaperTableOutputSchema(
            success=True, name=validated_args.name, rows=rows
        ).model_dump()

    except Exception as error:
        logger.error(f"Failed to build table {validated_args.name}: {error}")
        return PaperTableOutputSchema(
            success=False, name=validated_args.name, error=str(error)
        ).model_dump()


swallow_handlers = {
    "build_topology": build_topology_handler,
    "verify_routing": verify_routing_handler,
    "simulate_traffic": simulate_traffic_handler,
    "measure_latency": measure_latency_handler,
    "run_workload": run_workload_handler,
    "estimate_power": estimate_power_handler,
    "paper_table": paper_table_handler,
}
