"""
Run the configured workload and collect its outputs
"""

import logging
from collections.abc import Sequence

from pydantic import BaseModel

from ..config import SwallowConfig
from ..errors import InvalidArgumentError
from ..model.network_sim import SimReport, run
from ..model.routing import RoutingTables
from ..model.topology import Topology
from .memory import memory_scaling_curve
from .neurons import neuron_scaling, run_neuron_sim
from .paradigms import gen_farmer_worker, gen_pipeline
from .shared_memory import MemoryAccess, run_shared_mem, shared_mem_map, uniform_trace

logger = logging.getLogger(__name__)


class WorkloadOutcome(BaseModel):
    """Simulation report plus the named row sets a workload produces"""

    kind: str
    report: SimReport
    summary: dict[str, float | int | str | bool | None]
    tables: dict[str, list[dict[str, float | int | str | None]]] = {}


def run_workload(
    cfg: SwallowConfig,
    t: Topology,
    tables: RoutingTables,
    seed: int | None = None,
    trace: Sequence[MemoryAccess] | None = None,
) -> WorkloadOutcome:
    """Run ``cfg.workload``; a given trace replaces the generated shared-memory accesses"""
    spec = cfg.workload
    params = cfg.network
    seed = spec.seed if seed is None else seed
    if trace is not None and spec.kind != "shared_memory":
        raise InvalidArgumentError(f"an access trace only applies to shared_memory, not {spec.kind}")
    logger.info(f"Running workload {spec.kind} on {t.node_count} cores")

    if spec.kind == "farmer_worker":
        plan = gen_farmer_worker(t, tables, spec, params)
        rep = run(t, tables, plan.traffic, params)
        return WorkloadOutcome(
            kind=spec.kind,
            report=rep,
            summary={
                "coordinator": str(plan.coordinator),
                "workers": len(plan.workers),
                "messages": len(rep.messages),
                "busiest_link": plan.busiest_link,
                "hub_bottleneck": plan.hub_bottleneck,
                "off_board_links_used": plan.off_board_links_used,
                "wall_ns": rep.wall_ns,
            },
            tables={
                "placement": [
                    {"role": "worker", "node": str(w)} for w in plan.workers
                ],
            },
        )

    if spec.kind == "pipeline":
        pipe = gen_pipeline(t, tables, spec, params)
        rep = run(t, tables, pipe.traffic, params)
        return WorkloadOutcome(
            kind=spec.kind,
            report=rep,
            summary={
                "stages": len(pipe.stages),
                "throughput_mbps": (pipe.throughput_bps or 0.0) / 1e6,
                "wall_ns": rep.wall_ns,
            },
            tables={
                "stages": [
                    {"stage": k, "node": str(n), "outgoing_rate_mbps": r / 1e6 if r else None}
                    for k, (n, r) in enumerate(
                        zip(pipe.stages, [*pipe.stage_rates_bps, None], strict=False)
                    )
                ],
            },
        )

    if spec.kind == "neuron_sim":
        acct = cfg.neurons.accounting.model_copy(update={"connectivity": spec.connectivity})
        stimulus = {n: spec.stimulus_current for n in spec.stimulated}
        result = run_neuron_sim(
            spec.neurons,
            t,
            tables,
            stimulus=stimulus,
            duration_ms=spec.duration_ms,
            acct=acct,
            mem=cfg.neurons.memory,
            izh=cfg.neurons.izhikevich,
            params=params,
            seed=seed,
        )
        scaling = neuron_scaling(t.node_count, acct, cfg.neurons.memory)
        return WorkloadOutcome(
            kind=spec.kind,
            report=result.report,
            summary={
                "neurons": result.neurons,
                "spikes": len(result.spikes),
                "messages": result.messages,
                "fan_out": result.fan_out,
                "max_neurons_on_machine": scaling.max_neurons,
                "wall_ns": result.report.wall_ns,
            },
            tables={
                "spikes": [{"time_ns": s.time_ns, "neuron_id": s.neuron} for s in result.spikes],
                "neuron_scaling": scaling.curve,  # type: ignore[dict-item]
                "memory_scaling": memory_scaling_curve(mem=cfg.neurons.memory),  # type: ignore[dict-item]
            },
        )

    m = shared_mem_map(spec.controllers, spec.shared_bytes, t)
    if trace is None:
        trace = uniform_trace(t, m, spec.accesses, spec.access_bytes, spec.interval_ns, seed)
    shared = run_shared_mem(t, tables, m, trace, params)
    histogram = [
        {"lo_ns": lo, "hi_ns": hi, "count": count}
        for lo, hi, count in zip(
            shared.histogram_edges, shared.histogram_edges[1:], shared.histogram_counts, strict=False
        )
    ]
    return WorkloadOutcome(
        kind=spec.kind,
        report=shared.report,
        summary={
            "controllers": m.n,
            "accesses": len(trace),
            "mean_latency_ns": shared.mean_latency_ns,
            "throughput_mbps": shared.throughput_mbps,
            "wall_ns": shared.report.wall_ns,
        },
        tables={
            "trace": [
                {
                    "time_ns": a.time_ns,
                    "op": a.op,
                    "address": a.address,
                    "size": a.size,
                    "node": str(a.node) if a.node else None,
                }
                for a in trace
            ],
            "latency_histogram": histogram,  # type: ignore[dict-item]
        },
    )
