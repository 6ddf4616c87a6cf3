"""
Per-core computation and communication bounds

A thread is modelled as a rate source: the four-stage pipeline issues one
instruction per cycle shared round-robin between active threads, with no
thread issuing more often than every fourth cycle.
"""

from typing import Literal

from pydantic import BaseModel, Field

from ..errors import InvalidArgumentError
from .topology import EXTERNAL_ATTACHMENTS, Topology

CommPattern = Literal["congested", "disjoint_paths"]

PIPELINE_DEPTH = 4
MAX_THREADS = 8
BITS_PER_BYTE = 8
ON_DIE_LANES = 2
# each device's switch carries traffic both ways on its internal links
ON_DIE_DIRECTIONS = 2
# router capacity figure quoted for Swallow in the published comparison table
QUOTED_ROUTER_CAPACITY_BPS = 4.5e9


class CoreConfig(BaseModel):
    clock_mhz: float = Field(default=500.0, gt=0)
    active_threads: int = 1


class ThreadThroughput(BaseModel):
    per_thread_mips: float
    aggregate_mips: float


class CommMetrics(BaseModel):
    """Node demand/capacity (e, c) and system demand/capacity (E, C), bit/s"""

    e: float = Field(ge=0)
    c: float = Field(ge=0)
    E: float = Field(ge=0)
    C: float = Field(ge=0)
    pattern: CommPattern | None = None


def thread_throughput(cfg: CoreConfig) -> ThreadThroughput:
    if not 1 <= cfg.active_threads <= MAX_THREADS:
        raise InvalidArgumentError(
            f"active threads must be within 1..{MAX_THREADS}, got {cfg.active_threads}"
        )
    per_thread = cfg.clock_mhz / max(PIPELINE_DEPTH, cfg.active_threads)
    return ThreadThroughput(
        per_thread_mips=per_thread, aggregate_mips=per_thread * cfg.active_threads
    )


def node_injection_limit(cfg: CoreConfig) -> float:
    """One byte per cycle in each direction through the network interface"""
    return BITS_PER_BYTE * cfg.clock_mhz * 1e6


def ratio_e_over_c(m: CommMetrics) -> float:
    if m.c <= 0:
        raise InvalidArgumentError("node communication capacity c must be positive")
    return m.e / m.c


def ratio_E_over_C(m: CommMetrics) -> float:
    if m.C <= 0:
        raise InvalidArgumentError("system communication capacity C must be positive")
    return m.E / m.C


def not_throttled(m: CommMetrics) -> bool:
    """Communication keeps up with computation when both ratios are at most one"""
    return ratio_e_over_c(m) <= 1 and ratio_E_over_C(m) <= 1


def swallow_metrics(
    t: Topology,
    pattern: CommPattern,
    cfg: CoreConfig | None = None,
) -> CommMetrics:
    """Derive e, c, E and C for one device from the link budgets.

    When every stream off a device funnels through one external link, C is
    that single link's rate; when the streams leave on separate links, C is
    the sum over the device's external attachment points.
    """
    cfg = cfg or CoreConfig()
    on_die = [link.rate_bps for link in t.links if link.link_class == "on_die"]
    outside = [link.rate_bps for link in t.links if link.link_class != "on_die"]
    if not on_die or not outside:
        raise InvalidArgumentError("machine needs both on-die and external links to bound communication")
    demand = node_injection_limit(cfg)
    internal = ON_DIE_LANES * ON_DIE_DIRECTIONS * min(on_die)
    # the slowest external link the machine is built with sets the per-link budget
    external = min(outside)
    if pattern == "congested":
        capacity = external
    else:
        capacity = EXTERNAL_ATTACHMENTS * external
    return CommMetrics(e=demand, c=internal, E=demand, C=capacity, pattern=pattern)


def metrics_row(t: Topology, cfg: CoreConfig | None = None) -> dict[str, float]:
    """The Swallow comparison row: e/c plus the E/C range"""
    congested = swallow_metrics(t, "congested", cfg)
    disjoint = swallow_metrics(t, "disjoint_paths", cfg)
    return {
        "cores": t.node_count,
        "e_gbps": congested.e / 1e9,
        "c_gbps": congested.c / 1e9,
        "e_over_c": ratio_e_over_c(congested),
        "E_over_C_min": ratio_E_over_C(disjoint),
        "E_over_C_max": ratio_E_over_C(congested),
        "quoted_router_capacity_gbps": QUOTED_ROUTER_CAPACITY_BPS / 1e9,
    }
