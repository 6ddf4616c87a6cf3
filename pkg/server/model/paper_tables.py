"""
Golden-number tables: model outputs printed beside the published figures
"""

import logging
from collections.abc import Callable

from ..config import SwallowConfig
from ..errors import NotFoundError
from ..workloads.neurons import PUBLISHED_NEURON_COUNT, neuron_capacity, neuron_scaling
from .core_model import (
    QUOTED_ROUTER_CAPACITY_BPS,
    CoreConfig,
    metrics_row,
    thread_throughput,
)
from .energy_model import (
    MEASURED_LOADED_MW,
    MEASURED_SLICE_CORES_W,
    MEASURED_SLICE_WALL_W,
    MEASURED_SYSTEM_WALL_W,
    QUOTED_ON_DIE_LINK_MW,
    LinkEnergyTable,
    core_power,
    dvfs_power,
    link_power_mw,
    system_power,
)
from .network_sim import instructions_for, measure_latency, measure_throughput
from .routing import generate_tables
from .topology import LinkProfile, NodeId, build_topology

logger = logging.getLogger(__name__)

Row = dict[str, str | float | int | None]

# comparison rows for other many-core systems, as published
COMPARISON_RATIOS: list[Row] = [
    {"system": "SpiNNaker", "source_bps": "6.4M", "sink_bps": "240M", "router_bps": "4G", "e_over_c": "0.03", "E_over_C": "0.42"},
    {"system": "Centip3De", "source_bps": "246G", "sink_bps": "---", "router_bps": "4.46G", "e_over_c": "---", "E_over_C": "55"},
    {"system": "Tile", "source_bps": "96G", "sink_bps": "1.28T", "router_bps": "2.56T", "e_over_c": "0.075", "E_over_C": "2.4"},
    {"system": "Epiphany", "source_bps": "19.2G", "sink_bps": "2G", "router_bps": "51G", "e_over_c": "0.10", "E_over_C": "6.02"},
]
COMPARISON_POWER: list[Row] = [
    {"system": "SpiNNaker", "isa": "ARM9", "cores_per_device": "17", "cores_per_system": "1,036,800", "node": "130nm", "power_per_core": "87mW", "speed": "200MHz", "uw_per_mhz": "435"},
    {"system": "Centip3De", "isa": "ARM Cortex-M3", "cores_per_device": "64", "cores_per_system": "64", "node": "130nm", "power_per_core": "203-1851mW", "speed": "20-80MHz", "uw_per_mhz": "2540-2300"},
    {"system": "Tilera", "isa": "Tile", "cores_per_device": "64", "cores_per_system": "64-480", "node": "130nm", "power_per_core": "300mW", "speed": "1000MHz", "uw_per_mhz": "300"},
    {"system": "Adapteva Epiphany", "isa": "Epiphany", "cores_per_device": "64", "cores_per_system": "64", "node": "28nm", "power_per_core": "31mW", "speed": "800MHz", "uw_per_mhz": "38.8"},
]


def _deviation(model: float, quoted: float) -> float:
    return (model - quoted) / quoted


def ratios_table(cfg: SwallowConfig) -> list[Row]:
    t = build_topology(cfg.machine.slices_x, cfg.machine.slices_y, cfg.links)
    m = metrics_row(t, CoreConfig(clock_mhz=cfg.network.clock_mhz))
    swallow: Row = {
        "system": "Swallow",
        "source_bps": f"{m['e_gbps']:g}G",
        "sink_bps": f"{m['c_gbps']:g}G",
        "router_bps": f"{QUOTED_ROUTER_CAPACITY_BPS / 1e9:g}G",
        "e_over_c": f"{m['e_over_c']:g}",
        "E_over_C": f"{m['E_over_C_min']:g}-{m['E_over_C_max']:g}",
    }
    return [swallow, *COMPARISON_RATIOS]


def power_table(cfg: SwallowConfig) -> list[Row]:
    profile = cfg.power.profile
    rows: list[Row] = []
    for f, measured in sorted(MEASURED_LOADED_MW.items(), reverse=True):
        model = core_power(f, "active_loaded", profile)
        rows.append({"quantity": f"core loaded @ {f:g} MHz (mW)", "model": model, "quoted": measured, "deviation": _deviation(model, measured)})
    for f, quoted in ((500.0, 113.0), (71.0, 50.0)):
        model = core_power(f, "idle", profile)
        rows.append({"quantity": f"core idle @ {f:g} MHz (mW)", "model": model, "quoted": quoted, "deviation": _deviation(model, quoted)})
    for f in (500.0, 71.0):
        rows.append({"quantity": f"core DVFS @ {f:g} MHz (mW)", "model": dvfs_power(f, profile), "quoted": None, "deviation": None})
    one = system_power(1, profile=profile, breakdown=cfg.power.breakdown)
    full = system_power(30, profile=profile, breakdown=cfg.power.breakdown)
    rows += [
        {"quantity": "slice cores (W)", "model": one.cores_w, "quoted": MEASURED_SLICE_CORES_W, "deviation": _deviation(one.cores_w, MEASURED_SLICE_CORES_W)},
        {"quantity": "slice wall (W)", "model": one.wall_w, "quoted": MEASURED_SLICE_WALL_W, "deviation": _deviation(one.wall_w, MEASURED_SLICE_WALL_W)},
        {"quantity": "30-slice wall (W)", "model": full.wall_w, "quoted": MEASURED_SYSTEM_WALL_W, "deviation": _deviation(full.wall_w, MEASURED_SYSTEM_WALL_W)},
    ]
    for part, watts in full.breakdown_w.items():
        rows.append({"quantity": f"30-slice {part} (W)", "model": watts, "quoted": None, "deviation": None})
    return rows


def energy_table(cfg: SwallowConfig) -> list[Row]:
    table = LinkEnergyTable.from_links(cfg.links)
    rows: list[Row] = []
    for cls in ("on_die", "on_board_vertical", "on_board_horizontal", "off_board_cable"):
        rate = cfg.links.for_class(cls).rate_bps  # type: ignore[arg-type]
        rows.append(
            {
                "link_class": cls,
                "pj_per_bit": table.pj_per_bit(cls),  # type: ignore[arg-type]
                "rate_mbps": rate / 1e6,
                "power_mw_at_rate": link_power_mw(cls, rate, table),  # type: ignore[arg-type]
            }
        )
    rows.append(
        {
            "link_class": "on_die (from quoted 1.4 mW)",
            "pj_per_bit": QUOTED_ON_DIE_LINK_MW * 1e-3 / cfg.links.on_die.rate_bps * 1e12,
            "rate_mbps": cfg.links.on_die.rate_bps / 1e6,
            "power_mw_at_rate": QUOTED_ON_DIE_LINK_MW,
        }
    )
    return rows


def latency_table(cfg: SwallowConfig) -> list[Row]:
    """Calibrated latencies on the fastest-mode profile, default-profile values beside them"""
    params = cfg.network
    fast = build_topology(1, 1, LinkProfile.fastest())
    stock = build_topology(1, 1, cfg.links)
    fast_tables, stock_tables = generate_tables(fast), generate_tables(stock)
    below, above = NodeId(slice=0, device=0, core=0), NodeId(slice=0, device=2, core=0)
    partner = NodeId(slice=0, device=0, core=1)
    cases = [
        ("token between packages", below, above, 1, 270.0),
        ("word between packages", below, above, 4, 360.0),
        ("word within a package", below, partner, 4, 320.0),
        ("word core-local", below, below, 4, 50.0),
    ]
    rows: list[Row] = []
    for name, src, dst, size, quoted in cases:
        model = measure_latency(fast, fast_tables, src, dst, size, params)
        default = measure_latency(stock, stock_tables, src, dst, size, params)
        rows.append(
            {
                "case": name,
                "model_ns": model,
                "quoted_ns": quoted,
                "deviation": _deviation(model, quoted),
                "default_profile_ns": default,
                "instructions": instructions_for(model, params),
            }
        )
    rows.append({"case": "synchronisation overhead", "model_ns": params.sync_overhead_ns, "quoted_ns": None, "deviation": None, "default_profile_ns": params.sync_overhead_ns, "instructions": instructions_for(params.sync_overhead_ns, params)})
    return rows


def rates_table(cfg: SwallowConfig) -> list[Row]:
    params = cfg.network
    t = build_topology(1, 1, cfg.links)
    tables = generate_tables(t)
    v0, h0 = NodeId(slice=0, device=0, core=0), NodeId(slice=0, device=0, core=1)
    v_up = NodeId(slice=0, device=2, core=0)
    cases = [
        ("internal circuit", v0, h0, "circuit", 500.0),
        ("internal packet", v0, h0, "packet", 435.0),
        ("external circuit", v0, v_up, "circuit", 125.0),
    ]
    return [
        {
            "path": name,
            "model_mbps": (model := measure_throughput(t, tables, src, dst, mode, 4096, params)),  # type: ignore[arg-type]
            "quoted_mbps": quoted,
            "deviation": _deviation(model, quoted),
        }
        for name, src, dst, mode, quoted in cases
    ]


def threads_table(cfg: SwallowConfig) -> list[Row]:
    rows: list[Row] = []
    for threads in range(1, 9):
        tp = thread_throughput(CoreConfig(clock_mhz=cfg.network.clock_mhz, active_threads=threads))
        rows.append({"threads": threads, "per_thread_mips": tp.per_thread_mips, "aggregate_mips": tp.aggregate_mips})
    return rows


def comparison_table(cfg: SwallowConfig) -> list[Row]:
    profile = cfg.power.profile
    loaded = core_power(500.0, "active_loaded", profile)
    swallow: Row = {
        "system": "Swallow",
        "isa": "XMOS-XS1",
        "cores_per_device": "2",
        "cores_per_system": f"16-{cfg.machine.slices_x * cfg.machine.slices_y * 16}",
        "node": "65nm",
        "power_per_core": f"{loaded:.0f}mW",
        "speed": "500MHz",
        "uw_per_mhz": f"{profile.dyn_mw_per_mhz * 1000:g}",
    }
    return [swallow, *COMPARISON_POWER]


def neurons_table(cfg: SwallowConfig) -> list[Row]:
    acct, mem = cfg.neurons.accounting, cfg.neurons.memory
    small = neuron_capacity(1, mem, acct)
    rows: list[Row] = [
        {"quantity": "neurons per core (small N)", "model": small, "quoted": 191},
        {"quantity": "reserved_os bytes", "model": mem.reserved_os, "quoted": None},
        {"quantity": "neurons per core at N=10000", "model": neuron_capacity(10_000, mem, acct), "quoted": None},
    ]
    for cores, quoted in ((1, None), (480, None), (PUBLISHED_NEURON_COUNT, PUBLISHED_NEURON_COUNT)):
        scaling = neuron_scaling(cores, acct, mem, curve_points=2)
        rows.append({"quantity": f"max neurons on {cores} cores", "model": scaling.max_neurons, "quoted": quoted})
    return rows


TABLES: dict[str, Callable[[SwallowConfig], list[Row]]] = {
    "ratios": ratios_table,
    "power": power_table,
    "energy": energy_table,
    "latency": latency_table,
    "rates": rates_table,
    "threads": threads_table,
    "comparison": comparison_table,
    "neurons": neurons_table,
}


def paper_table(name: str, cfg: SwallowConfig | None = None) -> list[Row]:
    """Build one of the named golden tables"""
    if name not in TABLES:
        raise NotFoundError(f"unknown table {name!r}; choose from {', '.join(TABLES)}")
    logger.debug(f"Building table {name}")
    return TABLES[name](cfg or SwallowConfig())
