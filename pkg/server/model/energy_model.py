"""
Core, link, node and system power, DVFS projection and run energy attribution
"""

import logging
import math
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..errors import InvalidArgumentError
from .network_sim import SimReport
from .topology import CORES_PER_SLICE, LinkClass, LinkProfile

logger = logging.getLogger(__name__)

Load = Literal["active_loaded", "idle"]

MAX_CLOCK_MHZ = 500.0
LOADED_THREADS = 4
MEASURED_LOADED_MW = {500.0: 193.0, 71.0: 65.0}
MEASURED_SLICE_CORES_W = 3.1
MEASURED_SLICE_WALL_W = 4.5
MEASURED_SYSTEM_WALL_W = 134.0
# the on-die link's quoted 1.4 mW at 500 Mbit/s works out to 2.8 pJ/bit,
# while the per-bit table lists 1.63; the table is used for energy
QUOTED_ON_DIE_LINK_MW = 1.4


def fit_line(p0: tuple[float, float], p1: tuple[float, float]) -> tuple[float, float]:
    """Intercept and slope of the line through two (f, mW) points"""
    (f0, w0), (f1, w1) = p0, p1
    slope = (w1 - w0) / (f1 - f0)
    return w0 - slope * f0, slope


_IDLE_STATIC, _IDLE_SLOPE = fit_line((71.0, 50.0), (500.0, 113.0))


class PowerProfile(BaseModel):
    """Per-core power lines and the voltage/frequency operating points"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    static_mw: float = Field(default=46.0, ge=0)
    dyn_mw_per_mhz: float = Field(default=0.30, ge=0)
    idle_static_mw: float = Field(default=_IDLE_STATIC, ge=0)
    idle_dyn_mw_per_mhz: float = Field(default=_IDLE_SLOPE, ge=0)
    v_ref: float = Field(default=1.0, gt=0)
    v_points: tuple[tuple[float, float], ...] = ((71.0, 0.60), (500.0, 0.95))
    static_voltage_exponent: Literal[1, 2] = 1
    wall_factor: float = Field(default=MEASURED_SLICE_WALL_W / MEASURED_SLICE_CORES_W, ge=1)

    @model_validator(mode="after")
    def _monotone_points(self) -> "PowerProfile":
        freqs = [f for f, _ in self.v_points]
        volts = [v for _, v in self.v_points]
        if len(freqs) < 2 or freqs != sorted(freqs) or volts != sorted(volts):
            raise ValueError("v_points must hold at least two points increasing in f and V")
        return self

    @property
    def eff_capacitance_nf(self) -> float:
        """C in P = CV^2f that reproduces the dynamic coefficient at v_ref"""
        return self.dyn_mw_per_mhz * 1e-3 / 1e6 / self.v_ref**2 * 1e9

    @property
    def f_range(self) -> tuple[float, float]:
        return self.v_points[0][0], self.v_points[-1][0]


class LinkEnergyTable(BaseModel):
    """Energy per bit for each link class, pJ"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    on_die: float = 1.63
    on_board_vertical: float = 106.0
    on_board_horizontal: float = 101.0
    off_board_cable: float = 5440.0

    def pj_per_bit(self, link_class: LinkClass) -> float:
        return getattr(self, link_class)

    @classmethod
    def from_links(cls, links: LinkProfile) -> "LinkEnergyTable":
        return cls(
            **{
                name: links.for_class(name).energy_pj_per_bit
                for name in ("on_die", "on_board_vertical", "on_board_horizontal", "off_board_cable")
            }
        )


class NodeBreakdown(BaseModel):
    """Where a slice's wall power goes"""

    model_config = ConfigDict(frozen=True)

    psu_fraction: float = 0.26
    compute_fraction: float = 0.30
    waste_fraction: float = 0.40
    network_fraction: float = 0.04

    @model_validator(mode="after")
    def _sums_to_one(self) -> "NodeBreakdown":
        total = math.fsum(
            [self.psu_fraction, self.compute_fraction, self.waste_fraction, self.network_fraction]
        )
        if not math.isclose(total, 1.0, abs_tol=1e-12):
            raise ValueError(f"breakdown fractions sum to {total}, not 1")
        return self


def _check_clock(f: float, profile: PowerProfile) -> None:
    if not 0 < f <= MAX_CLOCK_MHZ:
        raise InvalidArgumentError(f"clock must be within (0, {MAX_CLOCK_MHZ:g}] MHz, got {f}")


def core_power(f: float, load: Load, profile: PowerProfile | None = None) -> float:
    """Core power in mW at ``f`` MHz, fully loaded or idle"""
    profile = profile or PowerProfile()
    _check_clock(f, profile)
    if load == "active_loaded":
        return profile.static_mw + profile.dyn_mw_per_mhz * f
    return profile.idle_static_mw + profile.idle_dyn_mw_per_mhz * f


def core_power_threads(f: float, threads: int, profile: PowerProfile | None = None) -> float:
    """Between the idle and loaded lines, linear in threads up to four"""
    if not 0 <= threads <= 8:
        raise InvalidArgumentError(f"threads must be within 0..8, got {threads}")
    idle = core_power(f, "idle", profile)
    loaded = core_power(f, "active_loaded", profile)
    share = min(threads, LOADED_THREADS) / LOADED_THREADS
    return idle + (loaded - idle) * share


def voltage_at(f: float, profile: PowerProfile | None = None) -> float:
    profile = profile or PowerProfile()
    lo, hi = profile.f_range
    if not lo <= f <= hi:
        raise InvalidArgumentError(
            f"no voltage characterised for {f} MHz, range is {lo:g}..{hi:g} MHz"
        )
    freqs, volts = zip(*profile.v_points, strict=True)
    return float(np.interp(f, freqs, volts))


def dvfs_power(
    f: float, profile: PowerProfile | None = None, voltage: float | None = None
) -> float:
    """Loaded core power when the supply follows the frequency.

    Dynamic power scales with V^2, static power with V raised to the
    profile's exponent.
    """
    profile = profile or PowerProfile()
    _check_clock(f, profile)
    # the frequency must be characterised even when the supply is given
    characterised = voltage_at(f, profile)
    if voltage is not None and voltage <= 0:
        raise InvalidArgumentError(f"supply voltage must be positive, got {voltage}")
    v = voltage if voltage is not None else characterised
    scale = v / profile.v_ref
    return (
        profile.static_mw * scale**profile.static_voltage_exponent
        + profile.dyn_mw_per_mhz * f * scale**2
    )


def dvfs_curve(
    points: int = 16, profile: PowerProfile | None = None
) -> list[dict[str, float]]:
    """Frequency-only against voltage-scaled power across the characterised range"""
    profile = profile or PowerProfile()
    lo, hi = profile.f_range
    rows = []
    for f in np.linspace(lo, hi, max(points, 2)):
        f = float(f)
        freq_only = core_power(f, "active_loaded", profile)
        scaled = dvfs_power(f, profile)
        rows.append(
            {
                "f_mhz": f,
                "voltage": voltage_at(f, profile),
                "frequency_only_mw": freq_only,
                "dvfs_mw": scaled,
                "saving_fraction": 1 - scaled / freq_only,
            }
        )
    return rows


def link_energy(
    link_class: LinkClass, bits: float, table: LinkEnergyTable | None = None
) -> float:
    """Joules to move ``bits`` over one link of the class"""
    if bits < 0:
        raise InvalidArgumentError(f"bit count must be non-negative, got {bits}")
    table = table or LinkEnergyTable()
    return bits * table.pj_per_bit(link_class) * 1e-12


def link_power_mw(
    link_class: LinkClass, rate_bps: float, table: LinkEnergyTable | None = None
) -> float:
    """Power of a link kept busy at ``rate_bps``"""
    return link_energy(link_class, rate_bps, table) * 1e3


class SystemPower(BaseModel):
    slices: int
    cores: int
    clock_mhz: float
    core_mw: float
    cores_w: float
    wall_w: float
    per_slice_cores_w: float
    per_slice_wall_w: float
    per_core_wall_mw: float
    breakdown_w: dict[str, float]


def system_power(
    slices: int,
    load: Load = "active_loaded",
    f: float = MAX_CLOCK_MHZ,
    profile: PowerProfile | None = None,
    breakdown: NodeBreakdown | None = None,
) -> SystemPower:
    """Core-only and wall power of a machine of ``slices`` slices"""
    if slices < 1:
        raise InvalidArgumentError(f"need at least one slice, got {slices}")
    profile = profile or PowerProfile()
    breakdown = breakdown or NodeBreakdown()
    per_core = core_power(f, load, profile)
    cores = CORES_PER_SLICE * slices
    cores_w = per_core * cores / 1e3
    wall_w = cores_w * profile.wall_factor
    return SystemPower(
        slices=slices,
        cores=cores,
        clock_mhz=f,
        core_mw=per_core,
        cores_w=cores_w,
        wall_w=wall_w,
        per_slice_cores_w=cores_w / slices,
        per_slice_wall_w=wall_w / slices,
        per_core_wall_mw=wall_w / cores * 1e3,
        breakdown_w={
            "psu": wall_w * breakdown.psu_fraction,
            "compute": wall_w * breakdown.compute_fraction,
            "waste": wall_w * breakdown.waste_fraction,
            "network": wall_w * breakdown.network_fraction,
        },
    )


class EnergyComponent(BaseModel):
    component: str
    joules: float
    fraction: float = 0.0


class EnergyReport(BaseModel):
    total_j: float
    duration_ns: float
    components: list[EnergyComponent]

    def joules_of(self, component: str) -> float:
        return math.fsum(c.joules for c in self.components if c.component == component)


def run_energy(
    rep: SimReport,
    profile: PowerProfile | None = None,
    link_table: LinkEnergyTable | None = None,
    clock_mhz: float = MAX_CLOCK_MHZ,
    duration_ns: float | None = None,
) -> EnergyReport:
    """Attribute the energy of a simulated run to core activity and link classes.

    A core counts as loaded while it has a message in flight and idle
    otherwise; links cost their per-bit energy for every token carried.
    """
    profile = profile or PowerProfile()
    link_table = link_table or LinkEnergyTable()
    duration = rep.wall_ns if duration_ns is None else duration_ns
    if duration < 0:
        raise InvalidArgumentError(f"duration must be non-negative, got {duration}")
    loaded_w = core_power(clock_mhz, "active_loaded", profile) / 1e3
    idle_w = core_power(clock_mhz, "idle", profile) / 1e3

    active_ns = [min(rep.node_active_ns.get(n, 0.0), duration) for n in range(rep.node_count)]
    busy_s = math.fsum(active_ns) / 1e9
    idle_s = math.fsum(duration - a for a in active_ns) / 1e9
    components = [
        EnergyComponent(component="cores_active", joules=busy_s * loaded_w),
        EnergyComponent(component="cores_idle", joules=idle_s * idle_w),
    ]
    per_class: dict[str, list[float]] = {}
    for usage in sorted(rep.links.values(), key=lambda u: u.link):
        per_class.setdefault(usage.link_class, []).append(
            link_energy(usage.link_class, usage.bits, link_table)
        )
    for link_class in sorted(per_class):
        components.append(
            EnergyComponent(component=f"link_{link_class}", joules=math.fsum(per_class[link_class]))
        )

    total = math.fsum(c.joules for c in components)
    for c in components:
        c.fraction = c.joules / total if total > 0 else 0.0
    logger.debug(f"Run energy {total:.6g} J over {duration:.0f} ns")
    return EnergyReport(total_j=total, duration_ns=duration, components=components)
