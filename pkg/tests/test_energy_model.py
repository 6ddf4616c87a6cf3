"""
Tests for the power and energy model
"""

import pytest

from server.errors import InvalidArgumentError
from server.model.energy_model import (
    LinkEnergyTable,
    NodeBreakdown,
    PowerProfile,
    core_power,
    core_power_threads,
    dvfs_curve,
    dvfs_power,
    link_energy,
    link_power_mw,
    run_energy,
    system_power,
    voltage_at,
)
from server.model.network_sim import SimReport, TrafficEntry, run
from server.model.routing import generate_tables
from server.model.topology import LinkProfile, NodeId, build_topology


class TestCorePower:
    """Per-core power lines"""

    def test_loaded_at_full_clock(self):
        """Test a loaded core draws 196 mW at 500 MHz"""
        assert core_power(500, "active_loaded") == pytest.approx(196.0)

    def test_idle_line_through_measurements(self):
        """Test the idle line passes through both measured points"""
        assert core_power(71, "idle") == pytest.approx(50.0)
        assert core_power(500, "idle") == pytest.approx(113.0)

    def test_rejects_clock(self):
        """Test clocks outside (0, 500] MHz are invalid"""
        with pytest.raises(InvalidArgumentError):
            core_power(0, "idle")
        with pytest.raises(InvalidArgumentError):
            core_power(501, "active_loaded")

    def test_threads_interpolate(self):
        """Test two threads sit halfway between idle and loaded"""
        idle = core_power(500, "idle")
        loaded = core_power(500, "active_loaded")
        assert core_power_threads(500, 0) == pytest.approx(idle)
        assert core_power_threads(500, 2) == pytest.approx((idle + loaded) / 2)
        assert core_power_threads(500, 8) == pytest.approx(loaded)


class TestDvfs:
    """Voltage-following power"""

    def test_voltage_interpolation(self):
        """Test voltage between the operating points is linear"""
        assert voltage_at(71) == pytest.approx(0.60)
        assert voltage_at(500) == pytest.approx(0.95)
        with pytest.raises(InvalidArgumentError):
            voltage_at(50)

    def test_dvfs_points(self):
        """Test scaled power at both ends of the range"""
        assert dvfs_power(500) == pytest.approx(179.075)
        assert dvfs_power(71) == pytest.approx(35.268)

    def test_explicit_voltage(self):
        """Test a given supply is range-checked like a derived one"""
        profile = PowerProfile()
        assert dvfs_power(500, profile, voltage=profile.v_ref) == pytest.approx(
            core_power(500, "active_loaded", profile)
        )
        with pytest.raises(InvalidArgumentError):
            dvfs_power(50, profile, voltage=0.6)
        with pytest.raises(InvalidArgumentError):
            dvfs_power(500, profile, voltage=0.0)

    def test_dvfs_never_exceeds_frequency_only(self):
        """Test voltage scaling only ever saves power"""
        rows = dvfs_curve(8)
        assert len(rows) == 8
        assert rows[0]["f_mhz"] == pytest.approx(71.0)
        assert rows[-1]["f_mhz"] == pytest.approx(500.0)
        assert all(r["dvfs_mw"] <= r["frequency_only_mw"] for r in rows)
        assert all(0 <= r["saving_fraction"] < 1 for r in rows)

    def test_profile_rejects_unordered_points(self):
        """Test operating points must increase together"""
        with pytest.raises(ValueError):
            PowerProfile(v_points=((500.0, 0.95), (71.0, 0.60)))


class TestSystemPower:
    """Whole-machine power"""

    def test_thirty_slices(self):
        """Test the 480-core machine draws about 137 W at the wall"""
        power = system_power(30)
        assert power.cores == 480
        assert power.cores_w == pytest.approx(94.08)
        assert power.wall_w == pytest.approx(136.6, abs=0.1)
        assert sum(power.breakdown_w.values()) == pytest.approx(power.wall_w)

    def test_per_core_wall_power(self):
        """Test wall power per core stays flat with machine size"""
        one = system_power(1)
        many = system_power(30)
        assert one.per_core_wall_mw == pytest.approx(many.per_core_wall_mw)

    def test_rejects_zero_slices(self):
        """Test an empty machine is invalid"""
        with pytest.raises(InvalidArgumentError):
            system_power(0)

    def test_breakdown_must_sum_to_one(self):
        """Test breakdown fractions are validated"""
        with pytest.raises(ValueError):
            NodeBreakdown(psu_fraction=0.5)


class TestLinkEnergy:
    """Per-bit link energy"""

    def test_off_board_megabit(self):
        """Test a megabit over a cable costs 5.44 mJ"""
        assert link_energy("off_board_cable", 1e6) == pytest.approx(5.44e-3)

    def test_on_die_power(self):
        """Test a busy on-die link draws under a milliwatt by the per-bit table"""
        assert link_power_mw("on_die", 500e6) == pytest.approx(0.815)

    def test_negative_bits(self):
        """Test a negative bit count is rejected"""
        with pytest.raises(InvalidArgumentError):
            link_energy("on_die", -1)

    def test_table_from_links(self):
        """Test the energy table follows the link profile"""
        assert LinkEnergyTable.from_links(LinkProfile()) == LinkEnergyTable()


class TestRunEnergy:
    """Energy attribution for a simulated run"""

    def test_cable_bits_attributed(self):
        """Test a packet across slices is charged at the cable rate"""
        t = build_topology(2, 1)
        tables = generate_tables(t)
        entry = TrafficEntry(
            time_ns=0, src=NodeId.parse("s0.d1.c1"), dst=NodeId.parse("s1.d0.c1"), bytes=10
        )
        rep = run(t, tables, [entry])
        energy = run_energy(rep)
        # 3 header + 10 data + 1 close token
        assert energy.joules_of("link_off_board_cable") == pytest.approx(14 * 8 * 5440e-12)
        assert energy.total_j == pytest.approx(sum(c.joules for c in energy.components))
        assert sum(c.fraction for c in energy.components) == pytest.approx(1.0)

    def test_idle_machine(self):
        """Test a run with no traffic only costs idle power"""
        rep = SimReport(node_count=16)
        energy = run_energy(rep, duration_ns=1e9)
        assert energy.joules_of("cores_active") == 0.0
        assert energy.joules_of("cores_idle") == pytest.approx(16 * 0.113)

    def test_rejects_negative_duration(self):
        """Test a negative duration is invalid"""
        with pytest.raises(InvalidArgumentError):
            run_energy(SimReport(), duration_ns=-1.0)
