"""
Tests for per-core computation and communication bounds
"""

import pytest

from server.errors import InvalidArgumentError
from server.model.core_model import (
    CommMetrics,
    CoreConfig,
    metrics_row,
    node_injection_limit,
    not_throttled,
    ratio_E_over_C,
    ratio_e_over_c,
    swallow_metrics,
    thread_throughput,
)
from server.model.topology import LinkProfile, Topology, build_topology


class TestThreadThroughput:
    """Pipeline sharing between threads"""

    @pytest.mark.parametrize("threads", [1, 2, 3, 4])
    def test_up_to_four_threads_run_at_quarter_clock(self, threads: int):
        """Test each thread gets 125 MIPS while the pipeline is not full"""
        result = thread_throughput(CoreConfig(active_threads=threads))
        assert result.per_thread_mips == 125.0
        assert result.aggregate_mips == 125.0 * threads

    @pytest.mark.parametrize("threads", [5, 8])
    def test_aggregate_saturates(self, threads: int):
        """Test more than four threads share 500 MIPS"""
        result = thread_throughput(CoreConfig(active_threads=threads))
        assert result.aggregate_mips == pytest.approx(500.0)
        assert result.per_thread_mips == pytest.approx(500.0 / threads)

    def test_scales_with_clock(self):
        """Test a slower clock slows every thread"""
        result = thread_throughput(CoreConfig(clock_mhz=100.0, active_threads=1))
        assert result.per_thread_mips == 25.0

    @pytest.mark.parametrize("threads", [0, 9])
    def test_rejects_thread_count(self, threads: int):
        """Test thread counts outside 1..8 are invalid"""
        with pytest.raises(InvalidArgumentError):
            thread_throughput(CoreConfig(active_threads=threads))


class TestCommMetrics:
    """Demand against capacity"""

    def test_injection_limit(self):
        """Test one byte per cycle is 4 Gbit/s at 500 MHz"""
        assert node_injection_limit(CoreConfig()) == 4e9

    def test_swallow_ratios(self, one_slice: Topology):
        """Test e/c is 2 and E/C spans 8 to 32"""
        congested = swallow_metrics(one_slice, "congested")
        disjoint = swallow_metrics(one_slice, "disjoint_paths")
        assert ratio_e_over_c(congested) == pytest.approx(2.0)
        assert ratio_E_over_C(congested) == pytest.approx(32.0)
        assert ratio_E_over_C(disjoint) == pytest.approx(8.0)
        assert not not_throttled(congested)

    def test_ratios_follow_machine_links(self):
        """Test faster external links shrink E/C for the machine built with them"""
        fast = build_topology(1, 1, LinkProfile.fastest())
        assert ratio_E_over_C(swallow_metrics(fast, "congested")) == pytest.approx(8.0)
        assert ratio_E_over_C(swallow_metrics(fast, "disjoint_paths")) == pytest.approx(2.0)
        assert ratio_e_over_c(swallow_metrics(fast, "congested")) == pytest.approx(2.0)

    def test_balanced_metrics_not_throttled(self):
        """Test ratios of at most one mean communication keeps up"""
        assert not_throttled(CommMetrics(e=1.0, c=1.0, E=0.5, C=1.0))
        assert not not_throttled(CommMetrics(e=1.0, c=1.0, E=1.5, C=1.0))

    def test_zero_capacity(self):
        """Test a zero capacity is rejected rather than divided by"""
        with pytest.raises(InvalidArgumentError):
            ratio_e_over_c(CommMetrics(e=1.0, c=0.0, E=1.0, C=1.0))
        with pytest.raises(InvalidArgumentError):
            ratio_E_over_C(CommMetrics(e=1.0, c=1.0, E=1.0, C=0.0))

    def test_metrics_row(self, full_machine: Topology):
        """Test the comparison row reports the machine and quoted capacity"""
        row = metrics_row(full_machine)
        assert row["cores"] == 480
        assert row["e_over_c"] == pytest.approx(2.0)
        assert (row["E_over_C_min"], row["E_over_C_max"]) == pytest.approx((8.0, 32.0))
        assert row["quoted_router_capacity_gbps"] == 4.5
