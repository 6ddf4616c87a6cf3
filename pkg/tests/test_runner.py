"""
Tests for running configured workloads
"""

import pytest

from server.config import SwallowConfig
from server.errors import InvalidArgumentError
from server.model.routing import RoutingTables
from server.model.topology import NodeId, Topology
from server.workloads.paradigms import WorkloadSpec
from server.workloads.runner import run_workload
from server.workloads.shared_memory import MemoryAccess


def config_for(**workload) -> SwallowConfig:
    return SwallowConfig(workload=WorkloadSpec(**workload))


class TestRunWorkload:
    """Dispatch by workload kind"""

    def test_farmer_worker(self, one_slice: Topology, one_slice_tables: RoutingTables):
        """Test the farm summary and placement table"""
        outcome = run_workload(config_for(kind="farmer_worker", workers=7), one_slice, one_slice_tables)
        assert outcome.kind == "farmer_worker"
        assert outcome.summary["workers"] == 7
        assert outcome.summary["messages"] == 14
        assert len(outcome.tables["placement"]) == 7
        assert outcome.report.conserved()

    def test_pipeline(self, one_slice: Topology, one_slice_tables: RoutingTables):
        """Test the last stage has no outgoing rate"""
        outcome = run_workload(config_for(kind="pipeline", stages=3), one_slice, one_slice_tables)
        stages = outcome.tables["stages"]
        assert len(stages) == 3
        assert stages[-1]["outgoing_rate_mbps"] is None
        assert outcome.summary["throughput_mbps"] == pytest.approx(125.0)

    def test_neuron_sim(self, one_slice: Topology, one_slice_tables: RoutingTables):
        """Test spikes and both scaling curves are produced"""
        cfg = config_for(kind="neuron_sim", neurons=20, duration_ms=50, stimulated=[0, 1])
        outcome = run_workload(cfg, one_slice, one_slice_tables, seed=3)
        assert outcome.summary["fan_out"] == 2
        assert outcome.summary["spikes"] == len(outcome.tables["spikes"])
        assert outcome.tables["neuron_scaling"]
        assert outcome.tables["memory_scaling"]

    def test_shared_memory(self, one_slice: Topology, one_slice_tables: RoutingTables):
        """Test the trace and histogram tables"""
        cfg = config_for(kind="shared_memory", controllers=2, shared_bytes=1024, accesses=10)
        outcome = run_workload(cfg, one_slice, one_slice_tables, seed=1)
        assert len(outcome.tables["trace"]) == 10
        assert sum(row["count"] for row in outcome.tables["latency_histogram"]) == 10
        assert outcome.report.in_flight_bytes == 0

    def test_seed_reproduces(self, one_slice: Topology, one_slice_tables: RoutingTables):
        """Test the same seed gives the same trace"""
        cfg = config_for(kind="shared_memory", controllers=2, shared_bytes=1024, accesses=10)
        first = run_workload(cfg, one_slice, one_slice_tables, seed=5)
        second = run_workload(cfg, one_slice, one_slice_tables, seed=5)
        assert first.tables["trace"] == second.tables["trace"]

    def test_given_trace_replaces_generated(
        self, one_slice: Topology, one_slice_tables: RoutingTables
    ):
        """Test a supplied access trace is run instead of a generated one"""
        cfg = config_for(kind="shared_memory", controllers=2, shared_bytes=1024, accesses=10)
        requester = NodeId.parse("s0.d3.c1")
        trace = [
            MemoryAccess(time_ns=0.0, op="read", address=6, node=requester),
            MemoryAccess(time_ns=50.0, op="write", address=7, size=8, node=requester),
        ]
        outcome = run_workload(cfg, one_slice, one_slice_tables, trace=trace)
        assert outcome.summary["accesses"] == 2
        assert [row["address"] for row in outcome.tables["trace"]] == [6, 7]
        assert {row["node"] for row in outcome.tables["trace"]} == {"s0.d3.c1"}

    def test_trace_needs_shared_memory(
        self, one_slice: Topology, one_slice_tables: RoutingTables
    ):
        """Test a trace given to another workload kind is refused"""
        trace = [MemoryAccess(time_ns=0.0, op="read", address=0)]
        with pytest.raises(InvalidArgumentError):
            run_workload(config_for(kind="pipeline", stages=3), one_slice, one_slice_tables, trace=trace)
