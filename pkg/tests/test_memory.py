"""
Tests for memory scaling, remote stores and code overlays
"""

import pytest

from server.errors import InvalidArgumentError
from server.workloads.memory import (
    CORE_STORE_BYTES,
    NodeMemoryModel,
    OverlayRegion,
    memory_scaling,
    memory_scaling_curve,
    overlay_plan,
    remote_store_capacity,
    tasks_for,
)


class TestMemoryScaling:
    """Bytes per task as the machine grows"""

    def test_available_after_reservations(self):
        """Test the runtime reservation comes out of the 64 KB store"""
        assert NodeMemoryModel().available == CORE_STORE_BYTES - 69
        assert NodeMemoryModel(reserved_code=1000, reserved_os=0).available == CORE_STORE_BYTES - 1000

    def test_policies(self):
        """Test single, per-core and logarithmic task counts"""
        assert memory_scaling(16, "single") == 16 * CORE_STORE_BYTES
        assert memory_scaling(16, "per_core") == CORE_STORE_BYTES
        assert memory_scaling(4, "log") == 87381
        assert tasks_for(1024, "log") == 11

    def test_explicit_task_count(self):
        """Test an integer policy is a fixed task count"""
        assert memory_scaling(8, 2) == 4 * CORE_STORE_BYTES
        with pytest.raises(InvalidArgumentError):
            memory_scaling(8, 9)

    def test_rejects_empty_machine(self):
        """Test zero cores is invalid"""
        with pytest.raises(InvalidArgumentError):
            memory_scaling(0, "single")

    def test_curve(self):
        """Test the curve covers every power of two and policy"""
        rows = memory_scaling_curve(max_exponent=4)
        assert len(rows) == 5 * 3
        per_core = [r["bytes_per_task"] for r in rows if r["policy"] == "per_core"]
        assert set(per_core) == {CORE_STORE_BYTES}


class TestRemoteStores:
    """Cores given over to serving data"""

    def test_four_of_sixteen(self):
        """Test four store cores add a third of a store to each task"""
        cap = remote_store_capacity(16, 4)
        assert cap.compute_cores == 12
        assert cap.gained_bytes == 21845
        assert cap.per_task_bytes == 87381

    def test_no_stores(self):
        """Test zero store cores gain nothing"""
        assert remote_store_capacity(8, 0).gained_bytes == 0

    def test_all_stores(self):
        """Test at least one core must compute"""
        with pytest.raises(InvalidArgumentError):
            remote_store_capacity(8, 8)


class TestOverlays:
    """Swapping code regions"""

    def test_resident_size_and_faults(self):
        """Test a two-overlay region shrinks to one slot and faults on each switch"""
        region = OverlayRegion(start=100, end=199, overlays=2)
        assert region.slot == 50
        plan = overlay_plan(1000, [region], [100, 120, 150, 160, 110, 500])
        assert plan.resident_words == 950
        assert [f.position for f in plan.faults] == [0, 2, 4]
        assert [f.overlay for f in plan.faults] == [0, 1, 0]

    def test_region_must_split_evenly(self):
        """Test a region that does not divide into its overlays is refused"""
        with pytest.raises(ValueError):
            OverlayRegion(start=0, end=9, overlays=3)

    def test_overlapping_regions(self):
        """Test two regions may not share words"""
        regions = [OverlayRegion(start=0, end=99), OverlayRegion(start=50, end=149)]
        with pytest.raises(InvalidArgumentError):
            overlay_plan(1000, regions)

    def test_region_outside_program(self):
        """Test a region beyond the program end is refused"""
        with pytest.raises(InvalidArgumentError):
            overlay_plan(100, [OverlayRegion(start=50, end=149)])
