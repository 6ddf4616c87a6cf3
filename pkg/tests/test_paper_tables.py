"""
Tests for the golden-number tables
"""

import pytest

from server.errors import NotFoundError
from server.model.paper_tables import TABLES, paper_table


def by_key(rows, key):
    return {row[key]: row for row in rows}


class TestPaperTables:
    """Model values beside the published ones"""

    def test_latency(self):
        """Test calibrated latencies on both link profiles"""
        rows = by_key(paper_table("latency"), "case")
        assert rows["token between packages"]["model_ns"] == pytest.approx(288.0)
        assert rows["word between packages"]["model_ns"] == pytest.approx(336.0)
        assert rows["word within a package"]["model_ns"] == pytest.approx(336.0)
        assert rows["word core-local"]["model_ns"] == pytest.approx(48.0)
        assert rows["token between packages"]["default_profile_ns"] == pytest.approx(336.0)
        assert rows["word between packages"]["default_profile_ns"] == pytest.approx(528.0)
        assert rows["synchronisation overhead"]["model_ns"] == 260.0

    def test_rates(self):
        """Test stream rates for the three path kinds"""
        rows = by_key(paper_table("rates"), "path")
        assert rows["internal circuit"]["model_mbps"] == pytest.approx(500.0, rel=1e-3)
        assert rows["internal packet"]["model_mbps"] == pytest.approx(435.5, rel=0.01)
        assert rows["external circuit"]["model_mbps"] == pytest.approx(125.0, rel=1e-3)

    def test_power(self):
        """Test core and system power against the measurements"""
        rows = by_key(paper_table("power"), "quantity")
        assert rows["core loaded @ 500 MHz (mW)"]["model"] == pytest.approx(196.0)
        assert rows["core idle @ 71 MHz (mW)"]["deviation"] == pytest.approx(0.0, abs=1e-9)
        assert rows["30-slice wall (W)"]["model"] == pytest.approx(136.6, abs=0.1)

    def test_ratios_and_comparison(self):
        """Test the Swallow rows lead the comparison tables"""
        ratios = paper_table("ratios")
        assert ratios[0]["system"] == "Swallow"
        assert ratios[0]["e_over_c"] == "2"
        assert ratios[0]["E_over_C"] == "8-32"
        comparison = paper_table("comparison")
        assert comparison[0]["power_per_core"] == "196mW"
        assert comparison[0]["cores_per_system"] == "16-480"

    def test_energy(self):
        """Test the on-die link shows both the table and the quoted-power figure"""
        rows = by_key(paper_table("energy"), "link_class")
        assert rows["off_board_cable"]["pj_per_bit"] == 5440.0
        assert rows["on_die (from quoted 1.4 mW)"]["pj_per_bit"] == pytest.approx(2.8)

    def test_threads_and_neurons(self):
        """Test thread saturation and neuron capacity rows"""
        threads = paper_table("threads")
        assert [r["aggregate_mips"] for r in threads][3:] == [500.0] * 5
        neurons = by_key(paper_table("neurons"), "quantity")
        assert neurons["neurons per core (small N)"]["model"] == 191
        assert neurons["max neurons on 1 cores"]["model"] == 179

    def test_every_table_builds(self):
        """Test each named table yields rows"""
        for name in TABLES:
            assert paper_table(name), name

    def test_unknown_table(self):
        """Test an unknown name is not found"""
        with pytest.raises(NotFoundError):
            paper_table("figure")
