"""
Tests for the machine topology
"""

from collections import Counter

import networkx as nx
import pytest

from server.errors import InvalidArgumentError, NotFoundError
from server.model.topology import (
    BridgeSpec,
    LinkProfile,
    NodeId,
    Topology,
    WiringOverride,
    adjacency_rows,
    bridge_traffic_ceiling,
    build_topology,
    links_of,
    to_dot,
    validate_topology,
)


class TestNodeId:
    """Node naming"""

    def test_round_trip_text(self):
        """Test the s.d.c text form parses back to the same node"""
        node = NodeId(slice=3, device=5, core=1)
        assert str(node) == "s3.d5.c1"
        assert NodeId.parse("s3.d5.c1") == node

    def test_accepts_text_during_validation(self):
        """Test models holding a NodeId accept the text form"""
        assert NodeId.model_validate("s0.d7.c0") == NodeId(slice=0, device=7, core=0)

    def test_rejects_garbage(self):
        """Test malformed and out-of-range ids are refused"""
        with pytest.raises(InvalidArgumentError):
            NodeId.parse("node-4")
        with pytest.raises(InvalidArgumentError):
            NodeId.parse("s0.d8.c0")


class TestBuildTopology:
    """Lattice construction"""

    def test_single_slice_counts(self, one_slice: Topology):
        """Test one slice has 16 cores, 8 on-die and 10 on-board links"""
        classes = Counter(link.link_class for link in one_slice.links)
        assert one_slice.node_count == 16
        assert classes["on_die"] == 8
        assert classes["on_board_vertical"] == 6
        assert classes["on_board_horizontal"] == 4
        assert classes["off_board_cable"] == 0

    def test_full_machine_counts(self, full_machine: Topology):
        """Test the 30-slice machine has 480 cores and the expected link mix"""
        classes = Counter(link.link_class for link in full_machine.links)
        assert full_machine.node_count == 480
        assert (full_machine.width, full_machine.height) == (10, 24)
        assert classes["on_die"] == 240
        assert classes["on_board_vertical"] == 180
        assert classes["on_board_horizontal"] == 120
        assert classes["off_board_cable"] == 146

    def test_full_machine_validates_clean(self, full_machine: Topology):
        """Test a freshly built machine raises no findings"""
        report = validate_topology(full_machine)
        assert report.ok, [f.message for f in report.findings]

    def test_connected(self, full_machine: Topology):
        """Test the physical graph is a single component"""
        assert nx.is_connected(full_machine.graph)

    def test_degree_within_switch(self, full_machine: Topology):
        """Test no switch carries more than its 12 links and each has one on-die link"""
        for node in full_machine.nodes:
            links = links_of(full_machine, node)
            assert len(links) <= 12
            assert sum(1 for link in links if link.link_class == "on_die") == 1

    def test_layers_own_their_ports(self, one_slice: Topology):
        """Test vertical cores only use north/south and horizontal cores east/west"""
        for node in one_slice.nodes:
            ports = set(one_slice.port_links[one_slice.index_of(node)]) - {"die"}
            allowed = {"north", "south"} if node.core == 0 else {"east", "west"}
            assert ports <= allowed

    def test_position_round_trip(self, four_slices: Topology):
        """Test node_at inverts position for every node"""
        for node in four_slices.nodes:
            row, col = four_slices.position(node)
            assert four_slices.node_at(row, col, node.core) == node

    def test_device_layout_in_slice(self, one_slice: Topology):
        """Test devices sit two to a row, four rows high"""
        assert one_slice.position(NodeId(slice=0, device=0, core=0)) == (0, 0)
        assert one_slice.position(NodeId(slice=0, device=1, core=0)) == (0, 1)
        assert one_slice.position(NodeId(slice=0, device=6, core=1)) == (3, 0)

    def test_rejects_empty_machine(self):
        """Test zero slices is an invalid argument"""
        with pytest.raises(InvalidArgumentError):
            build_topology(0, 3)

    def test_unknown_node(self, one_slice: Topology):
        """Test a node on a missing slice is not found"""
        with pytest.raises(NotFoundError):
            one_slice.index_of(NodeId(slice=1, device=0, core=0))

    def test_link_profile_applied(self):
        """Test link timing comes from the profile"""
        t = build_topology(1, 1, LinkProfile.fastest())
        assert {link.rate_bps for link in t.links} == {500e6}
        assert {link.symbol_delay for link in t.links} == {2}


class TestWiringAndBridges:
    """Re-cabling and ethernet bridges"""

    def test_removed_link_flags_potential_disconnection(self):
        """Test cutting a vertical chain is reported but the graph stays connected"""
        cut = WiringOverride(op="remove", a=NodeId(slice=0, device=0, core=0), a_port="north")
        t = build_topology(1, 1, wiring=[cut])
        report = validate_topology(t)
        assert nx.is_connected(t.graph)
        messages = [f.message for f in report.of_kind("connectivity")]
        assert any("potential disconnection" in m for m in messages)

    def test_remove_missing_link(self):
        """Test removing from an empty port is not found"""
        cut = WiringOverride(op="remove", a=NodeId(slice=0, device=0, core=0), a_port="south")
        with pytest.raises(NotFoundError):
            build_topology(1, 1, wiring=[cut])

    def test_wrong_layer_link_is_a_degree_finding(self):
        """Test an east link on a vertical core is reported"""
        extra = WiringOverride(
            op="add",
            a=NodeId(slice=0, device=0, core=0),
            a_port="east",
            b=NodeId(slice=0, device=1, core=0),
            b_port="west",
        )
        report = validate_topology(build_topology(1, 1, wiring=[extra]))
        assert report.of_kind("degree")

    def test_bridge_on_free_south_port(self):
        """Test a bridge attaches to the bottom row of a slice"""
        t = build_topology(1, 1, bridges=[BridgeSpec(slice=0, column=1)])
        assert len(t.bridges) == 1
        assert t.bridges[0].node == NodeId(slice=0, device=1, core=0)
        assert bridge_traffic_ceiling(t) == pytest.approx(80 / 125)

    def test_bridge_needs_free_port(self):
        """Test a bridge on a slice above another is refused"""
        with pytest.raises(InvalidArgumentError):
            build_topology(1, 2, bridges=[BridgeSpec(slice=1, column=0)])

    def test_at_most_two_bridges(self):
        """Test a third bridge on one slice is refused"""
        bridges = [BridgeSpec(slice=0, column=0)] * 3
        with pytest.raises(InvalidArgumentError):
            build_topology(1, 1, bridges=bridges)

    def test_no_bridges_no_ceiling(self, one_slice: Topology):
        """Test the ceiling is zero without bridges"""
        assert bridge_traffic_ceiling(one_slice) == 0.0


class TestValidation:
    """Rate hierarchy and exports"""

    def test_equal_rates_break_hierarchy(self):
        """Test running every link at 500 Mbit/s is flagged"""
        report = validate_topology(build_topology(1, 1, LinkProfile.fastest()))
        findings = report.of_kind("rate_hierarchy")
        assert findings
        assert "internal bandwidths exceed external by 4" in findings[0].message

    def test_without_link_drops_one(self, one_slice: Topology):
        """Test unplugging a link leaves the others"""
        smaller = one_slice.without_link(0)
        assert len(smaller.links) == len(one_slice.links) - 1
        with pytest.raises(NotFoundError):
            one_slice.without_link(10_000)

    def test_adjacency_rows(self, one_slice: Topology):
        """Test one adjacency row per link"""
        rows = adjacency_rows(one_slice)
        assert len(rows) == len(one_slice.links)
        assert rows[0]["a"] == "s0.d0.c0"

    def test_dot_lists_every_link(self, one_slice: Topology):
        """Test the Graphviz export has an edge per link"""
        dot = to_dot(one_slice)
        assert dot.startswith("graph swallow {")
        assert dot.count(" -- ") == len(one_slice.links)
