"""
Tests for the spiking-neuron case study
"""

import numpy as np
import pytest

from server.errors import CapacityExceededError, InvalidArgumentError
from server.model.routing import RoutingTables
from server.model.topology import Topology
from server.workloads.memory import NodeMemoryModel
from server.workloads.neurons import (
    IzhikevichParams,
    NeuronAccounting,
    connection_sets,
    fan_out_for,
    izhikevich_step,
    neuron_capacity,
    neuron_scaling,
    place_neurons,
    processors_required,
    run_neuron_sim,
)


class TestCapacity:
    """Neurons per core and cores per population"""

    def test_known_points(self):
        """Test capacity for a tiny and a large population"""
        assert neuron_capacity(1) == 191
        assert neuron_capacity(10_000) == 40
        assert processors_required(10_000) == 250

    def test_matches_closed_form(self):
        """Test capacity over a range of N against the array formula"""
        sizes = np.unique(np.geomspace(1, 100_000, 200).astype(np.int64))
        room = NodeMemoryModel().available - NeuronAccounting().shared_code_bytes
        expected = room // (336 + np.ceil(sizes / 8).astype(np.int64))
        assert [neuron_capacity(int(n)) for n in sizes] == expected.tolist()

    def test_state_outside_stack(self):
        """Test keeping state off the stack costs 18 more bytes per copy"""
        acct = NeuronAccounting(state_in_stack=False)
        assert acct.per_copy(8) == 336 + 18 + 1

    def test_copy_too_big(self):
        """Test a population whose table overflows the store needs no finite core count"""
        assert neuron_capacity(600_000) == 0
        assert processors_required(600_000) is None

    def test_rejects_empty_population(self):
        """Test N below one is invalid"""
        with pytest.raises(InvalidArgumentError):
            neuron_capacity(0)


class TestScaling:
    """Largest population per machine size"""

    def test_single_core(self):
        """Test one core holds 179 neurons"""
        assert neuron_scaling(1).max_neurons == 179

    def test_grows_with_cores(self):
        """Test more cores never hold fewer neurons"""
        sizes = [neuron_scaling(p).max_neurons for p in (1, 16, 480)]
        assert sizes == sorted(sizes)

    def test_best_is_tight(self):
        """Test one more neuron would not fit"""
        result = neuron_scaling(16)
        best = result.max_neurons
        assert best <= 16 * neuron_capacity(best)
        assert best + 1 > 16 * neuron_capacity(best + 1)

    def test_curve_is_quadratic_in_the_large(self):
        """Test processors grow roughly with N squared for big populations"""
        curve = neuron_scaling(480).curve
        tail = [row for row in curve if row["neurons"] > 1000]
        assert tail
        ratios = [row["p_over_n_squared"] for row in tail]
        assert max(ratios) / min(ratios) < 10


class TestConnections:
    """Random projections"""

    def test_fan_out(self):
        """Test fan out rounds up but is exact on whole products"""
        assert fan_out_for(10, 0.1) == 1
        assert fan_out_for(31, 0.1) == 3
        assert fan_out_for(20, 0.1) == 2

    def test_connection_sets(self):
        """Test rows have the fan out and no neuron targets itself"""
        targets = connection_sets(50, 0.1, seed=4)
        assert targets.shape == (50, 50)
        assert (targets.sum(axis=1) == fan_out_for(50, 0.1)).all()
        assert not targets.diagonal().any()

    def test_seeded(self):
        """Test the same seed gives the same sets"""
        assert (connection_sets(30, 0.2, 9) == connection_sets(30, 0.2, 9)).all()


class TestIzhikevich:
    """Neuron dynamics and the spike traffic they produce"""

    def test_resting_neuron_stays_quiet(self):
        """Test an undriven neuron never fires"""
        p = IzhikevichParams()
        v = np.full(1, p.c)
        u = p.b * v
        fired = [izhikevich_step(v, u, np.zeros(1), p)[0] for _ in range(200)]
        assert not any(fired)

    def test_driven_neuron_fires(self):
        """Test a constant input makes a neuron spike repeatedly"""
        p = IzhikevichParams()
        v = np.full(1, p.c)
        u = p.b * v
        fired = sum(bool(izhikevich_step(v, u, np.full(1, 10.0), p)[0]) for _ in range(200))
        assert fired >= 2

    def test_placement_packs_consecutive_ids(self, one_slice: Topology):
        """Test neurons share cores in id order and respect capacity"""
        placement = place_neurons(20, one_slice, per_core_limit=5)
        assert placement[0] == placement[1] == one_slice.nodes[0]
        assert placement[2] == one_slice.nodes[1]
        with pytest.raises(CapacityExceededError):
            place_neurons(1000, one_slice, per_core_limit=10)

    def test_run(self, one_slice: Topology, one_slice_tables: RoutingTables):
        """Test spikes become one message per target and all are delivered"""
        result = run_neuron_sim(
            20, one_slice, one_slice_tables, stimulus={0: 10.0}, duration_ms=100, seed=1
        )
        assert result.fan_out == 2
        assert result.spikes
        assert result.messages == len(result.spikes) * result.fan_out
        assert result.report.conserved()
        assert result.report.in_flight_bytes == 0
        assert [s.time_ns for s in result.spikes] == sorted(s.time_ns for s in result.spikes)

    def test_unknown_stimulus_target(self, one_slice: Topology, one_slice_tables: RoutingTables):
        """Test stimulating a neuron outside the population is refused"""
        with pytest.raises(InvalidArgumentError):
            run_neuron_sim(10, one_slice, one_slice_tables, stimulus={10: 5.0}, duration_ms=1)
