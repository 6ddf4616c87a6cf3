"""
Spiking-neuron case study: per-core capacity, machine scaling and an
event-driven Izhikevich run whose spikes become network traffic.

Every neuron copy keeps its state and event buffer inside its stack frame and
carries a connection table of at least N bits, so the table dominates once N
grows and the processors needed grow with N squared.
"""

import logging
import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..errors import CapacityExceededError, InvalidArgumentError
from ..model.network_sim import NetworkParams, SimReport, TrafficEntry, run
from ..model.routing import RoutingTables
from ..model.topology import NodeId, Topology
from .memory import NodeMemoryModel

logger = logging.getLogger(__name__)

SPIKE_BYTES = 4
PUBLISHED_NEURON_COUNT = 100_000


class NeuronAccounting(BaseModel):
    """Memory cost of simulated neurons on one core"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    state_bytes: int = Field(default=8, ge=0)
    event_buffer_bytes: int = Field(default=10, ge=0)
    shared_code_bytes: int = Field(default=1100, ge=0)
    stack_bytes_per_copy: int = Field(default=336, ge=0)
    state_in_stack: bool = True
    connectivity: float = Field(default=0.10, gt=0, le=1)

    def per_copy(self, N: int) -> int:
        own = 0 if self.state_in_stack else self.state_bytes + self.event_buffer_bytes
        return self.stack_bytes_per_copy + own + math.ceil(N / 8)


class IzhikevichParams(BaseModel):
    """Regular-spiking cortical neuron"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    a: float = 0.02
    b: float = 0.2
    c: float = -65.0
    d: float = 8.0
    threshold_mv: float = 30.0
    synaptic_current: float = 2.0


def neuron_capacity(
    N: int,
    mem: NodeMemoryModel | None = None,
    acct: NeuronAccounting | None = None,
) -> int:
    """Neuron copies one core can hold for a population of N"""
    if N < 1:
        raise InvalidArgumentError(f"population must be at least 1, got {N}")
    mem = mem or NodeMemoryModel()
    acct = acct or NeuronAccounting()
    room = mem.available - acct.shared_code_bytes
    if room <= 0:
        return 0
    return room // acct.per_copy(N)


def processors_required(
    N: int, mem: NodeMemoryModel | None = None, acct: NeuronAccounting | None = None
) -> int | None:
    """Fewest cores that hold N neurons, or None when a single copy does not fit"""
    per_core = neuron_capacity(N, mem, acct)
    if per_core == 0:
        return None
    return math.ceil(N / per_core)


class NeuronScaling(BaseModel):
    processors: int
    max_neurons: int
    neurons_per_core: int
    curve: list[dict[str, float]]


def neuron_scaling(
    P: int,
    acct: NeuronAccounting | None = None,
    mem: NodeMemoryModel | None = None,
    curve_points: int = 24,
) -> NeuronScaling:
    """Largest population a machine of P cores can hold, plus the scaling curve"""
    if P < 1:
        raise InvalidArgumentError(f"need at least one core, got {P}")
    mem = mem or NodeMemoryModel()
    acct = acct or NeuronAccounting()

    # P * capacity(N) - N strictly decreases in N, so bisect on it
    lo, hi = 0, 8 * mem.available + 8
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if mid <= P * neuron_capacity(mid, mem, acct):
            lo = mid
        else:
            hi = mid - 1
    best = lo

    curve = []
    for N in np.unique(np.geomspace(1, max(best, 2), curve_points).astype(int)):
        n = int(N)
        per_core = neuron_capacity(n, mem, acct)
        required = processors_required(n, mem, acct)
        curve.append(
            {
                "neurons": n,
                "neurons_per_core": per_core,
                "processors_required": required or 0,
                "p_over_n_squared": (required or 0) / n**2,
            }
        )
    return NeuronScaling(
        processors=P,
        max_neurons=best,
        neurons_per_core=neuron_capacity(max(best, 1), mem, acct),
        curve=curve,
    )


class SpikeEvent(BaseModel):
    time_ns: float
    neuron: int


class NeuronRunResult(BaseModel):
    neurons: int
    placement: list[NodeId]
    spikes: list[SpikeEvent]
    messages: int
    fan_out: int
    report: SimReport


def fan_out_for(N: int, connectivity: float) -> int:
    """Targets per neuron; rounded first so 0.1 * 30 counts as 3"""
    return math.ceil(round(connectivity * (N - 1), 9))


def connection_sets(N: int, connectivity: float, seed: int | None) -> np.ndarray:
    """Boolean N x N matrix; row i marks the neurons i projects to, never itself"""
    rng = np.random.default_rng(seed)
    fan_out = fan_out_for(N, connectivity)
    targets = np.zeros((N, N), dtype=bool)
    for i in range(N):
        picks = rng.choice(N - 1, size=fan_out, replace=False)
        picks[picks >= i] += 1
        targets[i, picks] = True
    return targets


def place_neurons(N: int, t: Topology, per_core_limit: int) -> list[NodeId]:
    """Spread neurons as thinly as the machine allows, consecutive ids sharing a core"""
    per_core = max(1, math.ceil(N / t.node_count))
    if per_core > per_core_limit:
        raise CapacityExceededError(
            f"{N} neurons need {per_core} per core on {t.node_count} cores, "
            f"neuron_capacity allows {per_core_limit}"
        )
    return [t.nodes[i // per_core] for i in range(N)]


def izhikevich_step(
    v: np.ndarray, u: np.ndarray, current: np.ndarray, p: IzhikevichParams
) -> np.ndarray:
    """Advance one millisecond in place; returns the mask of neurons that fired"""
    fired = v >= p.threshold_mv
    v[fired] = p.c
    u[fired] += p.d
    for _ in range(2):
        v += 0.5 * (0.04 * v * v + 5 * v + 140 - u + current)
    u += p.a * (p.b * v - u)
    np.minimum(v, p.threshold_mv, out=v, where=v > p.threshold_mv)
    return fired


def run_neuron_sim(
    N: int,
    t: Topology,
    tables: RoutingTables,
    stimulus: dict[int, float] | None = None,
    duration_ms: int = 100,
    acct: NeuronAccounting | None = None,
    mem: NodeMemoryModel | None = None,
    izh: IzhikevichParams | None = None,
    params: NetworkParams | None = None,
    seed: int | None = None,
) -> NeuronRunResult:
    """Integrate the population and send each spike to its connection set.

    Neurons sleep unless driven: ``stimulus`` maps neuron ids to a constant
    input current. A spike becomes one point-to-point message per target.
    """
    acct = acct or NeuronAccounting()
    izh = izh or IzhikevichParams()
    per_core = neuron_capacity(N, mem, acct)
    placement = place_neurons(N, t, per_core)
    targets = connection_sets(N, acct.connectivity, seed) if N > 1 else np.zeros((1, 1), dtype=bool)
    fan_out = int(targets[0].sum())

    drive = np.zeros(N)
    for neuron, current in (stimulus or {}).items():
        if not 0 <= neuron < N:
            raise InvalidArgumentError(f"stimulus names neuron {neuron}, population is {N}")
        drive[neuron] = current

    v = np.full(N, izh.c)
    u = izh.b * v
    synaptic = np.zeros(N)
    spikes: list[SpikeEvent] = []
    traffic: list[TrafficEntry] = []
    logger.info(f"Running {N} neurons for {duration_ms} ms on {t.node_count} cores")
    for ms in range(duration_ms):
        fired = izhikevich_step(v, u, drive + synaptic, izh)
        synaptic[:] = 0.0
        for neuron in np.flatnonzero(fired):
            when = ms * 1e6
            spikes.append(SpikeEvent(time_ns=when, neuron=int(neuron)))
            receivers = np.flatnonzero(targets[neuron])
            synaptic[receivers] += izh.synaptic_current
            src = placement[neuron]
            for target in receivers:
                traffic.append(
                    TrafficEntry(
                        time_ns=when,
                        src=src,
                        dst=placement[int(target)],
                        bytes=SPIKE_BYTES,
                        channel=int(neuron),
                    )
                )

    report = run(t, tables, traffic, params)
    logger.info(f"Neuron run: {len(spikes)} spikes, {len(traffic)} messages")
    return NeuronRunResult(
        neurons=N,
        placement=placement,
        spikes=spikes,
        messages=len(traffic),
        fan_out=fan_out,
        report=report,
    )
