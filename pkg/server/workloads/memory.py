"""
Memory available to tasks: per-core store, remote data stores and code overlays
"""

import math
from collections.abc import Sequence
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..errors import InvalidArgumentError

TaskPolicy = Literal["single", "per_core", "log"]

CORE_STORE_BYTES = 64 * 1024


class NodeMemoryModel(BaseModel):
    """One core's directly addressable store, shared by code and data"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    total_bytes: int = Field(default=CORE_STORE_BYTES, gt=0)
    reserved_code: int = Field(default=0, ge=0)
    reserved_os: int = Field(default=69, ge=0)

    @property
    def available(self) -> int:
        return self.total_bytes - self.reserved_code - self.reserved_os


def tasks_for(P: int, policy: TaskPolicy | int) -> int:
    """Task count for a machine of P cores under a named policy"""
    if isinstance(policy, int):
        return policy
    if policy == "single":
        return 1
    if policy == "per_core":
        return P
    return int(math.log2(P)) + 1


def memory_scaling(
    P: int,
    tasks: TaskPolicy | int,
    mem: NodeMemoryModel | None = None,
) -> int:
    """Bytes each task can address when the machine's stores are split evenly"""
    if P < 1:
        raise InvalidArgumentError(f"need at least one core, got {P}")
    count = tasks_for(P, tasks)
    if not 1 <= count <= P:
        raise InvalidArgumentError(f"task count must be within 1..{P}, got {count}")
    total = (mem or NodeMemoryModel()).total_bytes
    return total * P // count


def memory_scaling_curve(
    max_exponent: int = 10,
    policies: Sequence[TaskPolicy] = ("single", "per_core", "log"),
    mem: NodeMemoryModel | None = None,
) -> list[dict[str, int | str]]:
    """Rows of (P, policy, tasks, bytes per task) for P = 1, 2, 4 ... 2^max_exponent"""
    rows: list[dict[str, int | str]] = []
    for k in range(max_exponent + 1):
        P = 1 << k
        for policy in policies:
            rows.append(
                {
                    "cores": P,
                    "policy": policy,
                    "tasks": tasks_for(P, policy),
                    "bytes_per_task": memory_scaling(P, policy, mem),
                }
            )
    return rows


class RemoteStoreCapacity(BaseModel):
    compute_cores: int
    store_cores: int
    per_task_bytes: int
    gained_bytes: int


def remote_store_capacity(
    P: int,
    stores: int,
    mem: NodeMemoryModel | None = None,
) -> RemoteStoreCapacity:
    """Memory a task gains when ``stores`` cores act only as data servers"""
    if not 0 <= stores < P:
        raise InvalidArgumentError(f"store cores must be within 0..{P - 1}, got {stores}")
    total = (mem or NodeMemoryModel()).total_bytes
    compute = P - stores
    gained = stores * total // compute
    return RemoteStoreCapacity(
        compute_cores=compute,
        store_cores=stores,
        per_task_bytes=total + gained,
        gained_bytes=gained,
    )


class OverlayRegion(BaseModel):
    """Word range [start, end] swapped between ``overlays`` equally sized segments"""

    model_config = ConfigDict(frozen=True)

    start: int = Field(ge=0)
    end: int = Field(ge=0)
    overlays: int = Field(default=2, ge=1)

    @model_validator(mode="after")
    def _divisible(self) -> "OverlayRegion":
        if self.end < self.start:
            raise ValueError(f"region end {self.end:#x} precedes start {self.start:#x}")
        if self.size % self.overlays:
            raise ValueError(f"region of {self.size} words does not split into {self.overlays} overlays")
        return self

    @property
    def size(self) -> int:
        return self.end - self.start + 1

    @property
    def slot(self) -> int:
        return self.size // self.overlays


class OverlayFault(BaseModel):
    position: int
    address: int
    region: int
    overlay: int


class OverlayPlan(BaseModel):
    program_words: int
    resident_words: int
    regions: list[OverlayRegion]
    faults: list[OverlayFault] = []


def overlay_plan(
    program_words: int,
    regions: Sequence[OverlayRegion],
    trace: Sequence[int] = (),
) -> OverlayPlan:
    """Resident size with each overlaid range shrunk to one slot, plus the faults a trace takes"""
    ordered = sorted(regions, key=lambda r: r.start)
    for r in ordered:
        if r.end >= program_words:
            raise InvalidArgumentError(f"region {r.start:#x}-{r.end:#x} lies outside the program")
    for a, b in zip(ordered, ordered[1:], strict=False):
        if b.start <= a.end:
            raise InvalidArgumentError(f"regions at {a.start:#x} and {b.start:#x} overlap")

    resident = program_words - sum(r.size for r in ordered) + sum(r.slot for r in ordered)
    loaded: dict[int, int] = {}
    faults = []
    for position, address in enumerate(trace):
        for index, r in enumerate(ordered):
            if r.start <= address <= r.end:
                overlay = (address - r.start) // r.slot
                if loaded.get(index) != overlay:
                    faults.append(
                        OverlayFault(position=position, address=address, region=index, overlay=overlay)
                    )
                    loaded[index] = overlay
                break
    return OverlayPlan(
        program_words=program_words,
        resident_words=resident,
        regions=list(ordered),
        faults=faults,
    )
