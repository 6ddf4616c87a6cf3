"""
Configuration for the Swallow simulator

One YAML file with nested sections; every section defaults to the 480-core
machine. SWALLOW_CONFIG (or a .env file) names the file when no path is
given, SWALLOW_OUTPUT_PATH the output directory.
"""

import hashlib
import json
import logging
import os
from pathlib import Path

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .errors import ConfigError
from .model.energy_model import NodeBreakdown, PowerProfile
from .model.network_sim import NetworkParams
from .model.topology import BridgeSpec, LinkProfile, WiringOverride
from .workloads.memory import NodeMemoryModel
from .workloads.neurons import IzhikevichParams, NeuronAccounting
from .workloads.paradigms import WorkloadSpec

logger = logging.getLogger(__name__)

CONFIG_ENV = "SWALLOW_CONFIG"
OUTPUT_ENV = "SWALLOW_OUTPUT_PATH"
DEFAULT_OUTPUT = "~/.swallow/out"


class MachineConfig(BaseModel):
    """Slice arrangement plus optional re-cabling and ethernet bridges"""

    model_config = ConfigDict(extra="forbid")

    slices_x: int = Field(default=5, ge=1)
    slices_y: int = Field(default=6, ge=1)
    wiring: list[WiringOverride] = []
    bridges: list[BridgeSpec] = []


class PowerConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    profile: PowerProfile = PowerProfile()
    breakdown: NodeBreakdown = NodeBreakdown()
    clock_mhz: float = Field(default=500.0, gt=0, le=500)


class NeuronConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    accounting: NeuronAccounting = NeuronAccounting()
    memory: NodeMemoryModel = NodeMemoryModel()
    izhikevich: IzhikevichParams = IzhikevichParams()


class SwallowConfig(BaseModel):
    """Root of the configuration file"""

    model_config = ConfigDict(extra="forbid")

    machine: MachineConfig = MachineConfig()
    links: LinkProfile = LinkProfile()
    network: NetworkParams = NetworkParams()
    power: PowerConfig = PowerConfig()
    neurons: NeuronConfig = NeuronConfig()
    workload: WorkloadSpec = WorkloadSpec()
    seed: int = 0


def resolve_config_path(path: str | Path | None = None) -> Path | None:
    """Explicit path first, then SWALLOW_CONFIG from the environment or .env"""
    if path is not None:
        return Path(path).expanduser()
    load_dotenv()
    env = os.getenv(CONFIG_ENV)
    return Path(env).expanduser() if env else None


def output_dir(path: str | Path | None = None) -> Path:
    load_dotenv()
    chosen = path if path is not None else os.getenv(OUTPUT_ENV, DEFAULT_OUTPUT)
    return Path(chosen).expanduser()


def load_config(path: str | Path | None = None) -> SwallowConfig:
    """Load and validate the configuration; defaults when no file is named"""
    resolved = resolve_config_path(path)
    if resolved is None:
        logger.debug("No configuration file given, using defaults")
        return SwallowConfig()
    if not resolved.is_file():
        raise ConfigError(f"configuration file not found: {resolved}")
    try:
        raw = yaml.safe_load(resolved.read_text()) or {}
    except yaml.YAMLError as e:
        raise ConfigError(f"cannot parse {resolved}: {e}") from e
    if not isinstance(raw, dict):
        raise ConfigError(f"{resolved} must hold a mapping of sections")
    try:
        cfg = SwallowConfig(**raw)
    except ValidationError as e:
        raise ConfigError(f"invalid configuration in {resolved}: {e}") from e
    logger.info(f"Loaded configuration from {resolved}")
    return cfg


def config_hash(cfg: SwallowConfig) -> str:
    """SHA-256 of the canonical JSON form of the validated configuration"""
    canonical = json.dumps(cfg.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()
