"""
Pytest configuration and fixtures
"""

import tempfile
from collections.abc import Generator
from pathlib import Path

import pytest

from server.model.routing import RoutingTables, generate_tables
from server.model.topology import Topology, build_topology
from server.storage.report_storage import ReportStorage


@pytest.fixture(scope="function")
def temp_storage_dir() -> Generator[Path, None, None]:
    """Create a temporary directory for output files"""
    with tempfile.TemporaryDirectory() as temp_dir:
        yield Path(temp_dir)


@pytest.fixture
def report_storage(temp_storage_dir: Path) -> ReportStorage:
    """ReportStorage writing into the temporary directory"""
    return ReportStorage(temp_storage_dir, config_sha256="abc123", seed=7)


@pytest.fixture(scope="session")
def one_slice() -> Topology:
    """A single 16-core slice"""
    return build_topology(1, 1)


@pytest.fixture(scope="session")
def one_slice_tables(one_slice: Topology) -> RoutingTables:
    return generate_tables(one_slice)


@pytest.fixture(scope="session")
def four_slices() -> Topology:
    """Four slices in a 2x2 arrangement, 64 cores"""
    return build_topology(2, 2)


@pytest.fixture(scope="session")
def four_slice_tables(four_slices: Topology) -> RoutingTables:
    return generate_tables(four_slices)


@pytest.fixture(scope="session")
def full_machine() -> Topology:
    """The 30-slice, 480-core machine"""
    return build_topology(5, 6)


@pytest.fixture(scope="session")
def full_machine_tables(full_machine: Topology) -> RoutingTables:
    return generate_tables(full_machine)
