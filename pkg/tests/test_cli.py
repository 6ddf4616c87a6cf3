"""
Tests for the swallow command line
"""

from pathlib import Path

import pytest

from server.cli import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, main
from server.model.network_sim import random_traffic
from server.model.topology import build_topology
from server.storage.report_storage import read_rows, read_traffic


@pytest.fixture
def small_config(temp_storage_dir: Path) -> Path:
    """A one-slice machine running a small shared-memory workload"""
    path = temp_storage_dir / "small.yaml"
    path.write_text(
        "machine:\n"
        "  slices_x: 1\n"
        "  slices_y: 1\n"
        "workload:\n"
        "  kind: shared_memory\n"
        "  controllers: 2\n"
        "  shared_bytes: 1024\n"
        "  accesses: 8\n"
        "seed: 4\n"
    )
    return path


def cli(config: Path, out: Path, *args: str) -> int:
    return main(["--config", str(config), "--out", str(out), *args])


class TestCli:
    """Subcommands and exit codes"""

    def test_topo(self, small_config: Path, temp_storage_dir: Path):
        """Test topo writes its exports and succeeds"""
        out = temp_storage_dir / "out"
        assert cli(small_config, out, "topo") == EXIT_OK
        assert (out / "adjacency.csv").is_file()
        assert (out / "topology.dot").is_file()
        first = (out / "adjacency.csv").read_text().splitlines()[0]
        assert first.startswith("# config_sha256=") and first.endswith("seed=4")

    def test_route_and_verify_saved_tables(self, small_config: Path, temp_storage_dir: Path):
        """Test generated tables verify, reloaded or not"""
        out = temp_storage_dir / "out"
        assert cli(small_config, out, "route") == EXIT_OK
        assert (out / "tables.csv").is_file()
        assert cli(small_config, out, "route", "--verify-only") == EXIT_OK

    def test_naive_route_fails(self, small_config: Path, temp_storage_dir: Path):
        """Test the naive strategy exits with a failure"""
        out = temp_storage_dir / "out"
        assert cli(small_config, out, "route", "--strategy", "naive-xy") == EXIT_FAILURE
        assert "deliverable False" in " ".join(
            (out / "verification.csv").read_text().replace(",", " ").split()
        )

    def test_sim_traffic_file(self, small_config: Path, temp_storage_dir: Path):
        """Test a traffic file is simulated to completion"""
        out = temp_storage_dir / "out"
        traffic = temp_storage_dir / "traffic.csv"
        traffic.write_text("time_ns,src,dst,bytes,mode\n0,s0.d0.c0,s0.d7.c1,16,packet\n")
        assert cli(small_config, out, "sim", "--traffic", str(traffic)) == EXIT_OK
        assert (out / "sim_summary.csv").is_file()

    def test_sim_bad_traffic_is_usage_error(self, small_config: Path, temp_storage_dir: Path):
        """Test a malformed traffic file exits with a usage error"""
        traffic = temp_storage_dir / "traffic.csv"
        traffic.write_text("time_ns,src,dst,bytes,mode\n0,s0.d0.c0,s9.d0.c0,16,packet\n")
        assert cli(small_config, temp_storage_dir / "out", "sim", "--traffic", str(traffic)) == EXIT_USAGE

    def test_sim_sweep(self, small_config: Path, temp_storage_dir: Path):
        """Test a seeded sweep writes one report per seed and a summary"""
        out = temp_storage_dir / "out"
        assert cli(small_config, out, "sim", "--sweep", "3", "--messages", "8", "--workers", "2") == EXIT_OK
        assert (out / "sweep.csv").is_file()
        for seed in (4, 5, 6):
            assert (out / f"sim_seed{seed}_summary.csv").is_file()

    def test_sim_saved_tables(self, small_config: Path, temp_storage_dir: Path):
        """Test sim runs over tables saved by route"""
        out = temp_storage_dir / "out"
        traffic = temp_storage_dir / "traffic.csv"
        traffic.write_text("time_ns,src,dst,bytes,mode\n0,s0.d0.c0,s0.d7.c1,16,packet\n")
        assert cli(small_config, out, "route") == EXIT_OK
        tables = str(out / "tables.csv")
        assert cli(small_config, out, "sim", "--tables", tables, "--traffic", str(traffic)) == EXIT_OK
        assert cli(small_config, out, "sim", "--tables", str(out / "absent.csv")) == EXIT_USAGE

    def test_sweep_saves_traffic(self, small_config: Path, temp_storage_dir: Path):
        """Test each sweep seed's generated traffic is written and reloads unchanged"""
        out = temp_storage_dir / "out"
        assert cli(small_config, out, "sim", "--sweep", "2", "--messages", "8") == EXIT_OK
        t = build_topology(1, 1)
        for seed in (4, 5):
            saved = read_traffic(out / f"sim_seed{seed}_traffic.csv")
            assert saved == random_traffic(t, 8, seed)

    def test_workload_replays_trace(self, small_config: Path, temp_storage_dir: Path):
        """Test a saved access trace replays to the same latencies"""
        out = temp_storage_dir / "out"
        assert cli(small_config, out, "workload") == EXIT_OK
        trace = temp_storage_dir / "trace.csv"
        trace.write_text((out / "shared_memory_trace.csv").read_text())
        first = read_rows(out / "shared_memory_summary.csv")
        replay = temp_storage_dir / "replay"
        assert cli(small_config, replay, "workload", "--trace", str(trace)) == EXIT_OK
        assert read_rows(replay / "shared_memory_trace.csv") == read_rows(trace)
        assert read_rows(replay / "shared_memory_summary.csv") == first

    def test_workload(self, small_config: Path, temp_storage_dir: Path):
        """Test the configured workload writes its tables"""
        out = temp_storage_dir / "out"
        assert cli(small_config, out, "workload") == EXIT_OK
        assert (out / "shared_memory_trace.csv").is_file()
        assert (out / "shared_memory_summary.csv").is_file()

    def test_energy(self, small_config: Path, temp_storage_dir: Path):
        """Test the energy command writes the power rows and DVFS curve"""
        out = temp_storage_dir / "out"
        assert cli(small_config, out, "--format", "txt", "energy", "--slices", "30") == EXIT_OK
        assert (out / "energy.txt").is_file()
        assert (out / "dvfs_curve.csv").is_file()

    def test_paper_table(self, small_config: Path, temp_storage_dir: Path, capsys: pytest.CaptureFixture[str]):
        """Test a named table is printed and written"""
        out = temp_storage_dir / "out"
        assert cli(small_config, out, "paper-table", "threads") == EXIT_OK
        assert "== threads ==" in capsys.readouterr().out
        assert (out / "table_threads.csv").is_file()

    def test_missing_config(self, temp_storage_dir: Path):
        """Test a missing configuration file exits with a usage error"""
        assert cli(temp_storage_dir / "absent.yaml", temp_storage_dir / "out", "topo") == EXIT_USAGE

    def test_unknown_subcommand(self):
        """Test argparse rejects unknown commands with exit status 2"""
        with pytest.raises(SystemExit) as exc:
            main(["fly"])
        assert exc.value.code == EXIT_USAGE
