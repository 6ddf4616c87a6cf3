"""
Command-line entry point: ``swallow <subcommand>``

Exit codes: 0 on success, 1 when a simulation or verification fails,
2 on usage or configuration errors.
"""

import argparse
import logging
import sys
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor

from .config import SwallowConfig, config_hash, load_config, output_dir
from .errors import (
    CapacityExceededError,
    ConfigError,
    InvalidArgumentError,
    NotFoundError,
    RoutingError,
    SimulationDeadlockError,
    SwallowError,
    TrafficValidationError,
)
from .model.energy_model import LinkEnergyTable, dvfs_curve, run_energy, system_power
from .model.network_sim import SimReport, random_traffic, run
from .model.paper_tables import TABLES, paper_table
from .model.routing import generate_tables, verify_tables
from .model.topology import Topology, bridge_traffic_ceiling, build_topology, validate_topology
from .storage.report_storage import ReportStorage, format_table, read_trace, read_traffic
from .workloads.runner import run_workload

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

USAGE_ERRORS = (ConfigError, InvalidArgumentError, NotFoundError, TrafficValidationError)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swallow", description="Models and simulation of the Swallow many-core machine"
    )
    parser.add_argument("--config", help="YAML configuration (default: $SWALLOW_CONFIG)")
    parser.add_argument("--out", help="output directory (default: $SWALLOW_OUTPUT_PATH)")
    parser.add_argument("--seed", type=int, help="seed recorded in outputs and used by generators")
    parser.add_argument("--format", choices=["csv", "txt"], default="csv", dest="fmt")
    parser.add_argument("--verbose", "-v", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("topo", help="build, validate and export the machine")

    route = sub.add_parser("route", help="generate and verify routing tables")
    route.add_argument(
        "--strategy", choices=["vertical-first", "naive-xy"], default="vertical-first"
    )
    route.add_argument("--verify-only", action="store_true", help="verify saved tables")
    route.add_argument("--tables", help="tables CSV to verify (with --verify-only)")

    sim = sub.add_parser("sim", help="simulate a traffic file or seeded random traffic")
    sim.add_argument("--traffic", help="traffic CSV: time_ns,src,dst,bytes,mode")
    sim.add_argument("--tables", help="routing tables CSV (default: generated)")
    sim.add_argument("--until", type=float, help="stop simulating at this time (ns)")
    sim.add_argument("--sweep", type=int, default=0, metavar="K", help="run K seeded random traffic sets")
    sim.add_argument("--messages", type=int, default=64, help="messages per random traffic set")
    sim.add_argument("--workers", type=int, default=4, help="threads for --sweep")

    workload = sub.add_parser("workload", help="run the configured workload")
    workload.add_argument("--trace", help="shared-memory access trace CSV to replay")

    energy = sub.add_parser("energy", help="power model, DVFS curve and run energy")
    energy.add_argument("--slices", type=int, help="slices to price (default: configured machine)")
    energy.add_argument("--traffic", help="traffic CSV whose run energy to attribute")
    energy.add_argument("--points", type=int, default=16, help="DVFS curve points")

    table = sub.add_parser("paper-table", help="model values beside the published figures")
    table.add_argument("name", choices=[*TABLES, "all"])
    return parser


class Session:
    """Configuration, machine and output storage shared by one invocation"""

    def __init__(self, args: argparse.Namespace):
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = cfg.model_copy(update={"seed": args.seed})
        self.cfg: SwallowConfig = cfg
        self.fmt = args.fmt
        self.storage = ReportStorage(output_dir(args.out), config_hash(cfg), cfg.seed)
        self._topology: Topology | None = None

    @property
    def topology(self) -> Topology:
        if self._topology is None:
            m = self.cfg.machine
            self._topology = build_topology(
                m.slices_x, m.slices_y, self.cfg.links, m.wiring, m.bridges
            )
        return self._topology


def cmd_topo(session: Session, args: argparse.Namespace) -> int:
    t = session.topology
    report = validate_topology(t)
    files = session.storage.write_topology(t, report)
    print(f"{t.node_count} cores, {len(t.links)} links, {len(t.bridges)} bridges")
    if t.bridges:
        print(f"bridge ceiling {bridge_traffic_ceiling(t, session.cfg.links):.2f} of an external link")
    for f in files:
        print(f"wrote {f.path}")
    for finding in report.findings:
        print(f"{finding.kind}: {finding.message}")
    return EXIT_OK if report.ok else EXIT_FAILURE


def cmd_route(session: Session, args: argparse.Namespace) -> int:
    t = session.topology
    if args.verify_only:
        path = args.tables or session.storage.path_for("tables", "csv")
        tables = session.storage.read_tables(path, t)
    else:
        strategy = "naive_xy" if args.strategy == "naive-xy" else "vertical_first"
        tables = generate_tables(t, strategy=strategy)
        print(f"wrote {session.storage.write_tables(tables).path}")
    report = verify_tables(tables)
    stored = session.storage.write_verification(report, session.fmt)
    print(
        f"{report.strategy}: deliverable={report.deliverable} "
        f"failures={report.failure_count} "
        f"max_transitions={report.max_layer_transitions} "
        f"cdg_acyclic={report.cdg_acyclic}"
    )
    for failure in report.failures[:5]:
        print(f"  {failure}")
    print(f"wrote {stored.path}")
    return EXIT_OK if report.ok else EXIT_FAILURE


def _summary_row(seed: int, rep: SimReport) -> dict[str, float | int]:
    return {
        "seed": seed,
        "messages": len(rep.messages),
        "injected_bytes": rep.injected_bytes,
        "delivered_bytes": rep.delivered_bytes,
        "in_flight_bytes": rep.in_flight_bytes,
        "wall_ns": rep.wall_ns,
    }


def cmd_sim(session: Session, args: argparse.Namespace) -> int:
    t = session.topology
    tables = session.storage.read_tables(args.tables, t) if args.tables else generate_tables(t)
    params = session.cfg.network
    if args.sweep > 0:
        seeds = [session.cfg.seed + k for k in range(args.sweep)]
        traffic_sets = {seed: random_traffic(t, args.messages, seed) for seed in seeds}

        def one(seed: int) -> SimReport:
            return run(t, tables, traffic_sets[seed], params, args.until)

        with ThreadPoolExecutor(max_workers=max(1, args.workers)) as pool:
            reports = list(pool.map(one, seeds))
        for seed, rep in zip(seeds, reports, strict=True):
            session.storage.write_traffic(traffic_sets[seed], f"sim_seed{seed}_traffic")
            session.storage.write_sim_report(rep, f"sim_seed{seed}", session.fmt)
        stored = session.storage.write_rows(
            "sweep", [_summary_row(s, r) for s, r in zip(seeds, reports, strict=True)], session.fmt
        )
        print(f"{len(seeds)} runs, wrote {stored.path}")
        return EXIT_OK if all(r.conserved() for r in reports) else EXIT_FAILURE

    traffic = read_traffic(args.traffic) if args.traffic else []
    rep = run(t, tables, traffic, params, args.until)
    for f in session.storage.write_sim_report(rep, "sim", session.fmt):
        print(f"wrote {f.path}")
    print(
        f"delivered {rep.delivered_bytes} of {rep.injected_bytes} bytes "
        f"in {rep.wall_ns:.1f} ns"
    )
    return EXIT_OK if rep.conserved() else EXIT_FAILURE


def cmd_workload(session: Session, args: argparse.Namespace) -> int:
    t = session.topology
    trace = read_trace(args.trace) if args.trace else None
    outcome = run_workload(session.cfg, t, generate_tables(t), seed=session.cfg.seed, trace=trace)
    storage = session.storage
    storage.write_sim_report(outcome.report, f"{outcome.kind}_sim", session.fmt)
    for name, rows in outcome.tables.items():
        storage.write_rows(f"{outcome.kind}_{name}", rows)
    summary = [{"quantity": k, "value": v} for k, v in outcome.summary.items()]
    stored = storage.write_rows(f"{outcome.kind}_summary", summary, session.fmt)
    print(format_table(summary), end="")
    print(f"wrote {stored.path}")
    return EXIT_OK


def cmd_energy(session: Session, args: argparse.Namespace) -> int:
    cfg = session.cfg
    slices = args.slices or cfg.machine.slices_x * cfg.machine.slices_y
    power = system_power(
        slices, f=cfg.power.clock_mhz, profile=cfg.power.profile, breakdown=cfg.power.breakdown
    )
    rows: list[dict[str, float | int | str]] = [
        {"quantity": "slices", "value": power.slices},
        {"quantity": "core_mw", "value": power.core_mw},
        {"quantity": "cores_w", "value": power.cores_w},
        {"quantity": "wall_w", "value": power.wall_w},
        *({"quantity": f"{k}_w", "value": v} for k, v in power.breakdown_w.items()),
    ]
    if args.traffic:
        t = session.topology
        rep = run(t, generate_tables(t), read_traffic(args.traffic), cfg.network)
        energy = run_energy(
            rep, cfg.power.profile, LinkEnergyTable.from_links(cfg.links), cfg.power.clock_mhz
        )
        rows.append({"quantity": "run_total_j", "value": energy.total_j})
        rows += [{"quantity": f"run_{c.component}_j", "value": c.joules} for c in energy.components]
    session.storage.write_rows("dvfs_curve", dvfs_curve(args.points, cfg.power.profile))
    stored = session.storage.write_rows("energy", rows, session.fmt)
    print(format_table(rows), end="")
    print(f"wrote {stored.path}")
    return EXIT_OK


def cmd_paper_table(session: Session, args: argparse.Namespace) -> int:
    names = list(TABLES) if args.name == "all" else [args.name]
    for name in names:
        rows = paper_table(name, session.cfg)
        stored = session.storage.write_rows(f"table_{name}", rows, session.fmt)
        print(f"== {name} ==")
        print(format_table(rows), end="")
        print(f"wrote {stored.path}")
    return EXIT_OK


COMMANDS = {
    "topo": cmd_topo,
    "route": cmd_route,
    "sim": cmd_sim,
    "workload": cmd_workload,
    "energy": cmd_energy,
    "paper-table": cmd_paper_table,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=[logging.StreamHandler(sys.stderr)],
    )
    try:
        session = Session(args)
        return COMMANDS[args.command](session, args)
    except USAGE_ERRORS as e:
        logger.error(str(e))
        return EXIT_USAGE
    except (RoutingError, SimulationDeadlockError, CapacityExceededError) as e:
        logger.error(str(e))
        return EXIT_FAILURE
    except SwallowError as e:
        logger.error(f"Unexpected failure: {e}")
        return EXIT_FAILURE
    except RuntimeError as e:
        logger.error(str(e))
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
