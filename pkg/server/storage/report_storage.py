"""
File storage for simulator inputs and outputs

Every file written here starts with a ``# config_sha256=<hash> seed=<seed>``
line; the rest is a deterministic CSV (or aligned text) body.
"""

import csv
import io
import logging
from collections.abc import Iterable, Mapping, Sequence
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ValidationError

from ..errors import InvalidArgumentError, NotFoundError, TrafficValidationError
from ..model.network_sim import SimReport, TrafficEntry
from ..model.routing import RoutingTables, VerificationReport, table_rows, tables_from_rows
from ..model.topology import NodeId, Topology, ValidationReport, adjacency_rows, to_dot
from ..workloads.shared_memory import MemoryAccess

logger = logging.getLogger(__name__)

ReportFormat = Literal["csv", "txt"]
Row = Mapping[str, object]

TRAFFIC_COLUMNS = ["time_ns", "src", "dst", "bytes", "mode"]
TRACE_COLUMNS = ["time_ns", "op", "address", "size"]


class StoredFile(BaseModel):
    """Where something was written and how many data rows it holds"""

    path: str
    rows: int = 0


def _cell(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def format_table(rows: Sequence[Row]) -> str:
    """Rows as a fixed-width text table"""
    if not rows:
        return "(no rows)\n"
    columns = list(rows[0].keys())
    cells = [[_cell(r.get(c)) for c in columns] for r in rows]
    widths = [max(len(c), *(len(line[i]) for line in cells)) for i, c in enumerate(columns)]
    out = ["  ".join(c.ljust(w) for c, w in zip(columns, widths, strict=True)).rstrip()]
    out.append("  ".join("-" * w for w in widths))
    for line in cells:
        out.append("  ".join(v.ljust(w) for v, w in zip(line, widths, strict=True)).rstrip())
    return "\n".join(out) + "\n"


class ReportStorage:
    """Output directory for one configuration and seed"""

    def __init__(self, out_dir: str | Path, config_sha256: str = "", seed: int = 0):
        self.out_dir = Path(out_dir).expanduser()
        self.config_sha256 = config_sha256
        self.seed = seed
        try:
            self.out_dir.mkdir(parents=True, exist_ok=True)
        except PermissionError as e:
            raise RuntimeError(
                f"Permission denied creating output directory: {self.out_dir}. "
                "Set SWALLOW_OUTPUT_PATH or --out to a writable location."
            ) from e
        except Exception as e:
            raise RuntimeError(
                f"Failed to create output directory: {self.out_dir}. Error: {e}"
            ) from e

    def for_run(self, name: str, config_sha256: str, seed: int) -> "ReportStorage":
        """Storage in a subdirectory for one run, stamped with its config and seed"""
        return ReportStorage(self.out_dir / name, config_sha256, seed)

    @property
    def header(self) -> str:
        return f"# config_sha256={self.config_sha256} seed={self.seed}"

    def path_for(self, name: str, suffix: str) -> Path:
        return self.out_dir / f"{name}.{suffix}"

    def _write_text(self, path: Path, body: str) -> Path:
        path.write_text(f"{self.header}\n{body}")
        logger.debug(f"Wrote {path}")
        return path

    def write_rows(
        self, name: str, rows: Sequence[Row], fmt: ReportFormat = "csv"
    ) -> StoredFile:
        """Write rows as CSV or as an aligned text table"""
        if fmt == "txt":
            path = self._write_text(self.path_for(name, "txt"), format_table(rows))
            return StoredFile(path=str(path), rows=len(rows))
        buf = io.StringIO()
        if rows:
            writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
            writer.writeheader()
            for row in rows:
                writer.writerow({k: _cell(v) for k, v in row.items()})
        path = self._write_text(self.path_for(name, "csv"), buf.getvalue())
        return StoredFile(path=str(path), rows=len(rows))

    def write_text(self, name: str, text: str, suffix: str = "txt") -> StoredFile:
        path = self._write_text(self.path_for(name, suffix), text)
        return StoredFile(path=str(path))

    # topology

    def write_topology(self, t: Topology, report: ValidationReport) -> list[StoredFile]:
        files = [
            self.write_rows("adjacency", adjacency_rows(t)),
            self.write_text("topology", to_dot(t), suffix="dot"),
        ]
        findings = [{"kind": f.kind, "message": f.message} for f in report.findings]
        files.append(self.write_rows("validation", findings or [{"kind": "ok", "message": ""}], "txt"))
        return files

    # routing

    def write_tables(self, tables: RoutingTables) -> StoredFile:
        return self.write_rows("tables", table_rows(tables))

    def read_tables(self, path: str | Path, t: Topology) -> RoutingTables:
        return tables_from_rows(t, read_rows(path))

    def write_verification(self, report: VerificationReport, fmt: ReportFormat = "txt") -> StoredFile:
        summary = [
            {"quantity": "strategy", "value": report.strategy},
            {"quantity": "nodes", "value": report.node_count},
            {"quantity": "pairs", "value": report.pairs},
            {"quantity": "deliverable", "value": report.deliverable},
            {"quantity": "failures", "value": report.failure_count},
            {"quantity": "max_layer_transitions", "value": report.max_layer_transitions},
            {"quantity": "dimension_order_violations", "value": report.dimension_order_violations},
            {"quantity": "cdg_acyclic", "value": report.cdg_acyclic},
        ]
        summary += [{"quantity": "failure", "value": f} for f in report.failures]
        if report.cdg_cycle:
            summary.append({"quantity": "cdg_cycle", "value": " > ".join(report.cdg_cycle)})
        self.write_rows(
            "link_load",
            [{"load": load, "links": count} for load, count in sorted(report.load_histogram.items())],
        )
        return self.write_rows("verification", summary, fmt)

    # simulation

    def write_sim_report(
        self, rep: SimReport, prefix: str = "sim", fmt: ReportFormat = "csv"
    ) -> list[StoredFile]:
        """Per-message, per-link, per-node and summary files for one run"""
        messages = [m.model_dump() for m in rep.messages]
        links = [u.model_dump() for u in sorted(rep.links.values(), key=lambda u: u.link)]
        nodes = [
            {
                "node": n,
                "active_ns": rep.node_active_ns.get(n, 0.0),
                "blocked_ns": rep.node_blocked_ns.get(n, 0.0),
            }
            for n in range(rep.node_count)
        ]
        summary = [
            {"quantity": "wall_ns", "value": rep.wall_ns},
            {"quantity": "injected_bytes", "value": rep.injected_bytes},
            {"quantity": "delivered_bytes", "value": rep.delivered_bytes},
            {"quantity": "in_flight_bytes", "value": rep.in_flight_bytes},
            {"quantity": "messages", "value": len(rep.messages)},
            {"quantity": "max_buffer_occupancy", "value": rep.max_buffer_occupancy},
            {"quantity": "buffer_depth", "value": rep.buffer_depth},
        ]
        summary += [
            {"quantity": f"delivered[{ch}]", "value": size}
            for ch, size in sorted(rep.delivered_per_channel.items())
        ]
        return [
            self.write_rows(f"{prefix}_messages", messages, fmt),
            self.write_rows(f"{prefix}_links", links, fmt),
            self.write_rows(f"{prefix}_nodes", nodes, fmt),
            self.write_rows(f"{prefix}_summary", summary, "txt" if fmt == "txt" else "csv"),
        ]

    def write_traffic(self, traffic: Iterable[TrafficEntry], name: str = "traffic") -> StoredFile:
        rows = [
            {
                "time_ns": e.time_ns,
                "src": str(e.src),
                "dst": str(e.dst),
                "bytes": e.bytes,
                "mode": e.mode,
                "channel": e.channel,
                "established": e.established,
                "reply_bytes": e.reply_bytes,
                "service_ns": e.service_ns,
            }
            for e in traffic
        ]
        return self.write_rows(name, rows)



def read_rows(path: str | Path) -> list[dict[str, str]]:
    """CSV rows of a file written by ReportStorage, comment lines skipped"""
    file_path = Path(path).expanduser()
    try:
        text = file_path.read_text()
    except FileNotFoundError as e:
        raise NotFoundError(f"no such file: {file_path}") from e
    lines = [line for line in text.splitlines() if line and not line.startswith("#")]
    return list(csv.DictReader(lines))


def _flag(value: str) -> bool:
    return value.strip().lower() in ("1", "true", "yes")


def read_traffic(path: str | Path) -> list[TrafficEntry]:
    """Parse a traffic CSV with columns time_ns, src, dst, bytes, mode"""
    rows = read_rows(path)
    if rows:
        missing = [c for c in TRAFFIC_COLUMNS if c not in rows[0]]
        if missing:
            raise TrafficValidationError(f"{path}: missing columns {', '.join(missing)}")
    entries = []
    for line, row in enumerate(rows, start=1):
        try:
            fields: dict[str, object] = {
                "time_ns": float(row["time_ns"]),
                "src": NodeId.parse(row["src"]),
                "dst": NodeId.parse(row["dst"]),
                "bytes": int(row["bytes"]),
                "mode": row["mode"] or "packet",
            }
            if row.get("channel"):
                fields["channel"] = int(row["channel"])
            if row.get("established"):
                fields["established"] = _flag(row["established"])
            if row.get("reply_bytes"):
                fields["reply_bytes"] = int(row["reply_bytes"])
            if row.get("service_ns"):
                fields["service_ns"] = float(row["service_ns"])
            entries.append(TrafficEntry(**fields))  # type: ignore[arg-type]
        except (ValueError, ValidationError, InvalidArgumentError) as e:
            raise TrafficValidationError(f"{path} row {line}: {e}") from e
    return entries


def read_trace(path: str | Path) -> list[MemoryAccess]:
    """Parse a shared-memory trace with columns time_ns, op, address, size and optional node"""
    rows = read_rows(path)
    if rows:
        missing = [c for c in TRACE_COLUMNS if c not in rows[0]]
        if missing:
            raise InvalidArgumentError(f"{path}: missing columns {', '.join(missing)}")
    accesses = []
    for line, row in enumerate(rows, start=1):
        try:
            accesses.append(
                MemoryAccess(
                    time_ns=float(row["time_ns"]),
                    op=row["op"],  # type: ignore[arg-type]
                    address=int(row["address"]),
                    size=int(row["size"] or 4),
                    node=NodeId.parse(row["node"]) if row.get("node") else None,
                )
            )
        except (KeyError, ValueError, ValidationError, InvalidArgumentError) as e:
            raise InvalidArgumentError(f"{path} row {line}: {e}") from e
    return accesses
