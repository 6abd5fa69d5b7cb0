"""Dataset ingestion, min-max normalization, and report serialization.

CSV dialect: comma-separated UTF-8, first row headers, '.' decimal point.
Reports serialize to JSON (schema_version 1, deterministic field order,
lossless round-trip) or to flat CSV for spreadsheet use.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyDataset, FormatError, ParseError, SchemaError
from .scoring import Dataset, Record

__all__ = [
    "IngestConfig",
    "Report",
    "export_report",
    "load_csv",
    "normalize",
    "parse_report",
]

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class IngestConfig:
    """Which CSV columns play which role during ingestion.

    Normalization defaults to "none" so that data that arrives already
    normalized is scored as-is; pass "min-max" to rescale on load.
    """

    scoring_columns: tuple[str, ...]
    id_column: str | None = None
    sensitive_column: str | None = None
    normalization: str = "none"

    def __post_init__(self):
        cols = tuple(self.scoring_columns)
        if not cols or len(set(cols)) != len(cols):
            raise SchemaError("scoring columns must be non-empty and distinct")
        if self.normalization not in ("min-max", "none"):
            raise SchemaError(
                f"normalization must be 'min-max' or 'none', got {self.normalization!r}"
            )
        object.__setattr__(self, "scoring_columns", cols)


def load_csv(path_or_buffer, config: IngestConfig) -> Dataset:
    """Load a dataset from a CSV file path or an open text stream.

    Missing id column synthesizes ids t1..tn in row order. The first
    offending cell of malformed input is named in the raised error.
    """
    if hasattr(path_or_buffer, "read"):
        return _load(path_or_buffer, config, name="<stream>")
    with open(path_or_buffer, "r", encoding="utf-8", newline="") as fh:
        return _load(fh, config, name=str(path_or_buffer))


def _load(fh, config: IngestConfig, name: str) -> Dataset:
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        raise EmptyDataset(f"{name}: file is empty") from None
    header = [h.strip() for h in header]
    missing = [c for c in config.scoring_columns if c not in header]
    if config.id_column and config.id_column not in header:
        missing.append(config.id_column)
    if config.sensitive_column and config.sensitive_column not in header:
        missing.append(config.sensitive_column)
    if missing:
        raise SchemaError(f"{name}: missing column(s) {missing}; header is {header}")
    col_idx = {c: header.index(c) for c in header}

    records = []
    raw_rows = []
    for row_no, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        values = []
        for c in config.scoring_columns:
            cell = row[col_idx[c]].strip() if col_idx[c] < len(row) else ""
            try:
                values.append(float(cell))
            except ValueError:
                raise ParseError(
                    f"{name}: row {row_no}, column {c!r}: {cell!r} is not numeric"
                ) from None
        rid = (
            row[col_idx[config.id_column]].strip()
            if config.id_column
            else f"t{len(records) + 1}"
        )
        group = (
            row[col_idx[config.sensitive_column]].strip()
            if config.sensitive_column
            else None
        )
        attributes = {
            c: row[i].strip()
            for c, i in col_idx.items()
            if c not in config.scoring_columns
            and c != config.id_column
            and c != config.sensitive_column
            and i < len(row)
        }
        records.append(
            Record(id=rid, scoring=np.array(values), attributes=attributes, group=group)
        )
        raw_rows.append(values)
    if not records:
        raise EmptyDataset(f"{name}: no data rows")
    data = Dataset(
        records=tuple(records),
        attribute_names=tuple(config.scoring_columns),
        sensitive_attribute=config.sensitive_column,
        provenance={"source": name},
    )
    if config.normalization == "min-max":
        data = normalize(data)
    return data


def normalize(data: Dataset) -> Dataset:
    """Min-max scale every scoring column to [0, 1].

    Constant columns map to 0 (with a warning recorded in provenance)
    because their range is empty. The original values are retained in
    provenance, and applying normalize twice equals applying it once.
    """
    m = np.array(data.matrix, dtype=float)
    lo = m.min(axis=0)
    hi = m.max(axis=0)
    span = hi - lo
    constant = span == 0.0
    span_safe = np.where(constant, 1.0, span)
    scaled = (m - lo) / span_safe
    scaled[:, constant] = 0.0
    warnings = [
        f"column {data.attribute_names[j]!r} is constant; normalized to 0"
        for j in np.nonzero(constant)[0]
    ]
    provenance = dict(data.provenance)
    provenance.setdefault("raw_scoring", data.matrix.tolist())
    provenance["normalization"] = {
        "method": "min-max",
        "min": lo.tolist(),
        "max": hi.tolist(),
    }
    if warnings:
        provenance["warnings"] = provenance.get("warnings", []) + warnings
    records = tuple(
        Record(id=r.id, scoring=scaled[i], attributes=r.attributes, group=r.group)
        for i, r in enumerate(data.records)
    )
    return Dataset(
        records=records,
        attribute_names=data.attribute_names,
        sensitive_attribute=data.sensitive_attribute,
        provenance=provenance,
    )


@dataclass(frozen=True)
class Report:
    """Serializable result envelope: kind, structured payload, run metadata."""

    kind: str
    payload: dict
    metadata: dict = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    KINDS = ("up", "audit", "stability", "suggestion", "arrangement", "rank", "sample")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise FormatError(f"unknown report kind {self.kind!r}")


def export_report(report: Report, format: str = "json") -> bytes:
    """Serialize a report with deterministic field ordering."""
    if format == "json":
        doc = {
            "schema_version": report.schema_version,
            "kind": report.kind,
            "payload": report.payload,
            "metadata": report.metadata,
        }
        return (json.dumps(doc, sort_keys=True, indent=2) + "\n").encode("utf-8")
    if format == "csv":
        return _to_csv(report).encode("utf-8")
    raise FormatError(f"unsupported format {format!r}; use 'json' or 'csv'")


def parse_report(data: bytes) -> Report:
    """Inverse of the JSON export; ``parse_report(export_report(r)) == r``."""
    doc = json.loads(data.decode("utf-8"))
    return Report(
        kind=doc["kind"],
        payload=doc["payload"],
        metadata=doc.get("metadata", {}),
        schema_version=doc.get("schema_version", SCHEMA_VERSION),
    )


def _to_csv(report: Report) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    p = report.payload
    if report.kind == "up":
        writer.writerow(["up", "error", "alpha", "samples"])
        writer.writerow([p["up"], p["error"], p["alpha"], p["samples"]])
    elif report.kind == "audit":
        writer.writerow(["stability", "error", "alpha", "samples", "matches"])
        writer.writerow(
            [p["stability"], p["error"], p["alpha"], p["samples"], p["matches"]]
        )
    elif report.kind == "stability":
        writer.writerow(["fingerprint", "ranking", "count", "stability"])
        for entry in p["top_rankings"]:
            writer.writerow(
                [
                    entry["fingerprint"],
                    ">".join(entry["ids"]),
                    entry["count"],
                    entry["stability"],
                ]
            )
    elif report.kind == "suggestion":
        writer.writerow(["found", "weights", "samples_used", "angular_gap"])
        weights = p["function"] if p["found"] else []
        writer.writerow(
            [
                p["found"],
                " ".join(str(v) for v in weights) if weights else "",
                p["samples_used"],
                p["angular_gap"] if p["found"] else "",
            ]
        )
    elif report.kind == "rank":
        writer.writerow(["position", "id", "score", "group"])
        for i, (rid, sc, grp) in enumerate(
            zip(p["order"], p["scores"], p["groups"]), start=1
        ):
            writer.writerow([i, rid, sc, grp if grp is not None else ""])
    elif report.kind == "sample":
        d = len(p["samples"][0]) if p["samples"] else 0
        writer.writerow([f"w{j + 1}" for j in range(d)])
        for row in p["samples"]:
            writer.writerow(row)
    elif report.kind == "arrangement":
        writer.writerow(["region", "first", "last", "count", "volume_estimate", "signature"])
        for i, entry in enumerate(p["regions"]):
            writer.writerow(
                [
                    i,
                    entry["first"],
                    entry["last"],
                    entry["count"],
                    entry["volume_estimate"],
                    "".join("+" if s > 0 else "-" for s in entry["signature"]),
                ]
            )
    else:  # pragma: no cover - guarded by Report validation
        raise FormatError(f"no CSV layout for report kind {report.kind!r}")
    return buf.getvalue()
