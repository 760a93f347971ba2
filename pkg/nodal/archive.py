"""
On-disk experiment archives and their database mirror.

An archive directory holds::

    archive.json          experiment metadata (schema_version, kind, config, manifold, m(E), notes)
    records.jsonl         one SolutionRecord per line
    summary.csv           one row per eps, regenerated from the records
    profile.f64/.json     the ground state samples and metadata
    snapshots/<id>.f64    final fields as raw little-endian float64, with a .json sidecar

No file carries a wall-clock value, so equal inputs give equal bytes.
"""
import json
import logging
from dataclasses import dataclass, field as dataclass_field, fields
from pathlib import Path

import numpy as np
import pandas as pd
from django.db import transaction

from . import models
from .exceptions import CorruptArchive, VersionMismatch
from .field import Field
from .groundstate import RadialProfile
from .manifold import TorusManifold
from .serializers import ArchiveRecordSerializer

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
SNAPSHOT_DTYPE = "<f8"

SUMMARY_COLUMNS = [
    "eps", "m_hat", "d_hat", "mE", "m_ratio", "d_ratio", "inequality_holds", "m_error", "m_error_decreasing",
    "positive_runs", "nodal_runs", "converged", "failed", "cluster_count", "expected_pairs",
    "nodal_set_violations", "alpha", "S_eps",
]


def _json_default(value):
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


def _dumps(payload, indent=None):
    return json.dumps(payload, sort_keys=True, indent=indent, default=_json_default)


def _db_json(payload):
    """JSON-ready copy with non-finite floats as None; database JSON columns reject Infinity."""
    def clean(value):
        if isinstance(value, dict):
            return {key: clean(item) for key, item in value.items()}
        if isinstance(value, list):
            return [clean(item) for item in value]
        if isinstance(value, float) and not np.isfinite(value):
            return None
        return value
    return clean(json.loads(_dumps(payload)))


def _read_json(path):
    try:
        with path.open("r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise CorruptArchive(f"{path} is missing.") from exc
    except json.JSONDecodeError as exc:
        raise CorruptArchive(f"{path} is not valid JSON: {exc}") from exc


def _write_text(path, text):
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


@dataclass
class SolutionRecord:
    record_id: str
    kind: str
    eps: float
    index: int
    seed: dict
    outcome: str
    converged: bool = False
    energy: dict = None
    grad_norm: float = None
    region: str = ""
    gap_plus: float = None
    gap_minus: float = None
    cm: dict = None
    concentration: dict = None
    pde_residual: float = None
    pde_ok: bool = None
    constants: dict = None
    tube_audit: dict = None
    steps: int = 0
    nodal_set_violations: int = 0
    stayed_outside_tubes: bool = False
    traces: list = dataclass_field(default_factory=list)
    error: str = None
    snapshot: str = None
    cluster_id: int = None
    field: Field = dataclass_field(default=None, repr=False, compare=False)

    @classmethod
    def from_payload(cls, record_id, payload, values=None, manifold=None):
        known = {f.name for f in fields(cls)} - {"record_id", "field"}
        record = cls(record_id=record_id, **{key: value for key, value in payload.items() if key in known})
        if values is not None:
            record.field = Field(manifold, values)
        return record

    @property
    def total_energy(self):
        return None if self.energy is None else self.energy["total"]

    @property
    def separation(self):
        if not self.cm or "separation" not in self.cm:
            return None
        return self.cm["separation"]

    @property
    def sign_changing(self):
        return self.gap_plus is not None and self.gap_plus > 0.0 and self.gap_minus > 0.0

    def to_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name != "field"}


@dataclass
class SolutionArchive:
    """Append-only collection of records plus the experiment metadata."""
    kind: str
    name: str
    config: dict
    lengths: tuple
    grid_sizes: tuple
    m: int
    profile: RadialProfile = dataclass_field(default=None, repr=False)
    ground: dict = dataclass_field(default_factory=dict)
    notes: list = dataclass_field(default_factory=list)
    records: list = dataclass_field(default_factory=list)
    schema_version: int = SCHEMA_VERSION

    @property
    def manifold(self):
        return TorusManifold(tuple(self.lengths), tuple(self.grid_sizes))

    @property
    def mE(self):
        return self.ground.get("mE")

    def append(self, record):
        if any(existing.record_id == record.record_id for existing in self.records):
            raise ValueError(f"Record {record.record_id} is already in the archive.")
        self.records.append(record)

    def extend(self, records):
        for record in records:
            self.append(record)

    def records_for(self, eps, kind=None):
        return [
            record for record in self.records
            if record.eps == eps and (kind is None or record.kind == kind)
        ]

    @property
    def eps_values(self):
        return sorted({record.eps for record in self.records}, reverse=True)

    def metadata(self):
        return {
            "schema_version": self.schema_version,
            "kind": self.kind,
            "name": self.name,
            "config": self.config,
            "manifold": {"lengths": list(self.lengths), "grid_sizes": list(self.grid_sizes)},
            "m": self.m,
            "ground": self.ground,
            "notes": self.notes,
            "record_count": len(self.records),
        }


def _best(records):
    candidates = [record for record in records if record.converged and record.energy is not None]
    return min(candidates, key=lambda record: (record.total_energy, record.index), default=None)


def summary_rows(archive):
    """One row per eps with the sweep statistics; NaN-free, absent values are None."""
    checks = archive.config.get("checks", {})
    slack = checks.get("inequality_slack", 1e-6)
    mE = archive.mE
    rows = []
    for eps in archive.eps_values:
        positive = archive.records_for(eps, "positive")
        nodal = archive.records_for(eps, "nodal")
        best_positive = _best(positive)
        best_nodal = _best([record for record in nodal if record.region == "Zcandidate"])
        m_hat = best_positive.total_energy if best_positive else None
        d_hat = best_nodal.total_energy if best_nodal else None
        ground = best_positive.constants if best_positive and best_positive.constants else {}
        clusters = {record.cluster_id for record in nodal if record.cluster_id is not None}
        rows.append({
            "eps": eps,
            "m_hat": m_hat,
            "d_hat": d_hat,
            "mE": mE,
            "m_ratio": m_hat / mE if m_hat is not None and mE else None,
            "d_ratio": d_hat / (2.0 * mE) if d_hat is not None and mE else None,
            "inequality_holds": d_hat >= 2.0 * m_hat - slack if None not in (m_hat, d_hat) else None,
            "positive_runs": len(positive),
            "nodal_runs": len(nodal),
            "converged": sum(1 for record in positive + nodal if record.converged),
            "failed": sum(1 for record in positive + nodal if record.outcome.startswith("error:")),
            "cluster_count": len(clusters) if clusters else None,
            "expected_pairs": 2 * len(archive.lengths) if archive.kind == "multiplicity" else None,
            "nodal_set_violations": sum(record.nodal_set_violations for record in positive + nodal),
            "alpha": ground.get("alpha"),
            "S_eps": ground.get("S_eps"),
        })
    previous = None
    for row in rows:
        error = abs(row["m_ratio"] - 1.0) if row["m_ratio"] is not None else None
        row["m_error"] = error
        row["m_error_decreasing"] = error < previous if None not in (error, previous) else None
        previous = error
    return rows


def m_error_trend(rows):
    """
    Whether |m_hat/m(E) - 1| shrinks at every eps step of a sweep.

    None when fewer than two eps values carry an m_hat.
    """
    flags = [row["m_error_decreasing"] for row in rows if row["m_error_decreasing"] is not None]
    return all(flags) if flags else None


def summary_frame(archive):
    return pd.DataFrame(summary_rows(archive), columns=SUMMARY_COLUMNS)


def save_snapshot(directory, name, values, lengths, eps):
    directory.mkdir(parents=True, exist_ok=True)
    values = np.ascontiguousarray(values, dtype=SNAPSHOT_DTYPE)
    values.tofile(directory / f"{name}.f64")
    sidecar = {
        "shape": list(values.shape),
        "lengths": list(lengths),
        "eps": eps,
        "dtype": SNAPSHOT_DTYPE,
        "schema_version": SCHEMA_VERSION,
    }
    _write_text(directory / f"{name}.json", _dumps(sidecar, indent=2) + "\n")
    return f"snapshots/{name}.f64"


def load_snapshot(path):
    path = Path(path)
    sidecar = _read_json(path.with_suffix(".json"))
    if sidecar.get("schema_version") != SCHEMA_VERSION:
        raise VersionMismatch(f"{path} has schema_version {sidecar.get('schema_version')}, expected {SCHEMA_VERSION}.")
    if not path.exists():
        raise CorruptArchive(f"Snapshot {path} is missing.")
    values = np.fromfile(path, dtype=SNAPSHOT_DTYPE)
    shape = tuple(sidecar["shape"])
    if values.size != int(np.prod(shape)):
        raise CorruptArchive(f"{path} holds {values.size} values, its sidecar promises shape {shape}.")
    return values.reshape(shape), sidecar


def save_profile(directory, profile):
    np.ascontiguousarray(profile.samples, dtype=SNAPSHOT_DTYPE).tofile(directory / "profile.f64")
    metadata = {**profile.metadata(), "schema_version": SCHEMA_VERSION}
    _write_text(directory / "profile.json", _dumps(metadata, indent=2) + "\n")


def load_profile(directory):
    metadata = _read_json(directory / "profile.json")
    samples = np.fromfile(directory / "profile.f64", dtype=SNAPSHOT_DTYPE)
    if samples.size != metadata["sample_count"]:
        raise CorruptArchive(f"profile.f64 holds {samples.size} samples, expected {metadata['sample_count']}.")
    return RadialProfile(
        n=metadata["n"],
        q=metadata["q"],
        r_max=metadata["r_max"],
        radii=np.linspace(0.0, metadata["r_max"], samples.size),
        samples=samples,
        u0=metadata["u0"],
        decay_rate=metadata["decay_rate"],
        decay_constant=metadata["decay_constant"],
        mE=metadata["mE"],
    )


def save_archive(archive, path):
    directory = Path(path)
    directory.mkdir(parents=True, exist_ok=True)
    snapshots = directory / "snapshots"
    write_snapshots = archive.config.get("output", {}).get("snapshots", True)
    for record in archive.records:
        if write_snapshots and record.field is not None:
            record.snapshot = save_snapshot(snapshots, record.record_id, record.field.values, archive.lengths, record.eps)
    if archive.profile is not None:
        save_profile(directory, archive.profile)

    _write_text(directory / "archive.json", _dumps(archive.metadata(), indent=2) + "\n")
    _write_text(directory / "records.jsonl", "".join(_dumps(record.to_dict()) + "\n" for record in archive.records))
    summary_frame(archive).to_csv(directory / "summary.csv", index=False, lineterminator="\n")
    logger.info("archive %s saved to %s (%d records)", archive.name, directory, len(archive.records))


def load_archive(path):
    directory = Path(path)
    meta = _read_json(directory / "archive.json")
    if meta.get("schema_version") != SCHEMA_VERSION:
        raise VersionMismatch(
            f"{directory} has schema_version {meta.get('schema_version')}, this build reads {SCHEMA_VERSION}."
        )
    try:
        archive = SolutionArchive(
            kind=meta["kind"],
            name=meta["name"],
            config=meta["config"],
            lengths=tuple(meta["manifold"]["lengths"]),
            grid_sizes=tuple(meta["manifold"]["grid_sizes"]),
            m=meta["m"],
            ground=meta["ground"],
            notes=meta["notes"],
        )
    except (KeyError, TypeError) as exc:
        raise CorruptArchive(f"archive.json lacks {exc}.") from exc
    if (directory / "profile.json").exists():
        archive.profile = load_profile(directory)

    manifold = archive.manifold
    records_path = directory / "records.jsonl"
    if not records_path.exists():
        raise CorruptArchive(f"{records_path} is missing.")
    with records_path.open("r", encoding="utf-8") as fh:
        for number, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                payload = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorruptArchive(f"records.jsonl line {number}: {exc}") from exc
            serializer = ArchiveRecordSerializer(data=payload)
            if not serializer.is_valid():
                raise CorruptArchive(f"records.jsonl line {number}: {serializer.errors}")
            values = None
            if payload.get("snapshot"):
                values, _ = load_snapshot(directory / payload["snapshot"])
            archive.append(SolutionRecord.from_payload(payload.pop("record_id"), payload, values, manifold))

    if meta.get("record_count", len(archive.records)) != len(archive.records):
        raise CorruptArchive(f"archive.json promises {meta['record_count']} records, found {len(archive.records)}.")
    return archive


def archive_io(target, direction, path=None):
    """``archive_io(archive, "save", path)`` writes an archive; ``archive_io(path, "load")`` reads one."""
    if direction == "save":
        return save_archive(target, path)
    if direction == "load":
        return load_archive(target)
    raise ValueError(f"Unknown archive direction {direction!r}.")


@transaction.atomic
def publish_archive(archive, path):
    """Mirror an archive into the database, replacing an earlier publication of the same path."""
    experiment, created = models.Experiment.objects.update_or_create(
        archive_path=str(Path(path).resolve()),
        defaults={
            "name": archive.name,
            "kind": archive.kind,
            "schema_version": archive.schema_version,
            "dimension": len(archive.lengths),
            "lengths": list(archive.lengths),
            "grid_sizes": list(archive.grid_sizes),
            "fiber_dimension": archive.m,
            "ground_energy": archive.mE,
            "config": archive.config,
            "notes": archive.notes,
        },
    )
    experiment.records.all().delete()
    experiment.sweep_rows.all().delete()

    models.SolutionRecord.objects.bulk_create([
        models.SolutionRecord(
            experiment=experiment,
            record_id=record.record_id,
            kind=record.kind,
            eps=record.eps,
            outcome=record.outcome,
            converged=record.converged,
            energy=record.total_energy,
            grad_norm=record.grad_norm,
            region=record.region or "",
            separation=record.separation,
            cluster_id=record.cluster_id,
            stayed_outside_tubes=record.stayed_outside_tubes,
            snapshot=record.snapshot or "",
            payload=_db_json(record.to_dict()),
        )
        for record in archive.records
    ])
    models.SweepRow.objects.bulk_create([
        models.SweepRow(
            experiment=experiment,
            eps=row["eps"],
            m_hat=row["m_hat"],
            d_hat=row["d_hat"],
            m_ratio=row["m_ratio"],
            d_ratio=row["d_ratio"],
            inequality_holds=row["inequality_holds"],
            cluster_count=row["cluster_count"],
            expected_pairs=row["expected_pairs"],
            payload=_db_json(row),
        )
        for row in summary_rows(archive)
    ])
    logger.info("%s experiment %s (%d records)", "published" if created else "republished", archive.name,
                len(archive.records))
    return experiment
