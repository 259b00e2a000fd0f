"""Polling-station data model, CSV ingestion, and metric-aware filtering.

Canonical input is a flat UTF-8 CSV with header
``region,territory,station_id,registered,ballots,leader_votes`` and one row
per station.  Mapping from raw commission exports (many ballot categories)
to the three counts is the caller's preprocessing job.
"""

from __future__ import annotations

import csv
import hashlib
import io
import sys
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, TextIO

import numpy as np

from .errors import ValidationError
from .metrics import MetricKind

CSV_HEADER = ("region", "territory", "station_id",
              "registered", "ballots", "leader_votes")

_COUNT_FIELDS = ("registered", "ballots", "leader_votes")


@dataclass(frozen=True)
class StationRecord:
    """One polling station's counts."""

    region: str
    territory: str
    station_id: str
    registered: int
    ballots: int
    leader_votes: int

    def validate(self) -> None:
        if not self.station_id:
            raise ValidationError("station_id must be non-empty")
        for name in _COUNT_FIELDS:
            v = getattr(self, name)
            if not isinstance(v, int) or v < 0:
                raise ValidationError(
                    f"station {self.key}: {name} must be a non-negative "
                    f"integer, got {v!r}")
        if self.ballots > self.registered:
            raise ValidationError(
                f"station {self.key}: ballots ({self.ballots}) exceeds "
                f"registered ({self.registered})")
        if self.leader_votes > self.ballots:
            raise ValidationError(
                f"station {self.key}: leader_votes ({self.leader_votes}) "
                f"exceeds ballots ({self.ballots})")

    @property
    def key(self) -> tuple:
        return (self.region, self.territory, self.station_id)


@dataclass(frozen=True)
class ElectionDataset:
    """Immutable, ordered collection of stations for one election."""

    election_id: str
    records: tuple
    source_digest: str

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def count_arrays(self):
        """(registered, ballots, leader_votes) as int64 arrays in file order."""
        n = np.fromiter((r.registered for r in self.records), np.int64, len(self.records))
        b = np.fromiter((r.ballots for r in self.records), np.int64, len(self.records))
        l = np.fromiter((r.leader_votes for r in self.records), np.int64, len(self.records))
        return n, b, l


@dataclass(frozen=True)
class FilterSpec:
    """Which stations an analysis keeps.

    Stations with zero registered voters are always dropped (both
    percentages are undefined there); everything else is configurable.
    """

    min_registered: int = 0
    exclude_full_turnout: bool = True
    require_nonzero_ballots_for_leader: bool = True

    def __post_init__(self):
        if self.min_registered < 0:
            raise ValueError(
                f"min_registered must be >= 0, got {self.min_registered}")
        if not self.require_nonzero_ballots_for_leader:
            # Leader percentages are undefined at zero ballots, so the
            # exclusion cannot be waived.
            raise ValueError(
                "require_nonzero_ballots_for_leader must stay True")


@dataclass
class ExclusionTally:
    """Stations dropped by apply_filter, itemized by (first matching) reason."""

    zero_registered: int = 0
    below_min_registered: int = 0
    full_turnout: int = 0
    zero_ballots: int = 0

    @property
    def total(self) -> int:
        return (self.zero_registered + self.below_min_registered
                + self.full_turnout + self.zero_ballots)

    def as_dict(self) -> dict:
        return {
            "zero_registered": self.zero_registered,
            "below_min_registered": self.below_min_registered,
            "full_turnout": self.full_turnout,
            "zero_ballots": self.zero_ballots,
        }


def _parse_rows(text: str, lenient: bool, diagnostics: TextIO):
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ValidationError("empty input: missing header row")
    if tuple(header) != CSV_HEADER:
        raise ValidationError(
            f"bad header {header!r}; expected {','.join(CSV_HEADER)}")

    records = []
    seen = {}
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        try:
            record = _parse_row(row, lineno)
            if record.key in seen:
                raise ValidationError(
                    f"row {lineno}: duplicate station key {record.key} "
                    f"(first seen on row {seen[record.key]})")
            seen[record.key] = lineno
            records.append(record)
        except ValidationError as exc:
            if not lenient:
                raise
            print(f"skipped row {lineno}: {exc}", file=diagnostics)
    return records


def _parse_row(row: Sequence[str], lineno: int) -> StationRecord:
    if len(row) != len(CSV_HEADER):
        raise ValidationError(
            f"row {lineno}: expected {len(CSV_HEADER)} fields, got {len(row)}")
    counts = {}
    for name, raw in zip(_COUNT_FIELDS, row[3:]):
        raw = raw.strip()
        try:
            counts[name] = int(raw)
        except ValueError:
            raise ValidationError(
                f"row {lineno}: field {name} is not an integer: {raw!r}")
        if counts[name] < 0:
            raise ValidationError(
                f"row {lineno}: field {name} is negative: {counts[name]}")
    record = StationRecord(region=row[0], territory=row[1],
                           station_id=row[2].strip(), **counts)
    try:
        record.validate()
    except ValidationError as exc:
        raise ValidationError(f"row {lineno}: {exc}")
    return record


def ingest(path, election_id: str, lenient: bool = False,
           diagnostics: Optional[TextIO] = None) -> ElectionDataset:
    """Load a canonical CSV file into an ElectionDataset.

    Strict mode (default) rejects the whole file on the first bad row;
    forensic analysis must not silently drop data.  Lenient mode skips bad
    rows, reporting each one on the diagnostic stream (stderr by default).
    """
    with open(path, "rb") as fh:
        raw = fh.read()
    digest = hashlib.sha256(raw).hexdigest()
    text = raw.decode("utf-8")
    records = _parse_rows(text, lenient, diagnostics or sys.stderr)
    return ElectionDataset(election_id=election_id,
                           records=tuple(records),
                           source_digest=digest)


def canonical_bytes(records: Iterable[StationRecord]) -> bytes:
    """Canonical CSV serialization (header + one row per station)."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in records:
        writer.writerow([r.region, r.territory, r.station_id,
                         r.registered, r.ballots, r.leader_votes])
    return out.getvalue().encode("utf-8")


def from_records(election_id: str, records: Iterable[StationRecord]) -> ElectionDataset:
    """Build a dataset in memory; the digest covers the canonical CSV bytes.

    This matches ingest(): writing the dataset with emit() and reading it
    back reproduces both records and digest.
    """
    records = tuple(records)
    seen = set()
    for r in records:
        r.validate()
        if r.key in seen:
            raise ValidationError(f"duplicate station key {r.key}")
        seen.add(r.key)
    digest = hashlib.sha256(canonical_bytes(records)).hexdigest()
    return ElectionDataset(election_id=election_id, records=records,
                           source_digest=digest)


def emit(dataset: ElectionDataset, path) -> None:
    """Write a dataset as canonical CSV."""
    with open(path, "wb") as fh:
        fh.write(canonical_bytes(dataset.records))


def apply_filter(dataset: ElectionDataset, filter_spec: FilterSpec,
                 metric: MetricKind):
    """Partition a dataset into (included records, ExclusionTally).

    A station is excluded for the first matching reason, in order: zero
    registered voters, below the size cutoff, full turnout (when the spec
    says so), zero ballots (leader-result metric only).  Included count plus
    tally total always equals the dataset size.
    """
    included = []
    tally = ExclusionTally()
    for r in dataset.records:
        if r.registered == 0:
            tally.zero_registered += 1
        elif r.registered < filter_spec.min_registered:
            tally.below_min_registered += 1
        elif filter_spec.exclude_full_turnout and r.ballots == r.registered:
            tally.full_turnout += 1
        elif metric.needs_ballots and r.ballots == 0:
            tally.zero_ballots += 1
        else:
            included.append(r)
    return included, tally
