"""Ingestion: parse patient/medical-event tables into a sequence database.

Medical events are grouped into same-day baskets per patient, baskets are
ordered by date, and each sequence is prefixed with a demographic basket
(eid 0) holding ``yob:<year>`` and ``gender:<male|female>`` items so that
demographics can participate in mined patterns like any other item.
"""

from __future__ import annotations

import csv
import datetime as dt
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable

from .core import (
    EventSet,
    Sequence,
    SequenceDatabase,
    SymbolTable,
    escape_symbol,
    unescape_symbol,
)

SEQDB_HEADER = "#seqdb v1"

YOB_MIN = 1850

GENDER_MALE = "male"
GENDER_FEMALE = "female"
GENDER_UNKNOWN = "unknown"

_GENDER_ALIASES = {
    "m": GENDER_MALE,
    "male": GENDER_MALE,
    "f": GENDER_FEMALE,
    "female": GENDER_FEMALE,
    "u": GENDER_UNKNOWN,
    "unknown": GENDER_UNKNOWN,
    "": GENDER_UNKNOWN,
}

# Diagnostic kinds.
BAD_ROW = "bad-row"    # row dropped: structural or value problem
BAD_DATE = "bad-date"  # medical row dropped: partial or invalid date
WARNING = "warning"    # row kept, value coerced


class FormatError(Exception):
    """Fatal input-format problem (bad header, corrupt artifact)."""


@dataclass(frozen=True)
class PatientRecord:
    patient_key: str
    yob: int
    gender: str  # one of GENDER_*


@dataclass(frozen=True)
class MedicalEventRecord:
    patient_key: str
    date: dt.date
    code: str


@dataclass(frozen=True)
class Diagnostic:
    line_no: int
    message: str
    kind: str = BAD_ROW

    def __str__(self) -> str:
        return f"line {self.line_no}: {self.message}"


@dataclass
class IngestReport:
    patients_in: int = 0
    patients_out: int = 0
    events_in: int = 0
    events_kept: int = 0
    events_dropped_bad_date: int = 0
    events_merged_duplicate: int = 0
    events_dropped_orphan: int = 0

    def conserved(self) -> bool:
        return self.events_in == (
            self.events_kept
            + self.events_dropped_bad_date
            + self.events_merged_duplicate
            + self.events_dropped_orphan
        )

    def summary(self) -> str:
        return (
            f"patients: {self.patients_in} in, {self.patients_out} out; "
            f"events: {self.events_in} in, {self.events_kept} kept, "
            f"{self.events_dropped_bad_date} bad-date, "
            f"{self.events_merged_duplicate} merged duplicates, "
            f"{self.events_dropped_orphan} orphaned"
        )


def _header_indices(header: list[str], required: tuple[str, ...], what: str) -> dict[str, int]:
    names = [h.strip().lower() for h in header]
    missing = [col for col in required if col not in names]
    if missing:
        raise FormatError(f"{what}: missing required column(s) {', '.join(missing)}")
    return {col: names.index(col) for col in required}


def parse_patient_table(
    stream: IO[str], delimiter: str = ","
) -> tuple[list[PatientRecord], list[Diagnostic]]:
    """Parse the patient table (columns patient_id, yob, gender).

    Rows with an unusable key or year are dropped with a line-numbered
    diagnostic; a missing header or column is fatal.
    """
    reader = csv.reader(stream, delimiter=delimiter)
    try:
        header = next(reader)
    except StopIteration:
        raise FormatError("patient table: empty input, missing header") from None
    cols = _header_indices(header, ("patient_id", "yob", "gender"), "patient table")

    current_year = dt.date.today().year
    records: list[PatientRecord] = []
    diagnostics: list[Diagnostic] = []
    seen: set[str] = set()
    for line_no, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) <= max(cols.values()):
            diagnostics.append(Diagnostic(line_no, "too few fields"))
            continue
        key = row[cols["patient_id"]].strip()
        if not key:
            diagnostics.append(Diagnostic(line_no, "missing patient_id"))
            continue
        if key in seen:
            diagnostics.append(Diagnostic(line_no, f"duplicate patient_id {key!r}, keeping first"))
            continue
        raw_yob = row[cols["yob"]].strip()
        try:
            yob = int(raw_yob)
        except ValueError:
            diagnostics.append(Diagnostic(line_no, f"unparsable yob {raw_yob!r}"))
            continue
        if not YOB_MIN <= yob <= current_year:
            diagnostics.append(Diagnostic(line_no, f"yob {yob} outside [{YOB_MIN}, {current_year}]"))
            continue
        raw_gender = row[cols["gender"]].strip().lower()
        gender = _GENDER_ALIASES.get(raw_gender)
        if gender is None:
            diagnostics.append(
                Diagnostic(line_no, f"unrecognised gender {raw_gender!r}, treating as unknown", WARNING)
            )
            gender = GENDER_UNKNOWN
        seen.add(key)
        records.append(PatientRecord(key, yob, gender))
    return records, diagnostics


def _parse_full_date(text: str) -> dt.date | None:
    """A date is usable only when year, month and day are all present and valid."""
    parts = text.strip().split("-")
    if len(parts) != 3:
        return None
    try:
        year, month, day = (int(p) for p in parts)
        return dt.date(year, month, day)
    except ValueError:
        return None


def parse_medical_table(
    stream: IO[str], delimiter: str = ","
) -> tuple[list[MedicalEventRecord], list[Diagnostic]]:
    """Parse the medical-event table (columns patient_id, date, code).

    Rows with partial or missing dates are dropped and counted via BAD_DATE
    diagnostics; kept rows always carry a full calendar date.
    """
    reader = csv.reader(stream, delimiter=delimiter)
    try:
        header = next(reader)
    except StopIteration:
        raise FormatError("medical table: empty input, missing header") from None
    cols = _header_indices(header, ("patient_id", "date", "code"), "medical table")

    records: list[MedicalEventRecord] = []
    diagnostics: list[Diagnostic] = []
    date_cache: dict[str, dt.date | None] = {}
    for line_no, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) <= max(cols.values()):
            diagnostics.append(Diagnostic(line_no, "too few fields"))
            continue
        key = row[cols["patient_id"]].strip()
        code = row[cols["code"]].strip()
        if not key or not code:
            diagnostics.append(Diagnostic(line_no, "missing patient_id or code"))
            continue
        raw_date = row[cols["date"]]
        if raw_date in date_cache:
            date = date_cache[raw_date]
        else:
            date = _parse_full_date(raw_date)
            date_cache[raw_date] = date
        if date is None:
            diagnostics.append(
                Diagnostic(line_no, f"partial or invalid date {raw_date.strip()!r}", BAD_DATE)
            )
            continue
        records.append(MedicalEventRecord(key, date, code))
    return records, diagnostics


def demographic_items(patient: PatientRecord) -> list[str]:
    """Items for the eid-0 basket; unknown gender contributes no item."""
    items = [f"yob:{patient.yob}"]
    if patient.gender != GENDER_UNKNOWN:
        items.append(f"gender:{patient.gender}")
    return items


def build_sequences(
    patients: list[PatientRecord],
    events: list[MedicalEventRecord],
    events_dropped_bad_date: int = 0,
    patients_in: int | None = None,
) -> tuple[SequenceDatabase, IngestReport]:
    """Group events into date baskets per patient and assemble the database.

    sids are assigned in ascending patient_key order; eid 0 is the demographic
    basket; duplicate (patient, date, code) events merge; events without a
    matching patient are dropped as orphans. Patients with no kept events keep
    their demographic-only sequence.
    """
    by_key = {p.patient_key: p for p in patients}
    if len(by_key) != len(patients):
        raise ValueError("patient keys must be unique")

    report = IngestReport(
        patients_in=len(patients) if patients_in is None else patients_in,
        events_in=len(events) + events_dropped_bad_date,
        events_dropped_bad_date=events_dropped_bad_date,
    )

    grouped: dict[str, dict[dt.date, set[str]]] = {key: {} for key in by_key}
    for ev in events:
        baskets = grouped.get(ev.patient_key)
        if baskets is None:
            report.events_dropped_orphan += 1
            continue
        codes = baskets.setdefault(ev.date, set())
        if ev.code in codes:
            report.events_merged_duplicate += 1
        else:
            codes.add(ev.code)
            report.events_kept += 1

    # Interning in emission order (per basket, new symbols sorted) keeps item
    # ids aligned with the serialized file so round-trips are byte-exact.
    symbols = SymbolTable()
    sequences: list[Sequence] = []
    for sid, key in enumerate(sorted(by_key)):
        patient = by_key[key]
        baskets_out: list[tuple[int, EventSet]] = [
            (0, EventSet(symbols.intern(name) for name in sorted(demographic_items(patient))))
        ]
        for eid, date in enumerate(sorted(grouped[key]), start=1):
            codes = sorted(grouped[key][date])
            baskets_out.append((eid, EventSet(symbols.intern(code) for code in codes)))
        sequences.append(Sequence(sid, baskets_out))

    report.patients_out = len(sequences)
    db = SequenceDatabase(symbols, sequences)
    return db, report


def ingest_tables(
    patient_stream: IO[str], medical_stream: IO[str], delimiter: str = ","
) -> tuple[SequenceDatabase, IngestReport, list[Diagnostic]]:
    """Full table-to-database pipeline; diagnostics from both parsers combined."""
    patients, pat_diags = parse_patient_table(patient_stream, delimiter)
    events, med_diags, = parse_medical_table(medical_stream, delimiter)
    db, report = build_sequences(
        patients,
        events,
        events_dropped_bad_date=sum(1 for d in med_diags if d.kind == BAD_DATE),
        patients_in=len(patients) + sum(1 for d in pat_diags if d.kind == BAD_ROW),
    )
    return db, report, pat_diags + med_diags


def write_seqdb(db: SequenceDatabase, path: str | Path) -> None:
    """Serialize: one line per basket, ``sid<TAB>eid<TAB>item,item,...`` sorted
    by (sid, eid). Stable bytes for identical databases."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(SEQDB_HEADER + "\n")
        for seq in db.sequences:
            for eid, basket in seq.events:
                names = ",".join(escape_symbol(db.symbols.name_of(i)) for i in basket.items)
                fh.write(f"{seq.sid}\t{eid}\t{names}\n")


def read_seqdb(source: str | Path | IO[str]) -> SequenceDatabase:
    """Load a ``#seqdb v1`` file back into a SequenceDatabase."""
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            return read_seqdb(fh)

    header = source.readline().rstrip("\n")
    if header != SEQDB_HEADER:
        raise FormatError(f"expected {SEQDB_HEADER!r} header, got {header!r}")
    symbols = SymbolTable()
    per_sid: dict[int, list[tuple[int, EventSet]]] = {}
    for line_no, line in enumerate(source, start=2):
        line = line.rstrip("\n")
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise FormatError(f"line {line_no}: expected 3 tab-separated fields")
        try:
            sid, eid = int(parts[0]), int(parts[1])
        except ValueError:
            raise FormatError(f"line {line_no}: non-integer sid/eid") from None
        items = [symbols.intern(unescape_symbol(tok)) for tok in parts[2].split(",") if tok]
        if not items:
            raise FormatError(f"line {line_no}: empty basket")
        per_sid.setdefault(sid, []).append((eid, EventSet(items)))

    sequences = [Sequence(sid, events) for sid, events in per_sid.items()]
    return SequenceDatabase(symbols, sequences)


def iter_incidences(db: SequenceDatabase) -> Iterable[tuple[int, int, int]]:
    """Yield every (sid, eid, item) incidence in (sid, eid, item) order."""
    for seq in db.sequences:
        for eid, basket in seq.events:
            for item in basket.items:
                yield seq.sid, eid, item
