"""On-disk data model shared by simulation, inference, the service, and the UI.

Trial logs are CSV with a fixed header; configs and reports are JSON. All
serialization is locale-independent (decimal point, no separators).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, fields

from .conditions import CONDITIONS
from .probability import on_display_grid

TRIAL_HEADER = [
    "participant_id",
    "condition",
    "trial_index",
    "ai_confidence",
    "ai_correct",
    "human_judged_correct",
    "human_correct",
    "response_ms",
    "timestamp",
]
MODEL_STATE_COLUMNS = ["v", "b", "w"]


class TrialValidationError(ValueError):
    """A trial record violates the schema; carries the offending CSV row when known."""

    def __init__(self, message: str, row: int | None = None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


@dataclass
class TrialRecord:
    """One judged trial.

    `ai_confidence` is the displayed (rounded) confidence. `human_correct`
    must equal (human_judged_correct == ai_correct). The optional v/b/w fields
    carry the simulating agent's perceived accuracy and state and appear in
    exports only when present.
    """

    participant_id: str
    condition: str
    trial_index: int
    ai_confidence: float
    ai_correct: bool
    human_judged_correct: bool
    human_correct: bool
    response_ms: int | None = None
    timestamp: str | None = None
    v: float | None = None
    b: float | None = None
    w: float | None = None


def validate_record(rec: TrialRecord, row: int | None = None) -> None:
    if rec.condition not in CONDITIONS:
        raise TrialValidationError(f"unknown condition {rec.condition!r}", row)
    if rec.trial_index < 1:
        raise TrialValidationError(f"trial_index must be >= 1, got {rec.trial_index}", row)
    if not on_display_grid(rec.ai_confidence):
        raise TrialValidationError(
            f"ai_confidence {rec.ai_confidence} is not a multiple of 0.1 in [0, 1]", row
        )
    if rec.human_correct != (rec.human_judged_correct == rec.ai_correct):
        raise TrialValidationError(
            "human_correct contradicts (human_judged_correct == ai_correct)", row
        )
    if rec.response_ms is not None and rec.response_ms < 0:
        raise TrialValidationError(f"negative response_ms {rec.response_ms}", row)


def _check_contiguity(records: list[TrialRecord], rows: list[int] | None = None) -> None:
    seen: dict[str, int] = {}
    for i, rec in enumerate(records):
        expected = seen.get(rec.participant_id, 0) + 1
        if rec.trial_index != expected:
            row = rows[i] if rows is not None else None
            raise TrialValidationError(
                f"participant {rec.participant_id!r}: trial_index {rec.trial_index} "
                f"but expected {expected} (unique, contiguous from 1)",
                row,
            )
        seen[rec.participant_id] = rec.trial_index


def _fmt_bool(b: bool) -> str:
    return "1" if b else "0"


def write_trials(records: list[TrialRecord], path) -> None:
    """Write records as CSV; adds v/b/w columns when any record carries them."""
    for i, rec in enumerate(records):
        validate_record(rec, row=i + 2)
    _check_contiguity(records, rows=[i + 2 for i in range(len(records))])
    with_state = any(r.v is not None or r.b is not None or r.w is not None for r in records)
    header = TRIAL_HEADER + MODEL_STATE_COLUMNS if with_state else TRIAL_HEADER
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for rec in records:
            row = [
                rec.participant_id,
                rec.condition,
                str(rec.trial_index),
                f"{rec.ai_confidence:.1f}",
                _fmt_bool(rec.ai_correct),
                _fmt_bool(rec.human_judged_correct),
                _fmt_bool(rec.human_correct),
                "" if rec.response_ms is None else str(int(rec.response_ms)),
                "" if rec.timestamp is None else rec.timestamp,
            ]
            if with_state:
                row += [
                    "" if x is None else f"{x:.6f}" for x in (rec.v, rec.b, rec.w)
                ]
            writer.writerow(row)


def _parse_bool(s: str, name: str, row: int) -> bool:
    if s == "1":
        return True
    if s == "0":
        return False
    raise TrialValidationError(f"{name} must be 0 or 1, got {s!r}", row)


def read_trials(path) -> list[TrialRecord]:
    """Read and validate a trial CSV; raises TrialValidationError with the row number."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise TrialValidationError("empty file", row=1)
        if header == TRIAL_HEADER:
            with_state = False
        elif header == TRIAL_HEADER + MODEL_STATE_COLUMNS:
            with_state = True
        else:
            raise TrialValidationError(f"unexpected header {header!r}", row=1)
        records: list[TrialRecord] = []
        rows: list[int] = []
        for lineno, row in enumerate(reader, start=2):
            expected = len(TRIAL_HEADER) + (3 if with_state else 0)
            if len(row) != expected:
                raise TrialValidationError(
                    f"expected {expected} fields, got {len(row)}", lineno
                )
            try:
                rec = TrialRecord(
                    participant_id=row[0],
                    condition=row[1],
                    trial_index=int(row[2]),
                    ai_confidence=float(row[3]),
                    ai_correct=_parse_bool(row[4], "ai_correct", lineno),
                    human_judged_correct=_parse_bool(row[5], "human_judged_correct", lineno),
                    human_correct=_parse_bool(row[6], "human_correct", lineno),
                    response_ms=None if row[7] == "" else int(row[7]),
                    timestamp=None if row[8] == "" else row[8],
                )
            except ValueError as exc:
                if isinstance(exc, TrialValidationError):
                    raise
                raise TrialValidationError(str(exc), lineno)
            if with_state:
                rec.v = None if row[9] == "" else float(row[9])
                rec.b = None if row[10] == "" else float(row[10])
                rec.w = None if row[11] == "" else float(row[11])
            validate_record(rec, lineno)
            records.append(rec)
            rows.append(lineno)
    _check_contiguity(records, rows)
    return records


def group_by_participant(records: list[TrialRecord]) -> dict[str, list[TrialRecord]]:
    """Group records by participant, each group sorted by trial_index."""
    groups: dict[str, list[TrialRecord]] = {}
    for rec in records:
        groups.setdefault(rec.participant_id, []).append(rec)
    for recs in groups.values():
        recs.sort(key=lambda r: r.trial_index)
    return groups


_SESSION_CONFIG_KEYS = {
    "condition", "n_trials", "seed", "bonus_per_correct", "bonus_cap", "pool_size",
}


@dataclass
class SessionConfig:
    """Configuration of a live experiment session."""

    condition: str = "random"
    n_trials: int = 50
    seed: int = 0
    bonus_per_correct: float = 0.01
    bonus_cap: float = 0.50
    pool_size: int = 10_000

    def __post_init__(self):
        if self.condition != "random" and self.condition not in CONDITIONS:
            raise ValueError(f"condition must be 'random' or one of {CONDITIONS}")
        if self.n_trials < 1:
            raise ValueError("n_trials must be >= 1")
        if self.bonus_cap < 0:
            raise ValueError("bonus_cap must be >= 0")
        if self.pool_size < 1:
            raise ValueError("pool_size must be >= 1")

    @classmethod
    def from_json(cls, text: str) -> "SessionConfig":
        data = json.loads(text)
        if not isinstance(data, dict):
            raise ValueError("session config must be a JSON object")
        unknown = set(data) - _SESSION_CONFIG_KEYS
        if unknown:
            raise ValueError(f"unknown session config keys: {sorted(unknown)}")
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps({f.name: getattr(self, f.name) for f in fields(self)})


@dataclass
class SessionReport:
    passed: bool
    violations: list[str]


def validate_session(records: list[TrialRecord], config: SessionConfig) -> SessionReport:
    """Check one participant's session against its config; report-based, never raises."""
    violations: list[str] = []
    if len(records) != config.n_trials:
        violations.append(f"count: expected {config.n_trials} trials, got {len(records)}")
    participants = {r.participant_id for r in records}
    if len(participants) > 1:
        violations.append(f"participants: expected one, got {sorted(participants)}")
    conditions = {r.condition for r in records}
    if len(conditions) > 1:
        violations.append(f"condition: mixed conditions {sorted(conditions)}")
    elif conditions and config.condition != "random" and conditions != {config.condition}:
        violations.append(
            f"condition: expected {config.condition!r}, got {conditions.pop()!r}"
        )
    ordered = sorted(records, key=lambda r: r.trial_index)
    for expected, rec in enumerate(ordered, start=1):
        if rec.trial_index != expected:
            violations.append(
                f"contiguity: trial_index {rec.trial_index} where {expected} expected"
            )
            break
    for rec in ordered:
        try:
            validate_record(rec)
        except TrialValidationError as exc:
            violations.append(f"record trial {rec.trial_index}: {exc}")
    return SessionReport(passed=not violations, violations=violations)
