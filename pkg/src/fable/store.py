"""Durable persistence: claims, assessments, notes, profiles, and
questionnaires as an append-only event log.

All state is a pure function of the log. Storage is one newline-delimited
JSON file plus an optional snapshot; a lock file refuses concurrent
writers from other processes. Desk-scale by design.
"""

from __future__ import annotations

import csv
import io
import json
import os
import threading
import uuid
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path

from .assessment import Assessment, assessment_from_dict, assessment_to_dict
from .questionnaire import (
    Questionnaire,
    dump_questionnaire,
    load_questionnaire,
)
from .triage import PriorityProfile, profile_from_dict, profile_to_dict

CLAIM_STATUSES = ("open", "in_progress", "published", "dismissed")

# Allowed status transitions: forward along the lifecycle only.
_TRANSITIONS = {
    "open": {"in_progress", "dismissed"},
    "in_progress": {"published", "dismissed"},
    "published": set(),
    "dismissed": set(),
}

EVENT_KINDS = (
    "ClaimAdded",
    "StatusChanged",
    "AssessmentRecorded",
    "NoteAdded",
    "ProfileSaved",
    "QuestionnaireRegistered",
)


class StoreError(Exception):
    """Base class for storage failures."""


class ReferentialError(StoreError):
    """Event references an id that does not exist."""


class LogCorruptionError(StoreError):
    """The event log violates its invariants (gap, duplicate seq, torn or
    malformed record). Surfaced, never skipped."""


class LockError(StoreError):
    """Another process holds the writer lock."""


def _now() -> datetime:
    return datetime.now(timezone.utc)


def _ts(dt: datetime) -> str:
    return dt.isoformat().replace("+00:00", "Z")


def _parse_ts(raw: str) -> datetime:
    dt = datetime.fromisoformat(raw.replace("Z", "+00:00"))
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt


@dataclass(frozen=True)
class Claim:
    claim_id: str
    text: str
    source_url: str | None = None
    platform: str | None = None
    created_at: datetime = field(default_factory=_now)
    status: str = "open"

    def __post_init__(self):
        if not self.claim_id:
            raise StoreError("claim_id must be nonempty")
        if not self.text:
            raise StoreError("empty claim text")
        if self.status not in CLAIM_STATUSES:
            raise StoreError(f"unknown status: {self.status!r}")


@dataclass(frozen=True)
class Note:
    claim_id: str
    author_id: str
    body: str
    created_at: datetime = field(default_factory=_now)

    def __post_init__(self):
        if not self.body:
            raise StoreError("note body must be nonempty")


@dataclass(frozen=True)
class EventRecord:
    seq: int
    kind: str
    payload: dict
    recorded_at: datetime

    def to_dict(self) -> dict:
        return {
            "seq": self.seq,
            "kind": self.kind,
            "recorded_at": _ts(self.recorded_at),
            "payload": self.payload,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "EventRecord":
        try:
            seq = doc["seq"]
            kind = doc["kind"]
            payload = doc["payload"]
            recorded_at = _parse_ts(doc["recorded_at"])
        except (KeyError, TypeError, ValueError) as e:
            raise LogCorruptionError(f"malformed event record: {e}") from e
        if kind not in EVENT_KINDS:
            raise LogCorruptionError(f"unknown event kind: {kind!r}")
        if not isinstance(seq, int) or not isinstance(payload, dict):
            raise LogCorruptionError("event seq must be int and payload an object")
        return cls(seq=seq, kind=kind, payload=payload, recorded_at=recorded_at)


@dataclass
class MaterializedState:
    """Replayed view of the log. Treated as immutable by readers; the store
    rebuilds rather than mutates shared instances."""

    claims: dict[str, Claim] = field(default_factory=dict)
    assessments: dict[str, list[Assessment]] = field(default_factory=dict)
    notes: dict[str, list[Note]] = field(default_factory=dict)
    profiles: dict[str, PriorityProfile] = field(default_factory=dict)
    questionnaires: dict[int, Questionnaire] = field(default_factory=dict)
    last_seq: int = 0

    def active_questionnaire(self) -> Questionnaire | None:
        if not self.questionnaires:
            return None
        return self.questionnaires[max(self.questionnaires)]


def claim_to_payload(c: Claim) -> dict:
    payload = {
        "claim_id": c.claim_id,
        "text": c.text,
        "created_at": _ts(c.created_at),
        "status": c.status,
    }
    if c.source_url is not None:
        payload["source_url"] = c.source_url
    if c.platform is not None:
        payload["platform"] = c.platform
    return payload


def claim_from_payload(p: dict) -> Claim:
    return Claim(
        claim_id=p["claim_id"],
        text=p["text"],
        source_url=p.get("source_url"),
        platform=p.get("platform"),
        created_at=_parse_ts(p["created_at"]),
        status=p.get("status", "open"),
    )


def apply_event(state: MaterializedState, event: EventRecord) -> MaterializedState:
    """Left-fold step: validate the event against current state and return
    the successor state. Raises on any integrity violation."""
    if event.seq != state.last_seq + 1:
        raise LogCorruptionError(
            f"seq gap: expected {state.last_seq + 1}, got {event.seq}"
        )
    new = MaterializedState(
        claims=dict(state.claims),
        assessments={k: list(v) for k, v in state.assessments.items()},
        notes={k: list(v) for k, v in state.notes.items()},
        profiles=dict(state.profiles),
        questionnaires=dict(state.questionnaires),
        last_seq=event.seq,
    )
    p = event.payload
    if event.kind == "ClaimAdded":
        claim = claim_from_payload(p)
        if claim.claim_id in new.claims:
            raise ReferentialError(f"claim already exists: {claim.claim_id!r}")
        new.claims[claim.claim_id] = claim
    elif event.kind == "StatusChanged":
        claim = new.claims.get(p.get("claim_id"))
        if claim is None:
            raise ReferentialError(f"unknown claim: {p.get('claim_id')!r}")
        target = p.get("status")
        if target not in _TRANSITIONS.get(claim.status, set()):
            raise StoreError(
                f"illegal status transition {claim.status!r} -> {target!r} "
                f"for claim {claim.claim_id!r}"
            )
        new.claims[claim.claim_id] = replace(claim, status=target)
    elif event.kind == "AssessmentRecorded":
        assessment = assessment_from_dict(p)
        if assessment.claim_id not in new.claims:
            raise ReferentialError(f"unknown claim: {assessment.claim_id!r}")
        if assessment.questionnaire_version not in new.questionnaires:
            raise ReferentialError(
                f"unknown questionnaire version: {assessment.questionnaire_version}"
            )
        q = new.questionnaires[assessment.questionnaire_version]
        for ans in assessment.answers:
            if not q.has_question(ans.question_id):
                raise ReferentialError(f"unknown question id: {ans.question_id!r}")
        new.assessments.setdefault(assessment.claim_id, []).append(assessment)
    elif event.kind == "NoteAdded":
        if p.get("claim_id") not in new.claims:
            raise ReferentialError(f"unknown claim: {p.get('claim_id')!r}")
        note = Note(claim_id=p["claim_id"], author_id=p.get("author_id", ""),
                    body=p.get("body", ""), created_at=_parse_ts(p["created_at"]))
        new.notes.setdefault(note.claim_id, []).append(note)
    elif event.kind == "ProfileSaved":
        profile = profile_from_dict(p)
        new.profiles[profile.name] = profile
    elif event.kind == "QuestionnaireRegistered":
        q = load_questionnaire(json.dumps(p))
        new.questionnaires[q.version] = q
    else:
        raise LogCorruptionError(f"unknown event kind: {event.kind!r}")
    return new


def replay(events: list[EventRecord]) -> MaterializedState:
    """Fold the full log into a state. Deterministic; any invariant
    violation raises instead of being skipped."""
    state = MaterializedState()
    for event in events:
        state = apply_event(state, event)
    return state


class EventStore:
    """Single-writer event log backed by one NDJSON file.

    Appends are serialized through an in-process lock and flushed to disk
    before returning. A sibling .lock file refuses other processes.
    """

    def __init__(self, data_dir: str | Path, acquire_lock: bool = True):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.log_path = self.data_dir / "events.ndjson"
        self.lock_path = self.data_dir / "events.lock"
        self._mutex = threading.Lock()
        self._locked = False
        if acquire_lock:
            self._acquire_lock()
        self._events = self._read_log()
        self._state = replay(self._events)

    # -- locking ---------------------------------------------------------

    def _acquire_lock(self):
        try:
            fd = os.open(self.lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise LockError(
                f"another process holds the writer lock ({self.lock_path}); "
                "multi-process write access is unsupported"
            ) from None
        with os.fdopen(fd, "w") as f:
            f.write(str(os.getpid()))
        self._locked = True

    def close(self):
        if self._locked:
            try:
                self.lock_path.unlink()
            except FileNotFoundError:
                pass
            self._locked = False

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    # -- log I/O ---------------------------------------------------------

    def _read_log(self) -> list[EventRecord]:
        if not self.log_path.exists():
            return []
        events = []
        with open(self.log_path, "r", encoding="utf-8") as f:
            for lineno, line in enumerate(f, start=1):
                stripped = line.strip()
                if not stripped:
                    continue
                try:
                    doc = json.loads(stripped)
                except json.JSONDecodeError as e:
                    raise LogCorruptionError(
                        f"{self.log_path}:{lineno}: truncated or malformed record: {e}"
                    ) from e
                events.append(EventRecord.from_dict(doc))
        return events

    # -- public API ------------------------------------------------------

    @property
    def state(self) -> MaterializedState:
        """Point-in-time snapshot; replaced wholesale on append."""
        return self._state

    @property
    def events(self) -> list[EventRecord]:
        return list(self._events)

    def append(self, kind: str, payload: dict) -> EventRecord:
        """Validate, durably write, and apply one event. The write is
        flushed and fsynced before the new state becomes visible."""
        with self._mutex:
            event = EventRecord(
                seq=self._state.last_seq + 1,
                kind=kind,
                payload=payload,
                recorded_at=_now(),
            )
            new_state = apply_event(self._state, event)  # validates first
            line = json.dumps(event.to_dict(), ensure_ascii=False)
            with open(self.log_path, "a", encoding="utf-8") as f:
                f.write(line + "\n")
                f.flush()
                os.fsync(f.fileno())
            self._events.append(event)
            self._state = new_state
            return event

    # -- convenience appends --------------------------------------------

    def add_claim(self, claim: Claim) -> EventRecord:
        return self.append("ClaimAdded", claim_to_payload(claim))

    def change_status(self, claim_id: str, status: str) -> EventRecord:
        return self.append("StatusChanged", {"claim_id": claim_id, "status": status})

    def record_assessment(self, assessment: Assessment) -> EventRecord:
        return self.append("AssessmentRecorded", assessment_to_dict(assessment))

    def add_note(self, note: Note) -> EventRecord:
        return self.append("NoteAdded", {
            "claim_id": note.claim_id,
            "author_id": note.author_id,
            "body": note.body,
            "created_at": _ts(note.created_at),
        })

    def save_profile(self, profile: PriorityProfile) -> EventRecord:
        return self.append("ProfileSaved", profile_to_dict(profile))

    def register_questionnaire(self, q: Questionnaire) -> EventRecord:
        return self.append("QuestionnaireRegistered",
                           json.loads(dump_questionnaire(q)))

    # -- batch import ----------------------------------------------------

    def import_claims(self, source: bytes, fmt: str = "auto") -> tuple[list[Claim], list[dict]]:
        """Import a claim batch (JSON lines or CSV). Valid rows append
        ClaimAdded events; invalid rows come back as {line, reason}.
        Partial success is normal and reported."""
        text = source.decode("utf-8")
        if fmt == "auto":
            fmt = "csv" if _looks_like_csv(text) else "jsonl"
        rows = _parse_csv(text) if fmt == "csv" else _parse_jsonl(text)

        imported: list[Claim] = []
        errors: list[dict] = []
        seen_batch: set[str] = set()
        for lineno, row, err in rows:
            if err is not None:
                errors.append({"line": lineno, "reason": err})
                continue
            claim_id = row.get("claim_id") or str(uuid.uuid4())
            text_field = (row.get("text") or "").strip()
            if not text_field:
                errors.append({"line": lineno, "reason": "empty claim text"})
                continue
            if claim_id in seen_batch:
                errors.append({"line": lineno,
                               "reason": f"duplicate claim_id in batch: {claim_id!r}"})
                continue
            if claim_id in self._state.claims:
                errors.append({"line": lineno,
                               "reason": f"claim already exists: {claim_id!r}"})
                continue
            seen_batch.add(claim_id)
            claim = Claim(claim_id=claim_id, text=text_field,
                          source_url=row.get("source_url") or None,
                          platform=row.get("platform") or None)
            self.add_claim(claim)
            imported.append(claim)
        return imported, errors

    # -- audit export ----------------------------------------------------

    def export_audit(self, claim_id: str) -> list[EventRecord]:
        """Every event touching one claim, in seq order."""
        if claim_id not in self._state.claims:
            raise ReferentialError(f"unknown claim: {claim_id!r}")
        return [e for e in self._events if _touches(e, claim_id)]

    # -- snapshots -------------------------------------------------------

    def snapshot(self) -> dict:
        return snapshot_state(self._state)


def _touches(e: EventRecord, claim_id: str) -> bool:
    return e.payload.get("claim_id") == claim_id


def _looks_like_csv(text: str) -> bool:
    first = text.lstrip().splitlines()[0] if text.strip() else ""
    return not first.startswith("{") and "text" in first.split(",")


def _parse_jsonl(text: str):
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as e:
            yield lineno, {}, f"invalid JSON: {e.msg}"
            continue
        if not isinstance(doc, dict):
            yield lineno, {}, "row must be a JSON object"
            continue
        yield lineno, doc, None


def _parse_csv(text: str):
    reader = csv.DictReader(io.StringIO(text))
    for lineno, row in enumerate(reader, start=2):
        yield lineno, {k: v for k, v in row.items() if v not in (None, "")}, None


def snapshot_state(state: MaterializedState) -> dict:
    """Serialize the materialized state at its current seq so restore can
    skip replaying everything before it."""
    return {
        "schema": "fable-snapshot/1",
        "seq": state.last_seq,
        "claims": [claim_to_payload(c) for c in state.claims.values()],
        "assessments": {
            claim_id: [assessment_to_dict(a) for a in items]
            for claim_id, items in state.assessments.items()
        },
        "notes": {
            claim_id: [
                {"claim_id": n.claim_id, "author_id": n.author_id,
                 "body": n.body, "created_at": _ts(n.created_at)}
                for n in items
            ]
            for claim_id, items in state.notes.items()
        },
        "profiles": [profile_to_dict(p) for p in state.profiles.values()],
        "questionnaires": [
            json.loads(dump_questionnaire(q)) for q in state.questionnaires.values()
        ],
    }


def restore(snapshot: dict, tail: list[EventRecord]) -> MaterializedState:
    """Rebuild state from a snapshot document plus the events after it."""
    if snapshot.get("schema") != "fable-snapshot/1":
        raise StoreError(f"unsupported snapshot schema: {snapshot.get('schema')!r}")
    seq = snapshot.get("seq", 0)
    state = MaterializedState(last_seq=seq)
    for doc in snapshot.get("claims", []):
        claim = claim_from_payload(doc)
        state.claims[claim.claim_id] = claim
    for claim_id, items in snapshot.get("assessments", {}).items():
        state.assessments[claim_id] = [assessment_from_dict(d) for d in items]
    for claim_id, items in snapshot.get("notes", {}).items():
        state.notes[claim_id] = [
            Note(claim_id=d["claim_id"], author_id=d["author_id"],
                 body=d["body"], created_at=_parse_ts(d["created_at"]))
            for d in items
        ]
    for doc in snapshot.get("profiles", []):
        profile = profile_from_dict(doc)
        state.profiles[profile.name] = profile
    for doc in snapshot.get("questionnaires", []):
        q = load_questionnaire(json.dumps(doc))
        state.questionnaires[q.version] = q
    if tail and tail[0].seq != seq + 1:
        raise StoreError(f"tail must start at seq {seq + 1}, starts at {tail[0].seq}")
    for event in tail:
        state = apply_event(state, event)
    return state
