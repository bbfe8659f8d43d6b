"""Discordant-pair review queue and expert verdict recording.

Encounters whose top-1 decision was not concordant enter a randomized,
best-effort-blinded queue.  Verdicts land in an append-only JSON-lines
log (one object per line); statuses are derived by replaying the log, so
a crash never corrupts recorded reviews.
"""

from __future__ import annotations

import json
import os
import random
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Any, Sequence

from .analytics import CohortReport
from .errors import AlreadyReviewedError, StoreLockedError, UnknownEncounterError
from .judge import ConsensusResult, CssRecord, NoteOrder
from .notes import Corpus


class ReviewCategory(str, Enum):
    MACHINE_SUPERIOR = "machine_superior"
    CLINICIAN_SUPERIOR = "clinician_superior"
    SAME_LOW_SPECIFICITY = "same_low_specificity"
    INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class ReviewItem:
    """One discordant encounter, presented as unlabeled notes A and B."""

    encounter_id: str
    note_a: str
    note_b: str
    display_order: NoteOrder
    judge_context: dict[str, Any] = field(default_factory=dict)

    def public_payload(self, status: str) -> dict[str, Any]:
        """API payload: never includes the author-to-pane mapping."""
        return {
            "encounter_id": self.encounter_id,
            "note_a": self.note_a,
            "note_b": self.note_b,
            "judge_context": self.judge_context,
            "status": status,
            "blinding_note": "Author labels are withheld; panes are shown in randomized order.",
        }

    def as_dict(self) -> dict[str, Any]:
        return {
            "encounter_id": self.encounter_id,
            "note_a": self.note_a,
            "note_b": self.note_b,
            "display_order": self.display_order.value,
            "judge_context": self.judge_context,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ReviewItem":
        return cls(
            encounter_id=data["encounter_id"],
            note_a=data["note_a"],
            note_b=data["note_b"],
            display_order=NoteOrder(data["display_order"]),
            judge_context=data.get("judge_context", {}),
        )


@dataclass(frozen=True)
class ReviewVerdict:
    encounter_id: str
    category: ReviewCategory
    rationale: str = ""
    reviewer_id: str = "default"
    timestamp: str = ""

    def matches(self, other: "ReviewVerdict") -> bool:
        """Exact duplicate check; timestamps are not part of identity."""
        return (
            self.encounter_id == other.encounter_id
            and self.reviewer_id == other.reviewer_id
            and self.category is other.category
            and self.rationale == other.rationale
        )

    def as_dict(self) -> dict[str, Any]:
        return {
            "encounter_id": self.encounter_id,
            "category": self.category.value,
            "rationale": self.rationale,
            "reviewer_id": self.reviewer_id,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ReviewVerdict":
        return cls(
            encounter_id=data["encounter_id"],
            category=ReviewCategory(data["category"]),
            rationale=data.get("rationale", ""),
            reviewer_id=data.get("reviewer_id", "default"),
            timestamp=data.get("timestamp", ""),
        )


@dataclass(frozen=True)
class TriageSummary:
    counts: dict[str, int]
    shares: dict[str, float]
    total_reviewed: int
    total_pending: int

    def as_dict(self) -> dict[str, Any]:
        return {
            "counts": self.counts,
            "shares": self.shares,
            "total_reviewed": self.total_reviewed,
            "total_pending": self.total_pending,
        }


def _judge_context(results: Sequence[ConsensusResult], encounter_id: str) -> dict[str, Any]:
    context: dict[str, Any] = {}
    for result in results:
        if result.encounter_id != encounter_id:
            continue
        if isinstance(result.decision, CssRecord):
            context["css"] = result.decision.as_dict()
        else:
            context[result.prompt_kind.value] = result.decision.value
    return context


def build_queue(
    report: CohortReport,
    corpus: Corpus,
    seed: int,
    results: Sequence[ConsensusResult] = (),
) -> list[ReviewItem]:
    """One randomized ReviewItem per discordant encounter.

    Pane assignment and queue order both derive from the seed, so the
    same seed always reproduces the same queue.
    """
    rng = random.Random(seed)
    items: list[ReviewItem] = []
    for encounter_id in report.discordant_ids:
        pair = corpus.get(encounter_id)
        if pair is None:
            raise UnknownEncounterError(f"discordant encounter {encounter_id} not in corpus")
        machine_first = rng.random() < 0.5
        order = NoteOrder.MACHINE_FIRST if machine_first else NoteOrder.CLINICIAN_FIRST
        note_a, note_b = (
            (pair.machine_note.raw_text, pair.clinician_note.raw_text)
            if machine_first
            else (pair.clinician_note.raw_text, pair.machine_note.raw_text)
        )
        items.append(
            ReviewItem(
                encounter_id=encounter_id,
                note_a=note_a,
                note_b=note_b,
                display_order=order,
                judge_context=_judge_context(results, encounter_id),
            )
        )
    rng.shuffle(items)
    return items


def save_queue(items: Sequence[ReviewItem], path: str | Path) -> None:
    payload = {"items": [item.as_dict() for item in items]}
    Path(path).write_text(
        json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )


def load_queue(path: str | Path) -> list[ReviewItem]:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return [ReviewItem.from_dict(d) for d in payload["items"]]


class TriageStore:
    """Queue plus verdict log; an advisory lock keeps CLI and HTTP apart.

    The verdict log is append-only; every mutation is a flushed, fsynced
    line, so an interrupted write loses at most the in-flight record.
    """

    def __init__(
        self,
        items: Sequence[ReviewItem],
        log_path: str | Path,
        use_lock: bool = True,
    ) -> None:
        self.items = {item.encounter_id: item for item in items}
        self.order = [item.encounter_id for item in items]
        self.log_path = Path(log_path)
        self._write_lock = threading.Lock()
        self._file_lock = None
        if use_lock:
            from filelock import FileLock, Timeout

            lock = FileLock(str(self.log_path) + ".lock")
            try:
                lock.acquire(timeout=0.5)
            except Timeout as exc:
                raise StoreLockedError(
                    f"another process holds the triage store at {self.log_path}"
                ) from exc
            self._file_lock = lock
        self._verdicts: dict[tuple[str, str], ReviewVerdict] = {}
        self._replay()

    def close(self) -> None:
        if self._file_lock is not None:
            self._file_lock.release()
            self._file_lock = None

    def __enter__(self) -> "TriageStore":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    def _replay(self) -> None:
        if not self.log_path.exists():
            return
        with self.log_path.open(encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                try:
                    record = json.loads(line)
                    verdict = ReviewVerdict.from_dict(record)
                except (json.JSONDecodeError, KeyError, ValueError):
                    # torn trailing write; ignore the partial record
                    continue
                self._verdicts[(verdict.encounter_id, verdict.reviewer_id)] = verdict

    # -- queries ---------------------------------------------------------

    def status(self, encounter_id: str) -> str:
        reviewed = any(eid == encounter_id for eid, _ in self._verdicts)
        return "done" if reviewed else "pending"

    def pending(self) -> list[ReviewItem]:
        return [self.items[eid] for eid in self.order if self.status(eid) == "pending"]

    def item(self, encounter_id: str) -> ReviewItem:
        if encounter_id not in self.items:
            raise UnknownEncounterError(encounter_id)
        return self.items[encounter_id]

    def verdict_for(self, encounter_id: str) -> ReviewVerdict | None:
        for (eid, _), verdict in self._verdicts.items():
            if eid == encounter_id:
                return verdict
        return None

    def verdicts(self) -> list[ReviewVerdict]:
        return [self._verdicts[key] for key in sorted(self._verdicts)]

    # -- mutations -------------------------------------------------------

    def record_verdict(self, verdict: ReviewVerdict) -> dict[str, str]:
        """Durably append a verdict; idempotent on exact duplicates."""
        if verdict.encounter_id not in self.items:
            raise UnknownEncounterError(verdict.encounter_id)
        key = (verdict.encounter_id, verdict.reviewer_id)
        with self._write_lock:
            existing = self._verdicts.get(key)
            if existing is not None:
                if existing.matches(verdict):
                    return {"status": "duplicate", "encounter_id": verdict.encounter_id}
                raise AlreadyReviewedError(
                    f"{verdict.encounter_id} already reviewed by {verdict.reviewer_id} "
                    f"as {existing.category.value}"
                )
            if not verdict.timestamp:
                verdict = ReviewVerdict(
                    encounter_id=verdict.encounter_id,
                    category=verdict.category,
                    rationale=verdict.rationale,
                    reviewer_id=verdict.reviewer_id,
                    timestamp=datetime.now(timezone.utc).isoformat(),
                )
            self.log_path.parent.mkdir(parents=True, exist_ok=True)
            with self.log_path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(verdict.as_dict(), ensure_ascii=False) + "\n")
                fh.flush()
                os.fsync(fh.fileno())
            self._verdicts[key] = verdict
        return {"status": "recorded", "encounter_id": verdict.encounter_id}


def triage_summary(store: TriageStore) -> TriageSummary:
    """Category counts and shares over reviewed items."""
    counts = {category.value: 0 for category in ReviewCategory}
    for verdict in store.verdicts():
        counts[verdict.category.value] += 1
    reviewed = sum(counts.values())
    shares = {
        category: (count / reviewed if reviewed else 0.0)
        for category, count in counts.items()
    }
    pending = sum(1 for eid in store.order if store.status(eid) == "pending")
    return TriageSummary(
        counts=counts,
        shares=shares,
        total_reviewed=reviewed,
        total_pending=pending,
    )


def summary_from_counts(counts: dict[ReviewCategory | str, int]) -> TriageSummary:
    """Summary straight from category counts (no store required)."""
    normalized = {category.value: 0 for category in ReviewCategory}
    for category, count in counts.items():
        normalized[ReviewCategory(category).value] = count
    reviewed = sum(normalized.values())
    shares = {
        category: (count / reviewed if reviewed else 0.0)
        for category, count in normalized.items()
    }
    return TriageSummary(
        counts=normalized, shares=shares, total_reviewed=reviewed, total_pending=0
    )
