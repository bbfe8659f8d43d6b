"""SOAP note data model, section parsing, and paired-corpus ingestion.

Notes arrive as free text in two broad shapes: a labeled format whose
sections carry decorated headers (``*Subjective:*`` ... ``*Plan:*``) and a
looser clinician format where only some headers appear (``Assessment: ...``
``Plan: ...``).  The parser recognizes both, never mutates the raw text,
and extracts the diagnosis list exclusively from the assessment section.
"""

from __future__ import annotations

import hashlib
import json
import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .errors import EmptyNoteError

logger = logging.getLogger(__name__)

# Warning flags attached to a parsed note (informational, never fatal)
WARN_NO_ASSESSMENT = "no_assessment"
WARN_FEW_DIAGNOSES = "few_diagnoses"

MACHINE_MIN_DIAGNOSES = 4


class Author(str, Enum):
    MACHINE = "machine"
    CLINICIAN = "clinician"


class Section(str, Enum):
    SUBJECTIVE = "subjective"
    OBJECTIVE = "objective"
    ASSESSMENT = "assessment"
    PLAN = "plan"


SECTION_ORDER = (Section.SUBJECTIVE, Section.OBJECTIVE, Section.ASSESSMENT, Section.PLAN)

CANONICAL_HEADERS = {
    Section.SUBJECTIVE: "Subjective:",
    Section.OBJECTIVE: "Objective:",
    Section.ASSESSMENT: "Assessment:",
    Section.PLAN: "Plan:",
}

# Header aliases, case-insensitive. Loose clinician notes use HPI / EXAM /
# Impression in place of the canonical S/O/A headers.
_ALIASES = {
    "subjective": Section.SUBJECTIVE,
    "hpi": Section.SUBJECTIVE,
    "history of present illness": Section.SUBJECTIVE,
    "objective": Section.OBJECTIVE,
    "exam": Section.OBJECTIVE,
    "physical exam": Section.OBJECTIVE,
    "assessment": Section.ASSESSMENT,
    "impression": Section.ASSESSMENT,
    "plan": Section.PLAN,
}

_ALIAS_PATTERN = "|".join(
    sorted((re.escape(a) for a in _ALIASES), key=len, reverse=True)
)

# A header line on its own: decorations (* _ #) around the alias, optional
# colon on either side of the closing decoration, nothing else.
# e.g. "*Subjective:*", "*Subjective*:", "**Plan**", "Assessment:"
_HEADER_ONLY_RE = re.compile(
    rf"^\s*[*_#]*\s*(?P<alias>{_ALIAS_PATTERN})\s*[*_#]*\s*:?\s*[*_#]*\s*$",
    re.IGNORECASE,
)

# A header with the body starting on the same line after a colon,
# e.g. "Assessment: Oral Thrush"
_HEADER_INLINE_RE = re.compile(
    rf"^\s*[*_#]*\s*(?P<alias>{_ALIAS_PATTERN})\s*[*_#]*\s*:\s*[*_#]?[ \t]?(?P<rest>.*\S.*)$",
    re.IGNORECASE,
)

# Bare all-caps EXAM followed by prose on the same line ("EXAM The patient
# was evaluated via Video.") appears in loose clinician notes without a colon.
_HEADER_EXAM_BARE_RE = re.compile(r"^(EXAM)\s+(?P<rest>\S.*)$")


@dataclass(frozen=True)
class SoapNote:
    """One clinical note with parsed sections and an ordered diagnosis list."""

    note_id: str
    author: Author
    raw_text: str
    sections: dict[Section, str]
    diagnoses: tuple[str, ...]
    plan_text: str
    warnings: tuple[str, ...] = ()

    @property
    def has_assessment(self) -> bool:
        return bool(self.sections.get(Section.ASSESSMENT, "").strip())

    def primary_diagnosis(self) -> str | None:
        return self.diagnoses[0] if self.diagnoses else None


@dataclass(frozen=True)
class EncounterPair:
    """One encounter's machine and clinician notes plus metadata."""

    encounter_id: str
    machine_note: SoapNote
    clinician_note: SoapNote
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.machine_note.author is not Author.MACHINE:
            raise ValueError("machine_note must carry author=machine")
        if self.clinician_note.author is not Author.CLINICIAN:
            raise ValueError("clinician_note must carry author=clinician")


@dataclass(frozen=True)
class ExclusionRecord:
    encounter_id: str
    reason: str


@dataclass(frozen=True)
class Corpus:
    """Immutable collection of encounter pairs with the exclusion log."""

    pairs: tuple[EncounterPair, ...]
    source_path: str
    exclusions: tuple[ExclusionRecord, ...] = ()

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def get(self, encounter_id: str) -> EncounterPair | None:
        for pair in self.pairs:
            if pair.encounter_id == encounter_id:
                return pair
        return None

    def all_texts(self) -> list[str]:
        """Raw text of every note, both authors; the TF-IDF corpus."""
        docs: list[str] = []
        for pair in self.pairs:
            docs.append(pair.machine_note.raw_text)
            docs.append(pair.clinician_note.raw_text)
        return docs


def _match_header(line: str) -> tuple[Section, str] | None:
    """Return (section, inline body) when the line opens a section."""
    m = _HEADER_ONLY_RE.match(line)
    if m:
        return _ALIASES[m.group("alias").lower()], ""
    m = _HEADER_INLINE_RE.match(line)
    if m:
        return _ALIASES[m.group("alias").lower()], m.group("rest")
    m = _HEADER_EXAM_BARE_RE.match(line)
    if m:
        return Section.OBJECTIVE, m.group("rest")
    return None


def _split_blob(raw_text: str) -> dict[Section, str]:
    """Loose scan for assessment/plan tokens inside an unheaded blob.

    Only applied when no header lines were recognized at all; avoids
    inventing diagnoses from notes that never mention an assessment.
    """
    sections: dict[Section, str] = {}
    assess = re.search(r"\bassessment\b\s*:?", raw_text, re.IGNORECASE)
    plan = re.search(r"\bplan\b\s*:?", raw_text, re.IGNORECASE)
    if assess and plan and plan.start() > assess.end():
        sections[Section.ASSESSMENT] = raw_text[assess.end() : plan.start()]
        sections[Section.PLAN] = raw_text[plan.end() :]
    elif assess:
        sections[Section.ASSESSMENT] = raw_text[assess.end() :]
    elif plan:
        sections[Section.PLAN] = raw_text[plan.end() :]
    return sections


_ENUM_PREFIX_RE = re.compile(r"^\s*(?:\d{1,2}[.)]|[-•*]+)\s*")
_INLINE_ENUM_SPLIT_RE = re.compile(r"\s(?=\d{1,2}\.\s)")


def _strip_duplicate_parenthetical(entry: str) -> str:
    """Drop a trailing parenthetical only when it repeats the head term."""
    m = re.match(r"^(?P<head>.*?)\s*\((?P<paren>[^()]*)\)\s*$", entry)
    if m and m.group("paren").strip().lower() == m.group("head").strip().lower():
        return m.group("head").strip()
    return entry


def split_diagnoses(assessment_text: str) -> tuple[str, ...]:
    """Split an assessment body into ordered diagnosis entries.

    Entries are delimited by newlines and leading enumerators ("1.", "-");
    order is preserved, the first entry is the primary diagnosis.
    """
    entries: list[str] = []
    for line in assessment_text.splitlines():
        for part in _INLINE_ENUM_SPLIT_RE.split(line):
            cleaned = _ENUM_PREFIX_RE.sub("", part).strip()
            if cleaned:
                entries.append(_strip_duplicate_parenthetical(cleaned))
    return tuple(entries)


def parse_soap(
    raw_text: str,
    author: Author | str,
    note_id: str | None = None,
) -> SoapNote:
    """Parse raw note text into a :class:`SoapNote`.

    The raw text is never modified; section bodies are verbatim slices of
    it (the leading preamble, if any, is prepended to the first recognized
    section).  A missing or empty assessment produces a warning flag, not
    an error, and the note is still returned.
    """
    author = Author(author)
    if not raw_text or not raw_text.strip():
        raise EmptyNoteError("note text is blank")
    if note_id is None:
        digest = hashlib.sha256(f"{author.value}:{raw_text}".encode("utf-8")).hexdigest()
        note_id = digest[:12]

    lines = raw_text.splitlines(keepends=True)
    sections: dict[Section, str] = {}
    order: list[Section] = []
    bodies: dict[Section, list[str]] = {}
    preamble: list[str] = []
    current: Section | None = None

    for line in lines:
        matched = _match_header(line.rstrip("\n"))
        if matched is not None:
            kind, inline = matched
            if kind not in bodies:
                bodies[kind] = []
                order.append(kind)
            current = kind
            if inline:
                # preserve the newline the header line carried
                trailing = line[len(line.rstrip("\n\r")) :]
                bodies[kind].append(inline + trailing)
        elif current is None:
            preamble.append(line)
        else:
            bodies[current].append(line)

    if order:
        if preamble:
            bodies[order[0]] = preamble + bodies[order[0]]
        sections = {kind: "".join(bodies[kind]) for kind in order}
    else:
        sections = _split_blob(raw_text)

    warnings: list[str] = []
    assessment = sections.get(Section.ASSESSMENT, "")
    diagnoses = split_diagnoses(assessment) if assessment else ()
    if not diagnoses:
        warnings.append(WARN_NO_ASSESSMENT)
    if author is Author.MACHINE and diagnoses and len(diagnoses) < MACHINE_MIN_DIAGNOSES:
        warnings.append(WARN_FEW_DIAGNOSES)

    return SoapNote(
        note_id=note_id,
        author=author,
        raw_text=raw_text,
        sections=sections,
        diagnoses=diagnoses,
        plan_text=sections.get(Section.PLAN, ""),
        warnings=tuple(warnings),
    )


def reassemble(note: SoapNote) -> str:
    """Concatenate parsed sections in S,O,A,P order under canonical headers."""
    parts: list[str] = []
    for kind in SECTION_ORDER:
        if kind in note.sections:
            parts.append(CANONICAL_HEADERS[kind] + "\n" + note.sections[kind])
    return "".join(parts)


def _record_error(record: dict | None, lineno: int) -> str:
    if isinstance(record, dict) and isinstance(record.get("encounter_id"), str):
        return record["encounter_id"]
    return f"line-{lineno}"


def load_corpus(path: str | Path) -> Corpus:
    """Load a pair-record JSONL file, applying the exclusion rules.

    One JSON object per line: ``{encounter_id, machine_note,
    clinician_note, metadata?}``.  Malformed records, records missing
    either note, and duplicate encounter ids are excluded (logged, never
    fatal).
    """
    path = Path(path)
    pairs: list[EncounterPair] = []
    exclusions: list[ExclusionRecord] = []
    seen: set[str] = set()

    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError:
                exclusions.append(ExclusionRecord(f"line-{lineno}", "malformed record"))
                continue
            if not isinstance(record, dict):
                exclusions.append(ExclusionRecord(f"line-{lineno}", "malformed record"))
                continue

            encounter_id = record.get("encounter_id")
            machine_text = record.get("machine_note")
            clinician_text = record.get("clinician_note")
            metadata = record.get("metadata") or {}

            if not isinstance(encounter_id, str) or not encounter_id:
                exclusions.append(ExclusionRecord(_record_error(record, lineno), "malformed record"))
                continue
            if not isinstance(metadata, dict):
                exclusions.append(ExclusionRecord(encounter_id, "malformed record"))
                continue
            if not isinstance(machine_text, str) or not machine_text.strip():
                exclusions.append(ExclusionRecord(encounter_id, "missing note"))
                continue
            if not isinstance(clinician_text, str) or not clinician_text.strip():
                exclusions.append(ExclusionRecord(encounter_id, "missing note"))
                continue
            if encounter_id in seen:
                exclusions.append(ExclusionRecord(encounter_id, "duplicate"))
                continue

            seen.add(encounter_id)
            pairs.append(
                EncounterPair(
                    encounter_id=encounter_id,
                    machine_note=parse_soap(
                        machine_text, Author.MACHINE, note_id=f"{encounter_id}:machine"
                    ),
                    clinician_note=parse_soap(
                        clinician_text, Author.CLINICIAN, note_id=f"{encounter_id}:clinician"
                    ),
                    metadata=metadata,
                )
            )

    for exc in exclusions:
        logger.info("excluded %s: %s", exc.encounter_id, exc.reason)
    return Corpus(pairs=tuple(pairs), source_path=str(path), exclusions=tuple(exclusions))


def write_exclusion_log(corpus: Corpus, path: str | Path) -> None:
    """Write the exclusion log as JSON lines {encounter_id, reason}."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for exc in corpus.exclusions:
            fh.write(json.dumps({"encounter_id": exc.encounter_id, "reason": exc.reason}) + "\n")
