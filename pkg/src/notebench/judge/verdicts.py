"""Judge response parsing: binary concordance codes and CSS records."""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from enum import Enum
from typing import Any

from ..errors import CssParseFailure
from .prompts import BlindingMap, NoteOrder, PromptKind

logger = logging.getLogger(__name__)


class Outcome(str, Enum):
    CONCORDANT = "concordant"
    NOT_CONCORDANT = "not_concordant"
    UNPARSEABLE = "unparseable"


def parse_binary_verdict(raw: str) -> Outcome:
    """Map a response to a binary outcome.

    <001> anywhere with no <000> is concordant; <000> with no <001> is
    not concordant; both or neither is unparseable (a value, not an error).
    """
    text = raw.strip()
    has_yes = "<001>" in text
    has_no = "<000>" in text
    if has_yes and not has_no:
        return Outcome.CONCORDANT
    if has_no and not has_yes:
        return Outcome.NOT_CONCORDANT
    return Outcome.UNPARSEABLE


@dataclass(frozen=True)
class CssRecord:
    """One CSS judgment: similarity/complexity 0-10, comorbidity, ICD label."""

    similarity: int
    complexity: int
    comorbidity: bool
    icd_label: str
    difference: str = ""

    def __post_init__(self) -> None:
        if not 0 <= self.similarity <= 10:
            raise CssParseFailure(f"similarity {self.similarity} outside 0-10")
        if not 0 <= self.complexity <= 10:
            raise CssParseFailure(f"complexity {self.complexity} outside 0-10")
        if not self.icd_label:
            raise CssParseFailure("icd label is empty")

    def as_dict(self) -> dict[str, Any]:
        return {
            "similarity": self.similarity,
            "complexity": self.complexity,
            "comorbidity": self.comorbidity,
            "icd_label": self.icd_label,
            "difference": self.difference,
        }


_CSS_HEADER_RE = re.compile(
    r"similarity\s*:\s*(?P<sim>\d+)\s*(?:/\s*10)?\s*\|"
    r"\s*complexity\s*:\s*(?P<cx>\d+)\s*(?:/\s*10)?\s*\|"
    r"\s*co-?morbidity\s*:\s*(?P<com>yes|no)\s*\|"
    r"\s*icd\s*:\s*(?P<icd>.+?)\s*$",
    re.IGNORECASE,
)

_CSS_DIFFERENCE_RE = re.compile(r"^\s*difference\s*:\s*(?P<diff>.*\S)\s*$", re.IGNORECASE)


def parse_css(raw: str) -> CssRecord:
    """Extract the pipe-delimited CSS header line and the Difference line.

    Field names are case-insensitive and whitespace-flexible; a missing
    Difference line yields an empty string with a warning.  A missing
    header or out-of-range fields raise :class:`CssParseFailure`.
    """
    header = None
    for line in raw.splitlines():
        m = _CSS_HEADER_RE.search(line)
        if m:
            header = m
            break
    if header is None:
        raise CssParseFailure("no CSS header line found")

    difference = ""
    for line in raw.splitlines():
        m = _CSS_DIFFERENCE_RE.match(line)
        if m:
            difference = m.group("diff").strip()
            break
    if not difference:
        logger.warning("CSS response has no Difference line")

    icd = header.group("icd").strip().rstrip(".").strip()
    if not icd:
        raise CssParseFailure("icd label is empty")
    return CssRecord(
        similarity=int(header.group("sim")),
        complexity=int(header.group("cx")),
        comorbidity=header.group("com").lower() == "yes",
        icd_label=icd,
        difference=difference,
    )


@dataclass(frozen=True)
class JudgeVerdict:
    """Outcome of one prompt run, with the raw transcript for audit."""

    encounter_id: str
    prompt_kind: PromptKind
    run_index: int
    outcome: Outcome | None
    css: CssRecord | None
    raw_response: str
    blinding: BlindingMap
    latency_ms: float
    model_id: str
    attempt: int = 1
    error: str = ""

    def __post_init__(self) -> None:
        if self.prompt_kind is PromptKind.CSS and self.outcome not in (None, Outcome.UNPARSEABLE):
            raise ValueError("css verdicts carry no binary outcome")
        if self.prompt_kind is not PromptKind.CSS and self.css is not None:
            raise ValueError("binary verdicts carry no css record")

    def parseable(self) -> bool:
        if self.prompt_kind is PromptKind.CSS:
            return self.css is not None
        return self.outcome in (Outcome.CONCORDANT, Outcome.NOT_CONCORDANT)

    def as_dict(self) -> dict[str, Any]:
        return {
            "encounter_id": self.encounter_id,
            "prompt_kind": self.prompt_kind.value,
            "run_index": self.run_index,
            "outcome": self.outcome.value if self.outcome else None,
            "css": self.css.as_dict() if self.css else None,
            "raw_response": self.raw_response,
            "blinding": {
                "encounter_id": self.blinding.encounter_id,
                "run_index": self.blinding.run_index,
                "order": self.blinding.order.value,
                "seed": self.blinding.seed,
            },
            "latency_ms": self.latency_ms,
            "model_id": self.model_id,
            "attempt": self.attempt,
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "JudgeVerdict":
        blinding = BlindingMap(
            encounter_id=data["blinding"]["encounter_id"],
            run_index=data["blinding"]["run_index"],
            order=NoteOrder(data["blinding"]["order"]),
            seed=data["blinding"]["seed"],
        )
        css = CssRecord(**data["css"]) if data.get("css") else None
        outcome = Outcome(data["outcome"]) if data.get("outcome") else None
        return cls(
            encounter_id=data["encounter_id"],
            prompt_kind=PromptKind(data["prompt_kind"]),
            run_index=data["run_index"],
            outcome=outcome,
            css=css,
            raw_response=data.get("raw_response", ""),
            blinding=blinding,
            latency_ms=data.get("latency_ms", 0.0),
            model_id=data.get("model_id", ""),
            attempt=data.get("attempt", 1),
            error=data.get("error", ""),
        )
