"""Shared fixtures: the four example note pairs and corpus builders."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from notebench.notes import Author, Corpus, EncounterPair, load_corpus, parse_soap

FIXTURE_DIR = Path(__file__).parent / "fixtures"
NOTES_DIR = FIXTURE_DIR / "notes"
GOLDEN_DIR = Path(__file__).parent / "golden"

CASE_METADATA = {
    1: {"chief_complaint": "dysphagia"},
    2: {"chief_complaint": "sore throat with white coating"},
    3: {"chief_complaint": "flank pain"},
    4: {"chief_complaint": "sore throat, upset stomach, headache"},
}


def read_note(case: int, author: str) -> str:
    return (NOTES_DIR / f"case{case}_{author}.txt").read_text(encoding="utf-8")


def build_pair(case: int) -> EncounterPair:
    return EncounterPair(
        encounter_id=f"case-{case}",
        machine_note=parse_soap(read_note(case, "machine"), Author.MACHINE),
        clinician_note=parse_soap(read_note(case, "clinician"), Author.CLINICIAN),
        metadata=CASE_METADATA[case],
    )


@pytest.fixture(scope="session")
def appendix_pairs() -> list[EncounterPair]:
    return [build_pair(case) for case in (1, 2, 3, 4)]


@pytest.fixture(scope="session")
def appendix_notes() -> list[str]:
    return [
        read_note(case, author) for case in (1, 2, 3, 4) for author in ("machine", "clinician")
    ]


def write_pairs_jsonl(path: Path, cases=(1, 2, 3, 4)) -> Path:
    with path.open("w", encoding="utf-8") as fh:
        for case in cases:
            fh.write(
                json.dumps(
                    {
                        "encounter_id": f"case-{case}",
                        "machine_note": read_note(case, "machine"),
                        "clinician_note": read_note(case, "clinician"),
                        "metadata": CASE_METADATA[case],
                    }
                )
                + "\n"
            )
    return path


@pytest.fixture()
def appendix_corpus(tmp_path) -> Corpus:
    return load_corpus(write_pairs_jsonl(tmp_path / "pairs.jsonl"))
