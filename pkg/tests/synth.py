"""Synthetic corpus and scripted-rule builders for pipeline tests.

Marker tokens planted in each machine note's subjective section steer the
scripted judge: the rules match on a template fragment (which identifies
the prompt kind) plus the marker, so outcomes are fully programmable per
pair and per kind without unblinding anything.
"""

from __future__ import annotations

import json
from pathlib import Path

DIAGNOSIS_POOL = [
    "Acute Sinusitis",
    "Influenza",
    "Acute Bronchitis",
    "Viral Pharyngitis",
    "Urinary Tract Infection",
    "Gastroenteritis",
    "Cellulitis",
    "Low Back Pain",
    "Generalized Anxiety Disorder",
    "Dental Abscess",
    "Bacterial Vaginosis",
    "Hypothyroidism",
]

SECONDARY_POOL = [
    "Allergic Rhinitis",
    "Acute Pharyngitis",
    "Costochondritis",
    "Contact Dermatitis",
]

CSS_RESPONSES = {
    "low": (
        "Similarity: 6/10 | Complexity: 2/10 | Co-morbidity: No | ICD: Influenza\n\n"
        "Difference: The machine note lists a broader differential than the brief clinician note."
    ),
    "moderate": (
        "Similarity: 6/10 | Complexity: 5/10 | Co-morbidity: No | ICD: Acute Sinusitis\n\n"
        "Difference: Emphasis differs between symptom detail and management detail."
    ),
    "high": (
        "Similarity: 7/10 | Complexity: 8/10 | Co-morbidity: Yes | ICD: Systemic Lupus Erythematosus\n\n"
        "Difference: One note documents multi-system involvement in more depth."
    ),
}


def machine_note(index: int, markers: str, primary: str) -> str:
    pool = DIAGNOSIS_POOL + SECONDARY_POOL
    d2 = pool[(index + 3) % len(pool)]
    d3 = pool[(index + 7) % len(pool)]
    d4 = pool[(index + 11) % len(pool)]
    return (
        "*Subjective:*\n"
        f"- Synthetic telehealth encounter number {index}.\n"
        f"- Tracking tokens: {markers}.\n"
        "- Reports several days of symptoms consistent with the assessment below.\n"
        "- No known drug allergies; no relevant family history.\n"
        "\n"
        "*Objective:*\n"
        "- (Pending physical examination findings and test results)\n"
        "\n"
        "*Assessment:*\n"
        f"1. {primary}\n"
        f"2. {d2}\n"
        f"3. {d3}\n"
        f"4. {d4}\n"
        "\n"
        "*Plan:*\n"
        "1. Supportive care with hydration and rest.\n"
        "2. Symptom-directed laboratory testing if not improving.\n"
        "3. Follow up with primary care in one week.\n"
    )


def clinician_note(index: int, primary: str) -> str:
    return (
        "HPI: See intake\n"
        f"Additional details not noted in intake: synthetic clinician documentation {index}.\n"
        "\n"
        "EXAM The patient was evaluated via Video.\n"
        "GEN: Alert and oriented x3; No acute distress;\n"
        "\n"
        f"Assessment: {primary}\n"
        "\n"
        "Plan: Conservative management discussed; return precautions given.\n"
    )


def stratum_for_index(index: int, n: int, low_share: float = 0.11, high_share: float = 0.03) -> str:
    low_n = round(n * low_share)
    high_n = round(n * high_share)
    if index < low_n:
        return "low"
    if index >= n - high_n:
        return "high"
    return "moderate"


def build_corpus_file(
    path: str | Path,
    n: int = 500,
    top1_yes: int = 405,
    top4_yes: int = 477,
    plan_yes: int = 496,
    screen_flags: int = 0,
) -> Path:
    """Write an n-pair JSONL corpus with programmable per-kind outcomes.

    The first ``*_yes`` pairs for each kind carry the concordant marker;
    primary diagnoses cycle through a skewed pool so the frequency table
    has distinct descending counts.
    """
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for i in range(n):
            # skewed assignment: low-index labels appear more often
            pool_index = (i * 7) % 24
            label_index = min(
                len(DIAGNOSIS_POOL) - 1,
                int(pool_index**0.5 * len(DIAGNOSIS_POOL) / (24**0.5)),
            )
            primary = DIAGNOSIS_POOL[label_index]
            markers = " ".join(
                [
                    f"marker-top1-{'yes' if i < top1_yes else 'no'}",
                    f"marker-top4-{'yes' if i < top4_yes else 'no'}",
                    f"marker-plan-{'yes' if i < plan_yes else 'no'}",
                    f"marker-css-{stratum_for_index(i, n)}",
                    f"marker-screen-{'flag' if i < screen_flags else 'clean'}",
                ]
            )
            record = {
                "encounter_id": f"enc-{i:04d}",
                "machine_note": machine_note(i, markers, primary),
                "clinician_note": clinician_note(i, primary),
                "metadata": {"chief_complaint": primary.lower()},
            }
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
    return path


def build_rules_file(
    path: str | Path,
    delay_ms: float = 0.0,
    call_log: str | None = None,
) -> Path:
    """Scripted-backend rules keyed on template fragment + marker token."""
    rules = [
        {"pattern": r"(?s)Determine if the primary or top diagnosis.*marker-top1-yes", "response": "<001>"},
        {"pattern": r"(?s)Determine if the primary or top diagnosis", "response": "<000>"},
        {"pattern": r"(?s)Determine if 1 or more diagnosis.*marker-top4-yes", "response": "<001>"},
        {"pattern": r"(?s)Determine if 1 or more diagnosis", "response": "<000>"},
        {"pattern": r"(?s)comparing treatment plans.*marker-plan-yes", "response": "<001>"},
        {"pattern": r"(?s)comparing treatment plans", "response": "<000>"},
        {"pattern": r"(?s)clinical documentation reviewer.*marker-css-low", "response": CSS_RESPONSES["low"]},
        {"pattern": r"(?s)clinical documentation reviewer.*marker-css-high", "response": CSS_RESPONSES["high"]},
        {"pattern": r"(?s)clinical documentation reviewer", "response": CSS_RESPONSES["moderate"]},
        {"pattern": r"(?s)auditing a single SOAP note.*marker-screen-flag", "response": "<000>"},
        {"pattern": r"(?s)auditing a single SOAP note", "response": "<001>"},
    ]
    payload: dict = {"rules": rules, "default": None}
    if delay_ms:
        payload["delay_ms"] = delay_ms
    if call_log:
        payload["call_log"] = call_log
    path = Path(path)
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    return path
