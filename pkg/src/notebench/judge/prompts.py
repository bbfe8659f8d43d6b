"""Adjudication prompt templates and blinded pair rendering.

The four standard templates are fixed text; rendering appends a delimiter
block with the two raw note texts labeled SOAP NOTE A / SOAP NOTE B in an
order decided by the blinding map, so the judge never learns which author
wrote which note.  A fifth, supplementary screen for unsupported
diagnoses/treatments exists but is disabled by default and is not part of
the standard four-prompt battery.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from enum import Enum

from ..errors import EmptyNoteError
from ..notes import EncounterPair


class PromptKind(str, Enum):
    TOP4_CONCORDANCE = "top4_concordance"
    TOP1_CONCORDANCE = "top1_concordance"
    TREATMENT_PLAN = "treatment_plan"
    CSS = "css"
    # supplementary screen, off by default; flags assessment/plan content
    # that the note's own subjective section does not support
    HALLUCINATION_SCREEN = "hallucination_screen"


PRIMARY_KINDS = (
    PromptKind.TOP4_CONCORDANCE,
    PromptKind.TOP1_CONCORDANCE,
    PromptKind.TREATMENT_PLAN,
    PromptKind.CSS,
)

#: kinds whose responses are the <001>/<000> binary codes
BINARY_KINDS = (
    PromptKind.TOP4_CONCORDANCE,
    PromptKind.TOP1_CONCORDANCE,
    PromptKind.TREATMENT_PLAN,
    PromptKind.HALLUCINATION_SCREEN,
)


TOP4_TEMPLATE = """\
Your Role

You are an LLM that functions as a clinical evaluation assistant tasked with comparing diagnoses located within two SOAP notes. I want you to determine if any of the diagnoses from one SOAP note match or are clinically consistent with any of the diagnoses from the other note. For example, if one note has 4 diagnosis, and the other note has 1 diagnosis, determine if any of the 4 diagnoses from one SOAP note match or are consistent with the 1 diagnosis from the other SOAP note.

To complete the task, follow these steps.

1. Read both SOAP notes
2. Identify the listed diagnosis in each SOAP note. For this task, only use explicitly stated diagnosis. Diagnoses are only found in the assessment section of the SOAP note.
3. Compare all of the diagnosis from one SOAP note to all of the diagnosis in the other SOAP note.
4. Determine if 1 or more diagnosis from one note matches or is clinically consistent with 1 or more diagnosis from the other note.

Evaluation Criteria

The diagnoses are considered to be “clinically consistent” if:

1. The primary diagnosis from one note is the same as or clinically similar to at least one of the diagnoses (primary or secondary) in the other note.
2. A diagnosis from one SOAP note is a more specific subtype of any diagnosis in the other SOAP note. For example, a diagnosis of “Lower Back Pain” in one SOAP note would be clinically consistent with a diagnosis of “Sciatica” in another SOAP note.
3. The diagnoses, while using different terminology, refer to the same underlying clinical condition. For example, a diagnosis of “Eczema” in one SOAP note would be clinically consistent with a diagnosis of “Atopic Dermatitis” in another SOAP note.
4. The diagnoses are overlapping conditions in the same body system with different wording (e.g., “Sinusitis” vs. “Allergic Rhinitis with Sinusitis”)
5. One diagnosis is directly related to or a complication of another diagnosis. (e.g., “gallstones” vs. “cholecystitis” or “leg swelling” vs. “deep vein thrombosis”).

Examples of Inconsistent Diagnoses

- Completely different body systems without clear connection (e.g., “migraine” vs. “plantar fasciitis”)
- Contradictory diagnoses for the same symptoms (e.g., “viral pneumonia” vs. “congestive heart failure” for the same presentation)
- Diagnoses that would lead to fundamentally different treatment approaches

Output Format

- If the SOAP notes are clinically consistent respond with this exact phrase: <001>
- If the SOAP notes are NOT clinically consistent respond with this exact phrase: <000>
- You must respond with only the code.

Remember that your goal is to evaluate if the notes would lead to similar clinical treatment approaches, not whether they are identical in every detail.
"""


TOP1_TEMPLATE = """\
Your Role

You are an LLM that functions as a clinical evaluation assistant tasked with comparing diagnoses located within two SOAP notes. I want you to determine if the primary diagnosis from one SOAP note matches or is clinically consistent to the primary diagnoses from the other note.

To complete the task, follow these steps.

1. Read both SOAP notes.
2. Identify the listed diagnosis in each SOAP note. For this task, only use explicitly stated diagnosis. Diagnoses are only found in the assessment section of the SOAP note.
3. Compare all of the diagnosis from one SOAP note to all of the diagnosis in the other SOAP note.
4. Determine if the primary or top diagnosis from one note matches or is clinically consistent with the primary diagnosis from the other note.

The diagnoses are considered to be “clinically consistent” if:

1. The primary diagnosis from one note is the same as or clinically similar to the primary diagnoses in the other note
2. The primary diagnosis from one SOAP note is a more specific subtype of the primary diagnosis in the other SOAP note. For example, a diagnosis of “Lower Back Pain” in one SOAP note would be clinically consistent with a diagnosis of “Sciatica” in another SOAP note.
3. The primary diagnoses, while using different terminology, refer to the same underlying clinical condition. For example, a diagnosis of “Eczema” in one SOAP note would be clinically consistent with a diagnosis of “Atopic Dermatitis” in another SOAP note.
4. The primary diagnoses are overlapping conditions in the same body system with different wording (e.g., “Sinusitis” vs. “Allergic Rhinitis with Sinusitis”)
5. One diagnosis is directly related to or a complication of another diagnosis. (e.g., “gallstones” vs. “cholecystitis” or “leg swelling” vs. “DVT”)

Examples of Inconsistent Diagnoses

- Completely different body systems without clear connection (e.g., “Migraine” vs. “Plantar Fasciitis”)
- Contradictory diagnoses for the same symptoms (e.g., “Viral Pneumonia” vs. “Congestive Heart Failure” for the same presentation)
- Diagnoses that would lead to fundamentally different treatment approaches

Output Format

- If the SOAP notes are clinically consistent respond with this exact phrase <001>
- If the SOAP notes are NOT clinically consistent respond with this exact phrase <000>
- You must respond with only the code.

Remember that your goal is to evaluate if the notes would lead to similar clinical treatment approaches, not whether they are identical in every detail.
"""


TREATMENT_PLAN_TEMPLATE = """\
Your Role

You are a clinical evaluation assistant tasked with comparing treatment plans between two SOAP notes to determine if they are clinically consistent with each other. Your job is to carefully analyze both treatment approaches and determine whether they represent compatible clinical management strategies that would lead to similar therapeutic outcomes. For the purposes of this comparison the treatment plan is usually contained in the final section of the SOAP note. Treatment plans can include, confirmation tests and imaging studies, medications, procedures, home care or ancillary services such as physical therapy.

Evaluation Criteria

Two SOAP notes are considered to have **clinically consistent treatment plans** if:

1. The core therapeutic approach is similar (e.g., both recommend physical therapy, medication management, or surgical intervention).
2. One treatment plan recommends a test or imaging study to confirm the diagnosis prior to treatment and the other does not, but they both agree on the final treatment approach.
3. The specific interventions, while possibly different in details, address the same underlying clinical needs.
4. The treatment modalities are recognized alternatives for the same condition.
5. One plan includes all key elements of the other plan plus additional elements (more comprehensive but includes the same core approach).
6. One note has very limited treatment plans such as a phrase or one sentence and the other has a longer treatment plan, but they both provide similar treatment approaches.

Examples of Consistent Treatment Plans

- Similar medication classes with different specific drugs (e.g., “Ibuprofen 600 mg three times a day” vs. “Naproxen 500 mg twice a day”; both are nonsteroidal anti-inflammatory drugs (NSAIDs)).
- Equivalent physical interventions (e.g., “Physical therapy focusing on lumbar strengthening” vs. “Home exercise program for core strengthening”).
- Stepped care approaches covering the same therapies (e.g., “Try heat therapy, then NSAID, then consider PT referral” vs. “PT 2x weekly with home heat application and as-needed NSAID”).
- Similar monitoring approaches (e.g., “Follow-up in 4 weeks with blood pressure log” vs. “Monitor blood pressure daily and return in 1 month for reassessment”).

Examples of Inconsistent Treatment Plans

- Plans requiring fundamentally different approaches (e.g., “conservative management with NSAIDs” vs. “immediate surgical intervention”).
- Contradictory interventions (e.g., “strict bed rest for 72 hours” vs. “maintain normal activity levels and avoid rest”).
- Treatment plans addressing entirely different therapeutic goals.
- One plan recommending critical interventions that are explicitly avoided in the other plan.

Analysis Process

1. Extract all treatment elements from both SOAP note.
2. Categorize treatments by type (e.g., medications, physical therapies, procedures, lifestyle modifications, follow-up).
3. Compare similar categories across both notes.
4. Determine whether the core therapeutic approach is preserved between notes.
5. Determine whether any critical contradictions exist between the plans.
6. Provide your reasoning, citing specific therapeutic relationships.

Output Format

- Begin with a side-by-side comparison of all diagnoses from both notes.
- If the SOAP notes treatment plans are clinically consistent, respond with this exact phrase: <001>.
- If the SOAP notes treatment plans are NOT clinically consistent, respond with this exact phrase: <000>.
- You must respond with only the code.

Remember that your goal is to evaluate whether the treatment plans would lead to similar therapeutic outcomes, not whether they are identical in every detail. Treatment plans may vary in specific medications, dosages, or techniques while still maintaining consistency in the overall therapeutic approach.
"""


CSS_TEMPLATE = """\
Your Role

You are a clinical documentation reviewer. Your task is to compare two SOAP notes—one generated by Doctronic and the other by a human clinician—and evaluate them based on the following four criteria. Provide your output in following formats:

Similarity: X/10 | Complexity: Y/10 | Co-morbidity: Yes/No | ICD: [Main Clinical Condition]

Difference: One sentence summarizing the key clinical or documentation difference between the two notes

Scoring Criteria

1. Similarity: Rate how similarly a physician would understand the patient's condition from both SOAP notes.
 - 10: Nearly identical in clinical impression and documentation.
 - 7-9: Clinically very aligned with minor phrasing or detail differences.
 - 4-6: Moderate differences in emphasis, phrasing, or included symptoms.
 - 1-3: Major differences in clinical interpretation or diagnostic focus.
 - 0: Completely different clinical portrayals.
2. Complexity: Rate the medical complexity of the case.
 - 0-2: Very common and simple conditions (e.g., seasonal flu, tension headache).
 - 3-5: Mild-to-moderate complexity (e.g., hypertension with lifestyle considerations).
 - 6-8: Significant complexity or multi-system involvement (e.g., type 1 diabetes, chronic obstructive pulmonary disease).
 - 9-10: Rare, severe, or highly specialized conditions (e.g., polymyositis, amyotrophic lateral sclerosis).
3. Co-morbidity
 - Indicate whether the patient has one or more additional chronic or acute conditions that are clinically relevant to the case.
 - ICD condition: Identify the main diagnosis using ICD-compatible terminology (e.g., "Acute Sinusitis", not "sinus infection" or ICD-10 code).

Output Format Example

Similarity: 8/10 | Complexity: 3/10 | Co-morbidity: No | ICD: acute viral rhinitis.

Difference: Doctronic's note emphasized upper respiratory symptoms, while the human clinician highlighted general fatigue without mention of nasal congestion.

Instructions

Read both SOAP notes thoroughly. Focus on capturing the core clinical impression of each note and then assess the extent to which the diagnostic and management reasoning in the two notes align. Use the similarity score to quantify alignment, the complexity score to characterize clinical difficulty, and co-morbidity to flag additional medical conditions. Summarize the main diagnosis using standard ICD-compatible language, and finally, articulate the key clinical or stylistic difference in one sentence.
"""


HALLUCINATION_TEMPLATE = """\
Your Role

You are a clinical evaluation assistant tasked with auditing a single SOAP note for internal support. I want you to determine whether every diagnosis in the assessment section and every intervention in the plan section is supported by the patient information documented in the subjective section of the same note.

To complete the task, follow these steps.

1. Read the SOAP note.
2. List each diagnosis from the assessment section and each test, medication, or procedure from the plan section.
3. For each item, check whether the subjective section contains symptoms, history, or findings that justify it.
4. Determine whether any item has no support at all in the subjective section.

Evaluation Criteria

An item is considered unsupported if:

1. It names a condition or body system that the subjective section never mentions and that has no plausible connection to the documented complaints.
2. It prescribes a treatment whose target condition appears nowhere in the documented history.
3. It cites an examination finding, test result, or patient statement that the note does not contain.

A differential diagnosis offered to explain a documented symptom is supported, even when speculative. Routine safety-netting advice is supported.

Output Format

- If every assessment and plan item is supported, respond with this exact phrase: <001>
- If any assessment or plan item is unsupported, respond with this exact phrase: <000>
- You must respond with only the code.
"""


_TEMPLATES = {
    PromptKind.TOP4_CONCORDANCE: TOP4_TEMPLATE,
    PromptKind.TOP1_CONCORDANCE: TOP1_TEMPLATE,
    PromptKind.TREATMENT_PLAN: TREATMENT_PLAN_TEMPLATE,
    PromptKind.CSS: CSS_TEMPLATE,
    PromptKind.HALLUCINATION_SCREEN: HALLUCINATION_TEMPLATE,
}


def template_for(kind: PromptKind) -> str:
    return _TEMPLATES[PromptKind(kind)]


class NoteOrder(str, Enum):
    MACHINE_FIRST = "machine_first"
    CLINICIAN_FIRST = "clinician_first"


@dataclass(frozen=True)
class BlindingMap:
    """Presentation order for one judge run, derived from the run seed."""

    encounter_id: str
    run_index: int
    order: NoteOrder
    seed: int


def make_blinding(seed: int, encounter_id: str, run_index: int) -> BlindingMap:
    """A/B order as a deterministic function of (seed, encounter_id, run_index)."""
    digest = hashlib.sha256(f"{seed}|{encounter_id}|{run_index}".encode("utf-8")).digest()
    order = NoteOrder.MACHINE_FIRST if digest[0] & 1 == 0 else NoteOrder.CLINICIAN_FIRST
    return BlindingMap(encounter_id=encounter_id, run_index=run_index, order=order, seed=seed)


def _note_block(label: str, text: str) -> str:
    return f"===== {label} =====\n{text.rstrip()}\n"


def render_prompt(kind: PromptKind, pair: EncounterPair, blinding: BlindingMap) -> str:
    """Template followed by the blinded note block(s); no author identity leaks.

    The supplementary screen takes only the machine note, presented under
    the neutral label SOAP NOTE.
    """
    kind = PromptKind(kind)
    machine_text = pair.machine_note.raw_text
    clinician_text = pair.clinician_note.raw_text
    if not machine_text.strip() or not clinician_text.strip():
        raise EmptyNoteError(f"pair {pair.encounter_id} has an empty note")

    template = template_for(kind)
    if kind is PromptKind.HALLUCINATION_SCREEN:
        return template + "\n" + _note_block("SOAP NOTE", machine_text)

    if blinding.order is NoteOrder.MACHINE_FIRST:
        first, second = machine_text, clinician_text
    else:
        first, second = clinician_text, machine_text
    return (
        template
        + "\n"
        + _note_block("SOAP NOTE A", first)
        + "\n"
        + _note_block("SOAP NOTE B", second)
    )
