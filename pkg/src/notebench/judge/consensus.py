"""Multi-run consensus: majority vote for binary prompts, per-field
aggregation for CSS, with checkpointed corpus-wide adjudication."""

from __future__ import annotations

import logging
import statistics
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Mapping, Sequence

from ..errors import BackendCallError, BackendExhaustedError
from ..notes import Corpus, EncounterPair
from .audit import VerdictKey, VerdictStore
from .backends import JudgeBackend
from .prompts import PRIMARY_KINDS, PromptKind, make_blinding, render_prompt
from .verdicts import CssRecord, JudgeVerdict, Outcome, parse_binary_verdict, parse_css

logger = logging.getLogger(__name__)


class Decision(str, Enum):
    CONCORDANT = "concordant"
    NOT_CONCORDANT = "not_concordant"
    INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class ConsensusConfig:
    runs: int = 3
    seed: int = 0
    model_id: str = "scripted"
    # one retry per unparseable or failed run, per the consensus protocol
    retries_per_run: int = 1

    def __post_init__(self) -> None:
        if self.runs < 1 or self.runs % 2 == 0:
            raise ValueError("consensus run count must be odd and >= 1")


@dataclass(frozen=True)
class ConsensusResult:
    encounter_id: str
    prompt_kind: PromptKind
    runs: tuple[JudgeVerdict, ...]
    decision: Decision | CssRecord
    vote_split: dict[str, int]

    def decision_value(self) -> str | dict:
        if isinstance(self.decision, CssRecord):
            return self.decision.as_dict()
        return self.decision.value

    def as_dict(self) -> dict[str, Any]:
        return {
            "encounter_id": self.encounter_id,
            "prompt_kind": self.prompt_kind.value,
            "decision": self.decision_value(),
            "vote_split": dict(self.vote_split),
            "runs": [v.as_dict() for v in self.runs],
        }


def decide_binary(outcomes: Sequence[Outcome], runs: int) -> tuple[Decision, dict[str, int]]:
    """Strict majority over parseable runs; quorum is ceil(runs/2)."""
    counts = Counter(outcomes)
    concordant = counts.get(Outcome.CONCORDANT, 0)
    not_concordant = counts.get(Outcome.NOT_CONCORDANT, 0)
    unparseable = runs - concordant - not_concordant
    split = {
        "concordant": concordant,
        "not_concordant": not_concordant,
        "unparseable": unparseable,
    }
    quorum = (runs + 1) // 2
    if concordant + not_concordant < quorum:
        return Decision.INDETERMINATE, split
    if concordant > not_concordant:
        return Decision.CONCORDANT, split
    if not_concordant > concordant:
        return Decision.NOT_CONCORDANT, split
    return Decision.INDETERMINATE, split


def aggregate_css(records: Sequence[CssRecord]) -> CssRecord:
    """Per-field aggregation: median scores, majority flag, modal label.

    Even-sized inputs take the lower median so scores stay integers; the
    modal ICD label breaks ties lexicographically; the difference text is
    borrowed from the first run whose similarity equals the aggregate.
    """
    if not records:
        raise ValueError("no CSS records to aggregate")
    similarity = int(statistics.median_low([r.similarity for r in records]))
    complexity = int(statistics.median_low([r.complexity for r in records]))
    flags = Counter(r.comorbidity for r in records)
    comorbidity = flags.get(True, 0) > flags.get(False, 0)
    label_counts = Counter(r.icd_label for r in records)
    icd_label = min(label_counts, key=lambda lbl: (-label_counts[lbl], lbl))
    difference = next(
        (r.difference for r in records if r.similarity == similarity and r.difference),
        records[0].difference,
    )
    return CssRecord(
        similarity=similarity,
        complexity=complexity,
        comorbidity=comorbidity,
        icd_label=icd_label,
        difference=difference,
    )


def _attempt_call(
    pair: EncounterPair,
    kind: PromptKind,
    backend: JudgeBackend,
    config: ConsensusConfig,
    run_index: int,
    attempt: int,
) -> JudgeVerdict:
    blinding = make_blinding(config.seed, pair.encounter_id, run_index)
    prompt = render_prompt(kind, pair, blinding)
    started = time.perf_counter()
    try:
        raw = backend.complete(config.model_id, prompt)
        error = ""
    except BackendCallError as exc:
        raw = ""
        error = str(exc)
    latency_ms = (time.perf_counter() - started) * 1000.0

    outcome: Outcome | None = None
    css: CssRecord | None = None
    if not error:
        if kind is PromptKind.CSS:
            try:
                css = parse_css(raw)
            except Exception:
                css = None
        else:
            outcome = parse_binary_verdict(raw)
    elif kind is not PromptKind.CSS:
        outcome = Outcome.UNPARSEABLE

    return JudgeVerdict(
        encounter_id=pair.encounter_id,
        prompt_kind=kind,
        run_index=run_index,
        outcome=outcome,
        css=css,
        raw_response=raw,
        blinding=blinding,
        latency_ms=latency_ms,
        model_id=config.model_id,
        attempt=attempt,
        error=error,
    )


def _execute_run(
    pair: EncounterPair,
    kind: PromptKind,
    backend: JudgeBackend,
    config: ConsensusConfig,
    run_index: int,
    store: VerdictStore | None,
) -> tuple[JudgeVerdict, list[JudgeVerdict]]:
    """One consensus run: a call plus up to ``retries_per_run`` retries."""
    attempts: list[JudgeVerdict] = []
    verdict: JudgeVerdict | None = None
    for attempt in range(1, config.retries_per_run + 2):
        verdict = _attempt_call(pair, kind, backend, config, run_index, attempt)
        attempts.append(verdict)
        is_last = attempt == config.retries_per_run + 1
        final = verdict.parseable() or is_last
        if store is not None:
            store.append(verdict, final=final)
        if final:
            break
    assert verdict is not None
    return verdict, attempts


def run_consensus(
    pair: EncounterPair,
    kind: PromptKind,
    backend: JudgeBackend,
    config: ConsensusConfig,
    store: VerdictStore | None = None,
    existing: Mapping[VerdictKey, JudgeVerdict] | None = None,
) -> ConsensusResult:
    """Execute ``config.runs`` independent judge runs and fold the votes.

    Runs already present in ``existing`` (checkpoint) are not re-called.
    Raises :class:`BackendExhaustedError` only when not a single attempt
    across all runs produced a response.
    """
    kind = PromptKind(kind)
    verdicts: list[JudgeVerdict] = []
    any_response = False
    for run_index in range(config.runs):
        key: VerdictKey = (pair.encounter_id, kind.value, run_index)
        if existing is not None and key in existing:
            final = existing[key]
            verdicts.append(final)
            any_response = any_response or final.error == ""
            continue
        final, attempts = _execute_run(pair, kind, backend, config, run_index, store)
        verdicts.append(final)
        any_response = any_response or any(a.error == "" for a in attempts)

    if not any_response:
        raise BackendExhaustedError(
            f"no backend response for {pair.encounter_id}/{kind.value} "
            f"in {config.runs} runs with retries"
        )

    if kind is PromptKind.CSS:
        records = [v.css for v in verdicts if v.css is not None]
        split = {"parseable": len(records), "unparseable": config.runs - len(records)}
        decision: Decision | CssRecord
        if records:
            decision = aggregate_css(records)
        else:
            decision = Decision.INDETERMINATE
    else:
        outcomes = [v.outcome or Outcome.UNPARSEABLE for v in verdicts]
        decision, split = decide_binary(outcomes, config.runs)

    return ConsensusResult(
        encounter_id=pair.encounter_id,
        prompt_kind=kind,
        runs=tuple(verdicts),
        decision=decision,
        vote_split=split,
    )


@dataclass
class AdjudicationOutcome:
    results: list[ConsensusResult] = field(default_factory=list)
    failures: list[dict] = field(default_factory=list)

    def by_kind(self, kind: PromptKind) -> dict[str, ConsensusResult]:
        return {r.encounter_id: r for r in self.results if r.prompt_kind is kind}


def adjudicate_corpus(
    corpus: Corpus,
    backend: JudgeBackend,
    config: ConsensusConfig,
    kinds: Sequence[PromptKind] = PRIMARY_KINDS,
    store: VerdictStore | None = None,
    parallelism: int = 1,
) -> AdjudicationOutcome:
    """Adjudicate every pair under every enabled prompt kind.

    Progress is checkpointed through ``store``: a restarted run re-calls
    only triples without a final verdict.  A pair whose backend is
    exhausted is recorded as a failure without aborting the rest.
    """
    if len(corpus) == 0:
        raise ValueError("corpus is empty")
    existing = store.load_final() if store is not None else {}

    def adjudicate_pair(pair: EncounterPair) -> tuple[list[ConsensusResult], list[dict]]:
        results: list[ConsensusResult] = []
        failures: list[dict] = []
        for kind in kinds:
            try:
                results.append(
                    run_consensus(pair, kind, backend, config, store=store, existing=existing)
                )
            except BackendExhaustedError as exc:
                logger.warning("pair %s kind %s: %s", pair.encounter_id, kind.value, exc)
                failures.append(
                    {
                        "encounter_id": pair.encounter_id,
                        "prompt_kind": kind.value,
                        "error": str(exc),
                    }
                )
        return results, failures

    outcome = AdjudicationOutcome()
    if parallelism <= 1:
        per_pair = [adjudicate_pair(pair) for pair in corpus.pairs]
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            per_pair = list(pool.map(adjudicate_pair, corpus.pairs))
    for results, failures in per_pair:
        outcome.results.extend(results)
        outcome.failures.extend(failures)
    return outcome
