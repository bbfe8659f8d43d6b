"""Fault injection: SIGKILL during adjudication and during verdict writes."""

from __future__ import annotations

import json
import signal
import subprocess
import sys
import time
from pathlib import Path


from notebench.analytics import summarize
from notebench.judge import ConsensusConfig, PromptKind, ScriptedBackend, adjudicate_corpus
from notebench.judge.audit import VerdictStore
from notebench.notes import load_corpus
from notebench.triage import TriageStore, build_queue, load_queue, save_queue

from . import synth

RUNNER = Path(__file__).parent / "crash_runner.py"


def wait_for_lines(path: Path, minimum: int, timeout_s: float = 20.0) -> int:
    deadline = time.monotonic() + timeout_s
    while time.monotonic() < deadline:
        if path.exists():
            count = len(path.read_text(errors="ignore").splitlines())
            if count >= minimum:
                return count
        time.sleep(0.01)
    raise AssertionError(f"{path} never reached {minimum} lines")


def spawn(*args) -> subprocess.Popen:
    return subprocess.Popen(
        [sys.executable, str(RUNNER), *map(str, args)],
        stdout=subprocess.DEVNULL,
        stderr=subprocess.DEVNULL,
    )


class TestAdjudicationCrash:
    def test_kill_and_resume_without_duplicate_calls(self, tmp_path):
        n_pairs = 8
        expected_calls = n_pairs * 3  # one kind, three runs, no retries
        corpus_path = synth.build_corpus_file(tmp_path / "pairs.jsonl", n=n_pairs,
                                              top1_yes=5, top4_yes=8, plan_yes=8)
        call_log = tmp_path / "calls.log"
        rules_path = synth.build_rules_file(
            tmp_path / "rules.json", delay_ms=25, call_log=str(call_log)
        )
        store_path = tmp_path / "verdicts.jsonl"

        # reference: uninterrupted run in a separate store
        corpus = load_corpus(corpus_path)
        reference = adjudicate_corpus(
            corpus,
            ScriptedBackend.from_file(rules_path, call_log=tmp_path / "ref-calls.log"),
            ConsensusConfig(runs=3, seed=5),
            kinds=(PromptKind.TOP1_CONCORDANCE,),
            store=VerdictStore(tmp_path / "ref-verdicts.jsonl"),
        )

        process = spawn("adjudicate", corpus_path, rules_path, store_path)
        try:
            wait_for_lines(store_path, minimum=6)
        finally:
            process.send_signal(signal.SIGKILL)
            process.wait()

        calls_before_resume = len(call_log.read_text().splitlines())
        persisted = len(VerdictStore(store_path).load_final())
        assert persisted < expected_calls  # the kill really interrupted the run

        resumed = adjudicate_corpus(
            corpus,
            ScriptedBackend.from_file(rules_path),  # same call_log, appends
            ConsensusConfig(runs=3, seed=5),
            kinds=(PromptKind.TOP1_CONCORDANCE,),
            store=VerdictStore(store_path),
        )

        # at most the single in-flight call is re-issued
        total_calls = len(call_log.read_text().splitlines())
        assert total_calls <= expected_calls + 1
        assert total_calls >= expected_calls

        # no duplicate finals, and decisions identical to the reference run
        finals = VerdictStore(store_path).load_final()
        assert len(finals) == expected_calls

        def decisions(outcome):
            return {
                (r.encounter_id, r.prompt_kind.value): (r.decision_value(), r.vote_split)
                for r in outcome.results
            }

        assert decisions(resumed) == decisions(reference)
        assert calls_before_resume + len(finals) >= calls_before_resume  # sanity


class TestVerdictWriteCrash:
    def _queue(self, tmp_path):
        corpus_path = synth.build_corpus_file(
            tmp_path / "pairs.jsonl", n=10, top1_yes=0, top4_yes=10, plan_yes=10
        )
        rules_path = synth.build_rules_file(tmp_path / "rules.json")
        corpus = load_corpus(corpus_path)
        outcome = adjudicate_corpus(
            corpus,
            ScriptedBackend.from_file(rules_path),
            ConsensusConfig(runs=3, seed=1),
            store=None,
        )
        report = summarize(corpus, outcome.results)
        queue = build_queue(report, corpus, seed=1, results=outcome.results)
        assert len(queue) == 10
        queue_path = tmp_path / "queue.json"
        save_queue(queue, queue_path)
        return queue_path

    def test_kill_during_writes_loses_at_most_inflight(self, tmp_path):
        queue_path = self._queue(tmp_path)
        log_path = tmp_path / "triage_verdicts.jsonl"

        process = spawn("verdicts", queue_path, log_path, 20)
        try:
            wait_for_lines(log_path, minimum=3)
        finally:
            process.send_signal(signal.SIGKILL)
            process.wait()

        # every surviving line is a complete record
        lines = log_path.read_text().splitlines()
        complete = []
        for line in lines:
            try:
                complete.append(json.loads(line))
            except json.JSONDecodeError:
                pass  # at most the torn in-flight line
        assert len(lines) - len(complete) <= 1
        assert len(complete) >= 3

        # restart replays the log unchanged and finishes the queue
        queue = load_queue(queue_path)
        store = TriageStore(queue, log_path, use_lock=False)
        recorded_before = {v.encounter_id for v in store.verdicts()}
        assert recorded_before == {r["encounter_id"] for r in complete}

        finish = subprocess.run(
            [sys.executable, str(RUNNER), "verdicts", str(queue_path), str(log_path), "0"],
            capture_output=True,
        )
        assert finish.returncode == 0, finish.stderr.decode()

        final_store = TriageStore(queue, log_path, use_lock=False)
        assert len(final_store.verdicts()) == 10
        ids = [v.encounter_id for v in final_store.verdicts()]
        assert len(ids) == len(set(ids))
        assert final_store.pending() == []
