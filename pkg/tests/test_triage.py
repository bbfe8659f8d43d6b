"""Review queue construction, verdict log durability, and summaries."""

from __future__ import annotations

import json

import pytest

from notebench.analytics import summarize
from notebench.errors import (
    AlreadyReviewedError,
    StoreLockedError,
    UnknownEncounterError,
)
from notebench.triage import (
    ReviewCategory,
    ReviewVerdict,
    TriageStore,
    build_queue,
    load_queue,
    save_queue,
    summary_from_counts,
    triage_summary,
)

from .test_analytics import build_inputs


def make_report_and_corpus(n=12, top1_yes=7):
    corpus, results = build_inputs(n=n, top1_yes=top1_yes, top4_yes=n, plan_yes=n)
    report = summarize(corpus, results)
    return report, corpus, results


class TestBuildQueue:
    def test_one_item_per_discordant_encounter(self):
        report, corpus, results = make_report_and_corpus(n=12, top1_yes=7)
        queue = build_queue(report, corpus, seed=5, results=results)
        assert len(queue) == 5
        assert {item.encounter_id for item in queue} == set(report.discordant_ids)

    def test_zero_discordant_gives_empty_queue(self):
        report, corpus, results = make_report_and_corpus(n=6, top1_yes=6)
        assert build_queue(report, corpus, seed=5) == []

    def test_same_seed_reproduces_queue_exactly(self):
        report, corpus, results = make_report_and_corpus()
        q1 = build_queue(report, corpus, seed=42, results=results)
        q2 = build_queue(report, corpus, seed=42, results=results)
        assert [i.as_dict() for i in q1] == [i.as_dict() for i in q2]

    def test_different_seed_changes_order_or_panes(self):
        report, corpus, results = make_report_and_corpus(n=20, top1_yes=8)
        q1 = build_queue(report, corpus, seed=1, results=results)
        q2 = build_queue(report, corpus, seed=2, results=results)
        assert [i.as_dict() for i in q1] != [i.as_dict() for i in q2]

    def test_unknown_encounter_rejected(self):
        report, corpus, _ = make_report_and_corpus()
        report.discordant_ids.append("ghost")
        with pytest.raises(UnknownEncounterError):
            build_queue(report, corpus, seed=1)

    def test_judge_context_attached(self):
        report, corpus, results = make_report_and_corpus()
        queue = build_queue(report, corpus, seed=5, results=results)
        context = queue[0].judge_context
        assert context["top1_concordance"] == "not_concordant"
        assert "css" in context

    def test_queue_round_trips_through_file(self, tmp_path):
        report, corpus, results = make_report_and_corpus()
        queue = build_queue(report, corpus, seed=5, results=results)
        save_queue(queue, tmp_path / "queue.json")
        loaded = load_queue(tmp_path / "queue.json")
        assert [i.as_dict() for i in loaded] == [i.as_dict() for i in queue]


def open_store(tmp_path, queue, use_lock=False) -> TriageStore:
    return TriageStore(queue, tmp_path / "verdicts.jsonl", use_lock=use_lock)


class TestVerdictRecording:
    def _queue(self):
        report, corpus, results = make_report_and_corpus()
        return build_queue(report, corpus, seed=5, results=results)

    def test_first_submission_acknowledged(self, tmp_path):
        queue = self._queue()
        store = open_store(tmp_path, queue)
        before = len(store.pending())
        ack = store.record_verdict(
            ReviewVerdict(queue[0].encounter_id, ReviewCategory.MACHINE_SUPERIOR, "clearer plan")
        )
        assert ack["status"] == "recorded"
        assert len(store.pending()) == before - 1

    def test_exact_duplicate_is_idempotent(self, tmp_path):
        queue = self._queue()
        store = open_store(tmp_path, queue)
        verdict = ReviewVerdict(queue[0].encounter_id, ReviewCategory.INDETERMINATE, "unclear")
        store.record_verdict(verdict)
        ack = store.record_verdict(verdict)
        assert ack["status"] == "duplicate"
        assert len((tmp_path / "verdicts.jsonl").read_text().splitlines()) == 1

    def test_conflicting_resubmission_rejected(self, tmp_path):
        queue = self._queue()
        store = open_store(tmp_path, queue)
        store.record_verdict(
            ReviewVerdict(queue[0].encounter_id, ReviewCategory.MACHINE_SUPERIOR, "x")
        )
        with pytest.raises(AlreadyReviewedError):
            store.record_verdict(
                ReviewVerdict(queue[0].encounter_id, ReviewCategory.CLINICIAN_SUPERIOR, "x")
            )

    def test_unknown_encounter_rejected(self, tmp_path):
        store = open_store(tmp_path, self._queue())
        with pytest.raises(UnknownEncounterError):
            store.record_verdict(ReviewVerdict("ghost", ReviewCategory.INDETERMINATE))

    def test_verdicts_survive_restart(self, tmp_path):
        queue = self._queue()
        store = open_store(tmp_path, queue)
        for item in queue[:3]:
            store.record_verdict(
                ReviewVerdict(item.encounter_id, ReviewCategory.SAME_LOW_SPECIFICITY, "same dx")
            )
        reloaded = open_store(tmp_path, queue)
        assert {v.encounter_id for v in reloaded.verdicts()} == {
            i.encounter_id for i in queue[:3]
        }
        assert [reloaded.status(i.encounter_id) for i in queue[:3]] == ["done"] * 3

    def test_torn_trailing_record_dropped_on_replay(self, tmp_path):
        queue = self._queue()
        store = open_store(tmp_path, queue)
        store.record_verdict(
            ReviewVerdict(queue[0].encounter_id, ReviewCategory.MACHINE_SUPERIOR, "ok")
        )
        with (tmp_path / "verdicts.jsonl").open("a") as fh:
            fh.write('{"encounter_id": "torn", "cat')
        reloaded = open_store(tmp_path, queue)
        assert len(reloaded.verdicts()) == 1

    def test_per_reviewer_verdicts(self, tmp_path):
        queue = self._queue()
        store = open_store(tmp_path, queue)
        eid = queue[0].encounter_id
        store.record_verdict(ReviewVerdict(eid, ReviewCategory.MACHINE_SUPERIOR, "a", "alice"))
        store.record_verdict(ReviewVerdict(eid, ReviewCategory.INDETERMINATE, "b", "bob"))
        assert len(store.verdicts()) == 2

    def test_advisory_lock_blocks_second_opener(self, tmp_path):
        queue = self._queue()
        first = open_store(tmp_path, queue, use_lock=True)
        try:
            with pytest.raises(StoreLockedError):
                open_store(tmp_path, queue, use_lock=True)
        finally:
            first.close()
        # released lock can be re-acquired
        open_store(tmp_path, queue, use_lock=True).close()


class TestSummary:
    def test_reference_shares(self):
        summary = summary_from_counts(
            {
                ReviewCategory.MACHINE_SUPERIOR: 35,
                ReviewCategory.CLINICIAN_SUPERIOR: 9,
                ReviewCategory.SAME_LOW_SPECIFICITY: 36,
                ReviewCategory.INDETERMINATE: 17,
            }
        )
        assert summary.total_reviewed == 97
        assert summary.shares["machine_superior"] * 100 == pytest.approx(36.1, abs=0.05)
        assert summary.shares["clinician_superior"] * 100 == pytest.approx(9.3, abs=0.05)
        assert summary.shares["same_low_specificity"] * 100 == pytest.approx(37.1, abs=0.05)
        assert summary.shares["indeterminate"] * 100 == pytest.approx(17.5, abs=0.05)

    def test_empty_store_reports_zero_shares(self, tmp_path):
        report, corpus, results = make_report_and_corpus()
        queue = build_queue(report, corpus, seed=5, results=results)
        store = open_store(tmp_path, queue)
        summary = triage_summary(store)
        assert summary.total_reviewed == 0
        assert all(share == 0.0 for share in summary.shares.values())
        assert summary.total_pending == len(queue)

    def test_single_verdict_full_share(self, tmp_path):
        report, corpus, results = make_report_and_corpus()
        queue = build_queue(report, corpus, seed=5, results=results)
        store = open_store(tmp_path, queue)
        store.record_verdict(
            ReviewVerdict(queue[0].encounter_id, ReviewCategory.MACHINE_SUPERIOR)
        )
        summary = triage_summary(store)
        assert summary.shares["machine_superior"] == 1.0

    def test_shares_sum_to_one_over_reviewed(self, tmp_path):
        report, corpus, results = make_report_and_corpus()
        queue = build_queue(report, corpus, seed=5, results=results)
        store = open_store(tmp_path, queue)
        categories = list(ReviewCategory)
        for i, item in enumerate(queue):
            store.record_verdict(ReviewVerdict(item.encounter_id, categories[i % 4]))
        summary = triage_summary(store)
        assert sum(summary.shares.values()) == pytest.approx(1.0, abs=1e-9)

    def test_stored_categories_are_always_valid(self, tmp_path):
        with pytest.raises(ValueError):
            ReviewVerdict.from_dict({"encounter_id": "x", "category": "best_note"})
