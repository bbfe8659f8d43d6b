"""CLI subcommands end to end with the scripted backend."""

from __future__ import annotations

import json

import pytest
from click.testing import CliRunner

from notebench.cli import main

from . import synth


@pytest.fixture()
def workspace(tmp_path):
    corpus = synth.build_corpus_file(tmp_path / "pairs.jsonl", n=12, top1_yes=8, top4_yes=11, plan_yes=12)
    rules = synth.build_rules_file(tmp_path / "rules.json")
    return tmp_path, corpus, rules


def run_cli(*args):
    return CliRunner().invoke(main, [str(a) for a in args])


class TestRun:
    def test_full_run_writes_report_files(self, workspace):
        tmp_path, corpus, rules = workspace
        out = tmp_path / "out"
        result = run_cli(
            "run", "--corpus", corpus, "--out", out, "--backend", "scripted",
            "--scripted-rules", rules, "--seed", 7,
        )
        assert result.exit_code == 0, result.output
        for name in (
            "report.json", "strata.csv", "similarity.csv", "frequency.csv",
            "summary.txt", "queue.json", "manifest.json", "exclusions.jsonl",
            "profiles.json", "verdicts.jsonl", "concordance.png",
        ):
            assert (out / name).exists(), name
        report = json.loads((out / "report.json").read_text())
        assert report["top1"]["successes"] == 8
        assert report["top1"]["n"] == 12

    def test_unreadable_corpus_is_fatal_with_no_outputs(self, workspace):
        tmp_path, _, rules = workspace
        out = tmp_path / "out-missing"
        result = run_cli(
            "run", "--corpus", tmp_path / "nope.jsonl", "--out", out,
            "--backend", "scripted", "--scripted-rules", rules,
        )
        assert result.exit_code == 1
        assert "error:" in result.output
        assert not out.exists()

    def test_backend_failure_for_one_pair_is_partial(self, tmp_path):
        corpus_path = tmp_path / "pairs.jsonl"
        records = []
        for i in range(3):
            marker = "marker-broken" if i == 0 else "marker-top1-yes marker-top4-yes marker-plan-yes marker-css-moderate"
            records.append(
                {
                    "encounter_id": f"e{i}",
                    "machine_note": f"Assessment:\n1. Flu ({marker})\n2. B\n3. C\n4. D\nPlan: rest",
                    "clinician_note": "Assessment: Flu\nPlan: rest",
                }
            )
        corpus_path.write_text("\n".join(json.dumps(r) for r in records) + "\n")
        rules_payload = json.loads(synth.build_rules_file(tmp_path / "rules.json").read_text())
        rules_payload["rules"].insert(0, {"pattern": "marker-broken", "error": "outage"})
        (tmp_path / "rules.json").write_text(json.dumps(rules_payload))

        out = tmp_path / "out"
        result = run_cli(
            "run", "--corpus", corpus_path, "--out", out, "--backend", "scripted",
            "--scripted-rules", tmp_path / "rules.json",
        )
        assert result.exit_code == 2, result.output
        manifest = json.loads((out / "manifest.json").read_text())
        failed = {f["encounter_id"] for f in manifest["failed_pairs"]}
        assert failed == {"e0"}
        report = json.loads((out / "report.json").read_text())
        assert report["top1"]["n"] == 2  # failed pair excluded, others scored

    def test_reproducible_across_out_dirs(self, workspace):
        tmp_path, corpus, rules = workspace
        outs = []
        for name in ("out-a", "out-b"):
            out = tmp_path / name
            result = run_cli(
                "run", "--corpus", corpus, "--out", out, "--backend", "scripted",
                "--scripted-rules", rules, "--seed", 3,
            )
            assert result.exit_code == 0, result.output
            outs.append(out)
        for name in (
            "report.json", "strata.csv", "similarity.csv", "frequency.csv",
            "summary.txt", "queue.json", "manifest.json",
            "concordance.png", "similarity.png", "strata.png", "frequency.png",
        ):
            assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes(), name


class TestStages:
    def test_metrics_then_judge_then_report(self, workspace):
        tmp_path, corpus, rules = workspace
        out = tmp_path / "staged"
        assert run_cli("metrics", "--corpus", corpus, "--out", out).exit_code == 0
        assert (out / "profiles.json").exists()
        assert run_cli(
            "judge", "--corpus", corpus, "--out", out, "--backend", "scripted",
            "--scripted-rules", rules,
        ).exit_code == 0
        assert (out / "verdicts.jsonl").exists()
        result = run_cli("report", "--corpus", corpus, "--out", out)
        assert result.exit_code == 0, result.output
        assert (out / "report.json").exists()

    def test_report_without_verdicts_fails(self, workspace):
        tmp_path, corpus, _ = workspace
        result = run_cli("report", "--corpus", corpus, "--out", tmp_path / "empty-out")
        assert result.exit_code == 1


class TestTriageCli:
    def _ran(self, workspace):
        tmp_path, corpus, rules = workspace
        out = tmp_path / "out"
        assert run_cli(
            "run", "--corpus", corpus, "--out", out, "--backend", "scripted",
            "--scripted-rules", rules,
        ).exit_code == 0
        return out

    def test_next_verdict_summary_flow(self, workspace):
        out = self._ran(workspace)
        next_result = run_cli("triage", "next", "--out", out)
        assert next_result.exit_code == 0
        encounter = next_result.output.splitlines()[0].split(": ")[1]

        verdict_result = run_cli(
            "triage", "verdict", encounter, "machine_superior",
            "--rationale", "better differential", "--out", out,
        )
        assert verdict_result.exit_code == 0, verdict_result.output

        summary_result = run_cli("triage", "summary", "--out", out)
        assert summary_result.exit_code == 0
        summary = json.loads(summary_result.output)
        assert summary["counts"]["machine_superior"] == 1
        assert summary["total_reviewed"] == 1

    def test_conflicting_verdict_fails(self, workspace):
        out = self._ran(workspace)
        encounter = json.loads((out / "queue.json").read_text())["items"][0]["encounter_id"]
        assert run_cli(
            "triage", "verdict", encounter, "machine_superior", "--out", out
        ).exit_code == 0
        conflict = run_cli(
            "triage", "verdict", encounter, "clinician_superior", "--out", out
        )
        assert conflict.exit_code == 1
        assert "already reviewed" in conflict.output

    def test_triage_without_queue_fails(self, tmp_path):
        result = run_cli("triage", "summary", "--out", tmp_path)
        assert result.exit_code == 1


class TestServe:
    def test_serve_without_report_fails(self, tmp_path):
        result = run_cli("serve", "--out", tmp_path)
        assert result.exit_code == 1
        assert "no completed report" in result.output
