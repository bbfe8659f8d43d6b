"""Command-line entry point: run, metrics, judge, report, triage, serve."""

from __future__ import annotations

import json
import logging
import re
import sys
from pathlib import Path

import click

from . import __version__, pipeline
from .config import RunConfig, build_config
from .errors import MissingReportError, NotebenchError
from .triage import (
    ReviewCategory,
    ReviewVerdict,
    TriageStore,
    load_queue,
    triage_summary,
)

EXIT_OK = 0
EXIT_FATAL = 1
EXIT_PARTIAL = 2

logger = logging.getLogger(__name__)


def _select_providers(config: RunConfig, provider_ids: str | None) -> None:
    if not provider_ids:
        return
    by_id = {block.get("provider_id"): block for block in config.providers}
    blocks = []
    for pid in (p.strip() for p in provider_ids.split(",") if p.strip()):
        if pid in by_id:
            blocks.append(by_id[pid])
        elif re.fullmatch(r"hash-\d+", pid):
            blocks.append({"provider_id": pid, "kind": "hash", "dim": int(pid.split("-")[1])})
        else:
            raise NotebenchError(
                f"provider {pid!r} is not configured and is not a built-in hash-<dim> id"
            )
    config.providers = blocks


def _shared_options(fn):
    fn = click.option("--corpus", type=str, default=None, help="Pair-record JSONL file.")(fn)
    fn = click.option("--out", type=str, default=None, help="Output directory.")(fn)
    fn = click.option("--config", "config_file", type=str, default=None, help="YAML config file.")(fn)
    fn = click.option("--backend", type=click.Choice(["http", "scripted"]), default=None)(fn)
    fn = click.option("--model", type=str, default=None, help="Judge model identifier.")(fn)
    fn = click.option("--runs", type=int, default=None, help="Consensus runs (odd).")(fn)
    fn = click.option("--seed", type=int, default=None, help="Blinding/queue seed.")(fn)
    fn = click.option("--providers", type=str, default=None, help="Comma-separated provider ids.")(fn)
    fn = click.option("--parallelism", type=int, default=None, help="Worker bound.")(fn)
    fn = click.option("--prompts", type=str, default=None, help="Comma-separated prompt kinds.")(fn)
    fn = click.option("--scripted-rules", "scripted_rules", type=str, default=None,
                      help="Rules file for the scripted backend.")(fn)
    return fn


def _build(config_file, providers, **flags) -> RunConfig:
    config = build_config({k: v for k, v in flags.items() if v is not None}, config_file)
    _select_providers(config, providers)
    return config


@click.group()
@click.version_option(version=__version__, prog_name="notebench")
def main() -> None:
    """Concordance benchmarking for paired machine/clinician SOAP notes."""
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")


@main.command()
@_shared_options
def run(config_file, providers, **flags) -> None:
    """Full pipeline: ingest, metrics, adjudication, report, queue."""
    try:
        config = _build(config_file, providers, **flags)
        result = pipeline.run_pipeline(config)
    except NotebenchError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_FATAL)
    for path in result.written:
        click.echo(f"wrote {path}")
    if result.partial:
        click.echo(
            f"completed with {len(result.failures)} failed pair/kind combinations "
            f"(see manifest.json)",
            err=True,
        )
        sys.exit(EXIT_PARTIAL)


@main.command()
@_shared_options
def metrics(config_file, providers, **flags) -> None:
    """Similarity-only stage (writes profiles.json)."""
    try:
        config = _build(config_file, providers, **flags)
        if not config.corpus or not config.out:
            raise NotebenchError("metrics needs --corpus and --out")
        path = pipeline.run_metrics(config)
    except NotebenchError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_FATAL)
    click.echo(f"wrote {path}")


@main.command()
@_shared_options
def judge(config_file, providers, **flags) -> None:
    """Judge-only rerun (writes/extends verdicts.jsonl)."""
    try:
        config = _build(config_file, providers, **flags)
        config.validate()
        outcome = pipeline.run_judge(config)
    except NotebenchError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_FATAL)
    click.echo(f"adjudicated {len(outcome.results)} pair/kind combinations")
    if outcome.failures:
        click.echo(f"{len(outcome.failures)} failures", err=True)
        sys.exit(EXIT_PARTIAL)


@main.command()
@_shared_options
def report(config_file, providers, **flags) -> None:
    """Re-aggregate report files from stored verdicts and profiles."""
    try:
        config = _build(config_file, providers, **flags)
        if not config.corpus or not config.out:
            raise NotebenchError("report needs --corpus and --out")
        result = pipeline.run_report(config)
    except NotebenchError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_FATAL)
    for path in result.written:
        click.echo(f"wrote {path}")
    if result.partial:
        sys.exit(EXIT_PARTIAL)


def _open_store(out: str) -> TriageStore:
    out_dir = Path(out)
    queue_path = out_dir / "queue.json"
    if not queue_path.exists():
        raise MissingReportError(f"no review queue at {queue_path}; run the pipeline first")
    return TriageStore(load_queue(queue_path), out_dir / "triage_verdicts.jsonl")


@main.group()
def triage() -> None:
    """Review discordant pairs from the terminal."""


@triage.command("next")
@click.option("--out", required=True, type=str)
def triage_next(out: str) -> None:
    """Show the next pending review item."""
    try:
        with _open_store(out) as store:
            pending = store.pending()
            if not pending:
                click.echo("queue drained; nothing pending")
                return
            item = pending[0]
            click.echo(f"encounter: {item.encounter_id}")
            click.echo(f"judge context: {json.dumps(item.judge_context, sort_keys=True)}")
            click.echo("--- NOTE A ---")
            click.echo(item.note_a)
            click.echo("--- NOTE B ---")
            click.echo(item.note_b)
            click.echo(f"({len(pending)} pending)")
    except NotebenchError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_FATAL)


@triage.command("verdict")
@click.argument("encounter_id")
@click.argument("category", type=click.Choice([c.value for c in ReviewCategory]))
@click.option("--rationale", default="", type=str)
@click.option("--reviewer", default="default", type=str)
@click.option("--out", required=True, type=str)
def triage_verdict(encounter_id, category, rationale, reviewer, out) -> None:
    """Record an expert verdict for one encounter."""
    try:
        with _open_store(out) as store:
            ack = store.record_verdict(
                ReviewVerdict(
                    encounter_id=encounter_id,
                    category=ReviewCategory(category),
                    rationale=rationale,
                    reviewer_id=reviewer,
                )
            )
        click.echo(json.dumps(ack))
    except NotebenchError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_FATAL)


@triage.command("summary")
@click.option("--out", required=True, type=str)
def triage_summary_cmd(out: str) -> None:
    """Category counts and shares over reviewed items."""
    try:
        with _open_store(out) as store:
            summary = triage_summary(store)
        click.echo(json.dumps(summary.as_dict(), indent=2, sort_keys=True))
    except NotebenchError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_FATAL)


@main.command()
@click.option("--out", required=True, type=str)
@click.option("--host", default="127.0.0.1", type=str)
@click.option("--port", default=8321, type=int)
def serve(out: str, host: str, port: int) -> None:
    """Serve the triage HTTP API until interrupted."""
    import uvicorn

    from .api import create_app

    out_dir = Path(out)
    if not (out_dir / "report.json").exists():
        click.echo(f"error: no completed report in {out_dir}; run the pipeline first", err=True)
        sys.exit(EXIT_FATAL)
    try:
        store = _open_store(out)
    except NotebenchError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_FATAL)
    app = create_app(store)
    try:
        uvicorn.run(app, host=host, port=port, log_level="warning")
    except (OSError, SystemExit) as exc:
        click.echo(f"error: cannot bind {host}:{port} ({exc})", err=True)
        sys.exit(EXIT_FATAL)
    finally:
        store.close()


if __name__ == "__main__":
    main()
