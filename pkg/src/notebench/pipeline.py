"""End-to-end run orchestration: ingest, metrics, judging, reporting.

Stages write their artifacts into the output directory so any stage can
be re-run in isolation:

    exclusions.jsonl   dropped corpus records with reasons
    profiles.json      per-pair surface and semantic scores
    verdicts.jsonl     append-only judge audit log (checkpoint)
    report.json etc.   emitted by the analytics module
    queue.json         review queue for the triage stage
    manifest.json      reproducibility manifest incl. failed pairs
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import analytics, triage
from .config import RunConfig
from .embeddings import (
    EmbeddingProvider,
    EmbeddingProviderSpec,
    HashingEmbeddingProvider,
    HttpEmbeddingProvider,
    SemanticProfile,
    VectorCache,
    semantic_profile,
)
from .errors import ConfigError, MissingReportError
from .judge import (
    ConsensusConfig,
    HttpChatBackend,
    JudgeBackend,
    ScriptedBackend,
    adjudicate_corpus,
)
from .judge.audit import VerdictStore
from .notes import Corpus, load_corpus, write_exclusion_log
from .surface import SurfaceScores, build_idf, surface_profile

logger = logging.getLogger(__name__)


@dataclass
class PipelineResult:
    report: analytics.CohortReport | None = None
    failures: list[dict] = field(default_factory=list)
    written: list[Path] = field(default_factory=list)

    @property
    def partial(self) -> bool:
        return bool(self.failures)


def make_providers(config: RunConfig) -> list[EmbeddingProvider]:
    providers: list[EmbeddingProvider] = []
    for block in config.providers:
        kind = block.get("kind", "hash")
        if kind == "hash":
            providers.append(
                HashingEmbeddingProvider(
                    provider_id=block.get("provider_id", "hash-16"),
                    dim=int(block.get("dim", 16)),
                )
            )
        elif kind == "http":
            providers.append(
                HttpEmbeddingProvider(
                    EmbeddingProviderSpec(
                        provider_id=block["provider_id"],
                        dim=int(block["dim"]),
                        endpoint=block.get("endpoint", ""),
                        model=block.get("model", ""),
                        credential_env=block.get("credential_env", ""),
                        timeout_s=float(block.get("timeout_s", 30.0)),
                        max_chars=int(block.get("max_chars", 32768)),
                    )
                )
            )
        else:
            raise ConfigError(f"unknown provider kind {kind!r}")
    return providers


def make_backend(config: RunConfig) -> JudgeBackend:
    if config.backend == "scripted":
        return ScriptedBackend.from_file(config.scripted_rules)
    return HttpChatBackend(
        endpoint=config.http_endpoint,
        credential_env=config.http_credential_env,
        timeout_s=config.http_timeout_s,
    )


def load_corpus_checked(config: RunConfig) -> Corpus:
    path = Path(config.corpus)
    if not path.is_file():
        raise ConfigError(f"corpus path {path} is not a readable file")
    corpus = load_corpus(path)
    if len(corpus) == 0:
        raise ConfigError(f"corpus {path} contains no usable pairs")
    return corpus


def compute_profiles(
    corpus: Corpus,
    providers: list[EmbeddingProvider],
    cache: VectorCache | None,
    parallelism: int = 1,
) -> tuple[dict[str, SurfaceScores], dict[str, SemanticProfile]]:
    idf = build_idf(corpus)
    # surface scoring is pure in-process CPU; threads cannot help it and
    # GIL handoffs around the small numpy ops actively hurt
    surface = {pair.encounter_id: surface_profile(pair, idf) for pair in corpus.pairs}

    def embed_pair(pair):
        return pair.encounter_id, semantic_profile(pair, providers, cache)

    if not providers:
        semantic = {pair.encounter_id: SemanticProfile() for pair in corpus.pairs}
    else:
        # fan out only when embedding actually leaves the process
        remote = any(isinstance(p, HttpEmbeddingProvider) for p in providers)
        if remote and parallelism > 1:
            with ThreadPoolExecutor(max_workers=parallelism) as pool:
                semantic = dict(pool.map(embed_pair, corpus.pairs))
        else:
            semantic = dict(embed_pair(pair) for pair in corpus.pairs)
    return surface, semantic


def save_profiles(
    path: Path,
    surface: dict[str, SurfaceScores],
    semantic: dict[str, SemanticProfile],
) -> None:
    payload = {
        eid: {
            "surface": surface[eid].as_dict(),
            "semantic": {
                "scores": semantic[eid].scores,
                "failures": semantic[eid].failures,
            },
        }
        for eid in surface
    }
    path.write_text(
        json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )


def load_profiles(path: Path) -> tuple[dict[str, SurfaceScores], dict[str, SemanticProfile]]:
    payload = json.loads(path.read_text(encoding="utf-8"))
    surface = {eid: SurfaceScores(**row["surface"]) for eid, row in payload.items()}
    semantic = {
        eid: SemanticProfile(
            scores=row["semantic"]["scores"], failures=row["semantic"]["failures"]
        )
        for eid, row in payload.items()
    }
    return surface, semantic


def _write_manifest(out_dir: Path, config: RunConfig, failures: list[dict]) -> Path:
    manifest = config.manifest()
    manifest["failed_pairs"] = failures
    path = out_dir / "manifest.json"
    path.write_text(
        json.dumps(manifest, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    return path


def run_metrics(config: RunConfig, corpus: Corpus | None = None) -> Path:
    """Similarity-only stage: writes profiles.json and exclusions.jsonl."""
    corpus = corpus or load_corpus_checked(config)
    out_dir = Path(config.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_exclusion_log(corpus, out_dir / "exclusions.jsonl")
    providers = make_providers(config)
    cache = VectorCache(out_dir / "cache")
    surface, semantic = compute_profiles(corpus, providers, cache, config.parallelism)
    path = out_dir / "profiles.json"
    save_profiles(path, surface, semantic)
    return path


def run_judge(config: RunConfig, corpus: Corpus | None = None):
    """Judge-only stage: adjudicates all enabled prompt kinds, checkpointed."""
    corpus = corpus or load_corpus_checked(config)
    out_dir = Path(config.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    backend = make_backend(config)
    store = VerdictStore(out_dir / "verdicts.jsonl")
    consensus_config = ConsensusConfig(runs=config.runs, seed=config.seed, model_id=config.model)
    return adjudicate_corpus(
        corpus,
        backend,
        consensus_config,
        kinds=config.prompts,
        store=store,
        parallelism=config.parallelism,
    )


def aggregate(config: RunConfig, corpus: Corpus, outcome, surface, semantic) -> PipelineResult:
    """Fold judge outcome and profiles into the report and its files."""
    out_dir = Path(config.out)
    failed_ids = sorted({f["encounter_id"] for f in outcome.failures})
    report = analytics.summarize(
        corpus,
        outcome.results,
        surface_profiles=surface,
        semantic_profiles=semantic,
        run_manifest=config.manifest(),
        exclude_ids=failed_ids,
    )
    written = analytics.emit_report(report, out_dir)
    queue = triage.build_queue(report, corpus, config.seed, results=outcome.results)
    queue_path = out_dir / "queue.json"
    triage.save_queue(queue, queue_path)
    written.append(queue_path)
    written.append(_write_manifest(out_dir, config, outcome.failures))
    return PipelineResult(report=report, failures=outcome.failures, written=written)


def run_pipeline(config: RunConfig) -> PipelineResult:
    """The full run: corpus -> profiles -> adjudication -> report files."""
    config.validate()
    corpus = load_corpus_checked(config)  # fail before creating any outputs

    out_dir = Path(config.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_exclusion_log(corpus, out_dir / "exclusions.jsonl")

    providers = make_providers(config)
    cache = VectorCache(out_dir / "cache")
    surface, semantic = compute_profiles(corpus, providers, cache, config.parallelism)
    save_profiles(out_dir / "profiles.json", surface, semantic)

    outcome = run_judge(config, corpus)
    result = aggregate(config, corpus, outcome, surface, semantic)
    logger.info(
        "run complete: %d pairs, %d failures, %d files",
        len(corpus),
        len(result.failures),
        len(result.written),
    )
    return result


class _NullBackend:
    """Backend that refuses every call; used to re-aggregate from checkpoints."""

    def complete(self, model_id: str, prompt: str) -> str:
        from .errors import BackendCallError

        raise BackendCallError("re-aggregation never calls a backend")


def run_report(config: RunConfig) -> PipelineResult:
    """Re-aggregate report files from stored verdicts and profiles."""
    corpus = load_corpus_checked(config)
    out_dir = Path(config.out)
    verdicts_path = out_dir / "verdicts.jsonl"
    if not verdicts_path.exists():
        raise MissingReportError(f"no verdict store at {verdicts_path}; run judge first")
    profiles_path = out_dir / "profiles.json"
    if profiles_path.exists():
        surface, semantic = load_profiles(profiles_path)
    else:
        surface, semantic = {}, {}

    # resume-only pass: consume the checkpoint without new backend calls
    from .judge.consensus import AdjudicationOutcome, run_consensus

    store = VerdictStore(verdicts_path)
    consensus_config = ConsensusConfig(runs=config.runs, seed=config.seed, model_id=config.model)
    existing = store.load_final()
    outcome = AdjudicationOutcome()
    backend = _NullBackend()
    for pair in corpus.pairs:
        for kind in config.prompts:
            try:
                outcome.results.append(
                    run_consensus(pair, kind, backend, consensus_config, existing=existing)
                )
            except Exception as exc:
                outcome.failures.append(
                    {
                        "encounter_id": pair.encounter_id,
                        "prompt_kind": kind.value,
                        "error": str(exc),
                    }
                )
    return aggregate(config, corpus, outcome, surface, semantic)
