"""Cohort aggregation: concordance proportions with exact binomial
intervals, CSS strata, metric means, and report emission.

Confidence intervals are exact Clopper-Pearson (binomial inversion via the
beta quantile).  Indeterminate consensus decisions count against
concordance and are tallied separately.  No hypothesis testing happens
here by design.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from scipy.stats import beta as beta_dist

from .embeddings import SemanticProfile
from .errors import DomainError, MissingDecisionError
from .judge import ConsensusResult, CssRecord, Decision, PromptKind
from .notes import Corpus
from .surface import SurfaceScores


class Sidedness(str, Enum):
    TWO_SIDED = "two_sided"
    ONE_SIDED_UPPER = "one_sided_upper"


@dataclass(frozen=True)
class ProportionEstimate:
    successes: int
    n: int
    point: float
    ci_low: float
    ci_high: float
    level: float
    sided: Sidedness

    def as_dict(self) -> dict[str, Any]:
        return {
            "successes": self.successes,
            "n": self.n,
            "point": self.point,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "level": self.level,
            "sided": self.sided.value,
        }


def proportion_ci(
    successes: int,
    n: int,
    level: float = 0.95,
    sided: Sidedness | str = Sidedness.TWO_SIDED,
) -> ProportionEstimate:
    """Exact Clopper-Pearson interval for a binomial proportion.

    Two-sided bounds invert the binomial tails at (1-level)/2 each; the
    one-sided upper bound puts the whole tail above, which for zero
    successes reduces to the closed form 1 - (1-level)^(1/n).
    """
    sided = Sidedness(sided)
    if n < 1 or not 0 <= successes <= n:
        raise DomainError(f"invalid counts: {successes}/{n}")
    if not 0.0 < level < 1.0:
        raise DomainError(f"invalid level: {level}")

    point = successes / n
    alpha = 1.0 - level
    if sided is Sidedness.TWO_SIDED:
        low = 0.0 if successes == 0 else float(beta_dist.ppf(alpha / 2, successes, n - successes + 1))
        high = 1.0 if successes == n else float(beta_dist.ppf(1 - alpha / 2, successes + 1, n - successes))
    else:
        low = 0.0
        high = 1.0 if successes == n else float(beta_dist.ppf(level, successes + 1, n - successes))
    return ProportionEstimate(
        successes=successes,
        n=n,
        point=point,
        ci_low=min(max(low, 0.0), 1.0),
        ci_high=min(max(high, 0.0), 1.0),
        level=level,
        sided=sided,
    )


def mean_sd(values: Sequence[float]) -> tuple[float, float]:
    """Arithmetic mean and sample standard deviation (n-1 denominator).

    A single value yields sd 0.0 by convention; callers report n alongside.
    """
    if not values:
        raise DomainError("mean_sd needs at least one value")
    n = len(values)
    mean = sum(values) / n
    if n == 1:
        return mean, 0.0
    var = sum((x - mean) ** 2 for x in values) / (n - 1)
    return mean, math.sqrt(var)


class StratumLabel(str, Enum):
    LOW = "low"
    MODERATE = "moderate"
    HIGH = "high"


# complexity 3 belongs to the low stratum so the three bands partition 0-10
_STRATA_BOUNDS = {
    StratumLabel.LOW: (0, 3),
    StratumLabel.MODERATE: (4, 6),
    StratumLabel.HIGH: (7, 10),
}


def stratum_for(complexity: int) -> StratumLabel:
    for label, (lo, hi) in _STRATA_BOUNDS.items():
        if lo <= complexity <= hi:
            return label
    raise DomainError(f"complexity {complexity} outside 0-10")


@dataclass(frozen=True)
class ComplexityStratum:
    label: StratumLabel
    css_mean: float | None
    share: float
    n: int

    def as_dict(self) -> dict[str, Any]:
        return {
            "label": self.label.value,
            "css_mean": self.css_mean,
            "share": self.share,
            "n": self.n,
        }


@dataclass(frozen=True)
class MetricSummary:
    mean: float
    sd: float
    n: int

    def as_dict(self) -> dict[str, Any]:
        return {"mean": self.mean, "sd": self.sd, "n": self.n}


@dataclass
class CohortReport:
    top1: ProportionEstimate
    top4: ProportionEstimate
    plan: ProportionEstimate
    hallucination_bound: ProportionEstimate | None
    css_mean_sd: tuple[float, float] | None
    css_n: int
    strata: list[ComplexityStratum]
    surface_means: dict[str, MetricSummary]
    semantic_means: dict[str, MetricSummary]
    discordant_ids: list[str]
    diagnosis_frequency: list[tuple[str, int]]
    decision_tallies: dict[str, dict[str, int]]
    run_manifest: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def as_dict(self) -> dict[str, Any]:
        return {
            "top1": self.top1.as_dict(),
            "top4": self.top4.as_dict(),
            "plan": self.plan.as_dict(),
            "hallucination_bound": (
                self.hallucination_bound.as_dict() if self.hallucination_bound else None
            ),
            "css_mean_sd": list(self.css_mean_sd) if self.css_mean_sd else None,
            "css_n": self.css_n,
            "strata": [s.as_dict() for s in self.strata],
            "surface_means": {k: v.as_dict() for k, v in self.surface_means.items()},
            "semantic_means": {k: v.as_dict() for k, v in self.semantic_means.items()},
            "discordant_ids": list(self.discordant_ids),
            "diagnosis_frequency": [[label, count] for label, count in self.diagnosis_frequency],
            "decision_tallies": self.decision_tallies,
            "run_manifest": self.run_manifest,
            "notes": self.notes,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "CohortReport":
        def prop(d: Mapping[str, Any] | None) -> ProportionEstimate | None:
            if d is None:
                return None
            return ProportionEstimate(
                successes=d["successes"],
                n=d["n"],
                point=d["point"],
                ci_low=d["ci_low"],
                ci_high=d["ci_high"],
                level=d["level"],
                sided=Sidedness(d["sided"]),
            )

        return cls(
            top1=prop(data["top1"]),
            top4=prop(data["top4"]),
            plan=prop(data["plan"]),
            hallucination_bound=prop(data.get("hallucination_bound")),
            css_mean_sd=tuple(data["css_mean_sd"]) if data.get("css_mean_sd") else None,
            css_n=data.get("css_n", 0),
            strata=[
                ComplexityStratum(
                    label=StratumLabel(s["label"]),
                    css_mean=s["css_mean"],
                    share=s["share"],
                    n=s["n"],
                )
                for s in data.get("strata", [])
            ],
            surface_means={
                k: MetricSummary(**v) for k, v in data.get("surface_means", {}).items()
            },
            semantic_means={
                k: MetricSummary(**v) for k, v in data.get("semantic_means", {}).items()
            },
            discordant_ids=list(data.get("discordant_ids", [])),
            diagnosis_frequency=[(l, c) for l, c in data.get("diagnosis_frequency", [])],
            decision_tallies=dict(data.get("decision_tallies", {})),
            run_manifest=dict(data.get("run_manifest", {})),
            notes=list(data.get("notes", [])),
        )


def _proportion_from_decisions(
    decisions: Mapping[str, Decision], level: float
) -> tuple[ProportionEstimate, dict[str, int]]:
    n = len(decisions)
    tally = {
        "concordant": sum(1 for d in decisions.values() if d is Decision.CONCORDANT),
        "not_concordant": sum(1 for d in decisions.values() if d is Decision.NOT_CONCORDANT),
        "indeterminate": sum(1 for d in decisions.values() if d is Decision.INDETERMINATE),
    }
    return proportion_ci(tally["concordant"], n, level, Sidedness.TWO_SIDED), tally


def summarize(
    corpus: Corpus,
    results: Iterable[ConsensusResult],
    surface_profiles: Mapping[str, SurfaceScores] | None = None,
    semantic_profiles: Mapping[str, SemanticProfile] | None = None,
    run_manifest: dict | None = None,
    exclude_ids: Iterable[str] = (),
    level: float = 0.95,
) -> CohortReport:
    """Fold consensus decisions and similarity profiles into the report.

    ``exclude_ids`` lists pairs the judge could not score (backend
    exhausted); any other pair missing a top1/top4/plan decision raises
    :class:`MissingDecisionError`.
    """
    surface_profiles = surface_profiles or {}
    semantic_profiles = semantic_profiles or {}
    excluded = set(exclude_ids)

    by_kind: dict[PromptKind, dict[str, ConsensusResult]] = {}
    for result in results:
        by_kind.setdefault(result.prompt_kind, {})[result.encounter_id] = result

    scored_ids = [p.encounter_id for p in corpus.pairs if p.encounter_id not in excluded]

    def decisions_for(kind: PromptKind) -> dict[str, Decision]:
        slot = by_kind.get(kind, {})
        out: dict[str, Decision] = {}
        for eid in scored_ids:
            if eid not in slot:
                raise MissingDecisionError(f"pair {eid} lacks a {kind.value} decision")
            decision = slot[eid].decision
            if isinstance(decision, CssRecord):
                raise MissingDecisionError(f"pair {eid} has a CSS record where a vote was expected")
            out[eid] = decision
        return out

    top1_decisions = decisions_for(PromptKind.TOP1_CONCORDANCE)
    top4_decisions = decisions_for(PromptKind.TOP4_CONCORDANCE)
    plan_decisions = decisions_for(PromptKind.TREATMENT_PLAN)

    top1, top1_tally = _proportion_from_decisions(top1_decisions, level)
    top4, top4_tally = _proportion_from_decisions(top4_decisions, level)
    plan, plan_tally = _proportion_from_decisions(plan_decisions, level)
    tallies = {
        "top1_concordance": top1_tally,
        "top4_concordance": top4_tally,
        "treatment_plan": plan_tally,
    }

    # supplementary screen: events are flagged or indeterminate runs,
    # bounded one-sided from above (conservative for a safety claim)
    hallucination_bound = None
    screen = by_kind.get(PromptKind.HALLUCINATION_SCREEN)
    if screen:
        flagged = 0
        n_screen = 0
        for eid in scored_ids:
            if eid in screen:
                n_screen += 1
                if screen[eid].decision is not Decision.CONCORDANT:
                    flagged += 1
        if n_screen:
            hallucination_bound = proportion_ci(
                flagged, n_screen, level, Sidedness.ONE_SIDED_UPPER
            )
            tallies["hallucination_screen"] = {
                "flagged": flagged,
                "clean": n_screen - flagged,
                "indeterminate": 0,
            }

    # CSS similarity mean and complexity strata over parseable records
    css_by_id: dict[str, CssRecord] = {}
    for eid, result in by_kind.get(PromptKind.CSS, {}).items():
        if eid in excluded:
            continue
        if isinstance(result.decision, CssRecord):
            css_by_id[eid] = result.decision
    css_values = [rec.similarity for rec in css_by_id.values()]
    css_mean_sd = mean_sd([float(v) for v in css_values]) if css_values else None

    strata: list[ComplexityStratum] = []
    total_scored = len(css_by_id)
    for label in StratumLabel:
        members = [rec.similarity for rec in css_by_id.values() if stratum_for(rec.complexity) is label]
        strata.append(
            ComplexityStratum(
                label=label,
                css_mean=mean_sd([float(v) for v in members])[0] if members else None,
                share=len(members) / total_scored if total_scored else 0.0,
                n=len(members),
            )
        )

    surface_means: dict[str, MetricSummary] = {}
    if surface_profiles:
        for metric in ("tfidf_cosine", "jaccard", "levenshtein_ratio"):
            values = [
                profile.as_dict()[metric]
                for eid, profile in surface_profiles.items()
                if eid not in excluded
            ]
            if values:
                m, s = mean_sd(values)
                surface_means[metric] = MetricSummary(mean=m, sd=s, n=len(values))

    semantic_means: dict[str, MetricSummary] = {}
    provider_values: dict[str, list[float]] = {}
    for eid, profile in semantic_profiles.items():
        if eid in excluded:
            continue
        for provider_id, score in profile.scores.items():
            provider_values.setdefault(provider_id, []).append(score)
    for provider_id in sorted(provider_values):
        values = provider_values[provider_id]
        m, s = mean_sd(values)
        semantic_means[provider_id] = MetricSummary(mean=m, sd=s, n=len(values))

    discordant_ids = [
        eid for eid in scored_ids if top1_decisions[eid] is not Decision.CONCORDANT
    ]

    frequency: dict[str, int] = {}
    for pair in corpus.pairs:
        primary = pair.machine_note.primary_diagnosis()
        if primary:
            frequency[primary] = frequency.get(primary, 0) + 1
    diagnosis_frequency = sorted(frequency.items(), key=lambda kv: (-kv[1], kv[0]))

    notes = [
        "Indeterminate judge decisions count against concordance and are tallied separately.",
        "Complexity 3 is assigned to the low stratum so the three bands partition 0-10.",
    ]

    return CohortReport(
        top1=top1,
        top4=top4,
        plan=plan,
        hallucination_bound=hallucination_bound,
        css_mean_sd=css_mean_sd,
        css_n=total_scored,
        strata=strata,
        surface_means=surface_means,
        semantic_means=semantic_means,
        discordant_ids=discordant_ids,
        diagnosis_frequency=diagnosis_frequency,
        decision_tallies=tallies,
        run_manifest=run_manifest or {},
        notes=notes,
    )


def _fmt(value: float | None, digits: int = 6) -> str:
    return "" if value is None else f"{value:.{digits}f}"


def _proportion_line(name: str, est: ProportionEstimate, extra: str = "") -> str:
    return (
        f"{name}: {est.point * 100:.1f}% ({est.successes}/{est.n}; "
        f"{est.level * 100:.0f}% CI {est.ci_low * 100:.1f}-{est.ci_high * 100:.1f}%)"
        f"{extra}"
    )


def emit_report(
    report: CohortReport,
    out_dir: str | Path,
    formats: Iterable[str] = ("json", "csv", "txt", "figures"),
) -> list[Path]:
    """Write the report artifacts; returns the list of files written.

    json: the full structured report.  csv: strata, similarity, and
    diagnosis-frequency tables.  txt: a human-readable summary.  figures:
    deterministic matplotlib charts next to the delimited files.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    formats = set(formats)
    written: list[Path] = []

    if "json" in formats:
        path = out_dir / "report.json"
        path.write_text(
            json.dumps(report.as_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )
        written.append(path)

    if "csv" in formats:
        strata_path = out_dir / "strata.csv"
        lines = ["complexity,css_mean,share_pct,n_cases"]
        for stratum in report.strata:
            lines.append(
                f"{stratum.label.value},{_fmt(stratum.css_mean, 4)},"
                f"{stratum.share * 100:.4f},{stratum.n}"
            )
        strata_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        written.append(strata_path)

        sim_path = out_dir / "similarity.csv"
        lines = ["metric,family,mean,sd,n"]
        for metric, summary in report.surface_means.items():
            lines.append(
                f"{metric},surface,{_fmt(summary.mean)},{_fmt(summary.sd)},{summary.n}"
            )
        for provider, summary in report.semantic_means.items():
            lines.append(
                f"{provider},semantic,{_fmt(summary.mean)},{_fmt(summary.sd)},{summary.n}"
            )
        sim_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        written.append(sim_path)

        freq_path = out_dir / "frequency.csv"
        lines = ["diagnosis,count"]
        for label, count in report.diagnosis_frequency:
            escaped = label.replace('"', '""')
            lines.append(f'"{escaped}",{count}')
        freq_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        written.append(freq_path)

    if "txt" in formats:
        txt_path = out_dir / "summary.txt"
        parts = ["Concordance summary", "=" * 19, ""]
        t = report.decision_tallies
        parts.append(
            _proportion_line(
                "Top-1 diagnostic concordance",
                report.top1,
                f" [indeterminate: {t['top1_concordance']['indeterminate']}]",
            )
        )
        parts.append(
            _proportion_line(
                "Top-4 diagnostic concordance",
                report.top4,
                f" [indeterminate: {t['top4_concordance']['indeterminate']}]",
            )
        )
        parts.append(
            _proportion_line(
                "Treatment-plan compatibility",
                report.plan,
                f" [indeterminate: {t['treatment_plan']['indeterminate']}]",
            )
        )
        if report.hallucination_bound is not None:
            hb = report.hallucination_bound
            parts.append(
                f"Unsupported-content screen: {hb.successes}/{hb.n} flagged; "
                f"one-sided {hb.level * 100:.0f}% upper bound {hb.ci_high * 100:.2f}%"
            )
        parts.append("")
        if report.css_mean_sd is not None:
            mean, sd = report.css_mean_sd
            parts.append(f"CSS similarity: {mean:.2f} +/- {sd:.2f} (n={report.css_n})")
            parts.append("CSS by encounter complexity:")
            for stratum in report.strata:
                mean_text = f"{stratum.css_mean:.2f}" if stratum.css_mean is not None else "n/a"
                parts.append(
                    f"  {stratum.label.value:<9} mean {mean_text:>5}  "
                    f"share {stratum.share * 100:5.1f}%  n={stratum.n}"
                )
        parts.append("")
        if report.surface_means:
            parts.append("Surface similarity (mean +/- sd):")
            for metric, summary in report.surface_means.items():
                parts.append(
                    f"  {metric:<18} {summary.mean:.4f} +/- {summary.sd:.4f} (n={summary.n})"
                )
        if report.semantic_means:
            parts.append("Semantic similarity by provider (mean +/- sd):")
            for provider, summary in report.semantic_means.items():
                parts.append(
                    f"  {provider:<18} {summary.mean:.4f} +/- {summary.sd:.4f} (n={summary.n})"
                )
        parts.append("")
        parts.append(f"Discordant encounters (top-1): {len(report.discordant_ids)}")
        for note in report.notes:
            parts.append(f"note: {note}")
        txt_path.write_text("\n".join(parts) + "\n", encoding="utf-8")
        written.append(txt_path)

    if "figures" in formats:
        from . import figures

        written.extend(figures.render_report_figures(report, out_dir))

    return written
