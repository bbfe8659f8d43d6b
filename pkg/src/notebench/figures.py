"""Matplotlib figure rendering for the cohort report.

Figures are written next to the delimited tables.  PNG metadata is
stripped so that identical reports produce byte-identical images.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_SAVE_KWARGS = {"format": "png", "dpi": 120, "metadata": {"Software": None}}


def _save(fig, path: Path) -> Path:
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)
    return path


def concordance_figure(report, path: Path) -> Path:
    """Bar chart of the three concordance proportions with CI whiskers."""
    estimates = [
        ("Top-1", report.top1),
        ("Top-4", report.top4),
        ("Plan", report.plan),
    ]
    labels = [name for name, _ in estimates]
    points = [est.point * 100 for _, est in estimates]
    err_low = [(est.point - est.ci_low) * 100 for _, est in estimates]
    err_high = [(est.ci_high - est.point) * 100 for _, est in estimates]

    fig, ax = plt.subplots(figsize=(5.5, 3.8))
    ax.bar(labels, points, color="#4878b0", width=0.55)
    ax.errorbar(
        labels, points, yerr=[err_low, err_high], fmt="none", ecolor="#303030", capsize=5
    )
    for x, y in zip(labels, points):
        ax.annotate(f"{y:.1f}%", (x, y), textcoords="offset points", xytext=(0, 6), ha="center")
    ax.set_ylim(0, 105)
    ax.set_ylabel("Concordant pairs (%)")
    ax.set_title("Concordance with exact binomial CIs")
    fig.tight_layout()
    return _save(fig, path)


def similarity_figure(report, path: Path) -> Path:
    """Means with SD whiskers for surface and per-provider semantic scores."""
    labels: list[str] = []
    means: list[float] = []
    sds: list[float] = []
    colors: list[str] = []
    for metric, summary in report.surface_means.items():
        labels.append(metric)
        means.append(summary.mean)
        sds.append(summary.sd)
        colors.append("#4878b0")
    for provider, summary in report.semantic_means.items():
        labels.append(provider)
        means.append(summary.mean)
        sds.append(summary.sd)
        colors.append("#6aa56a")

    fig, ax = plt.subplots(figsize=(6.5, 3.8))
    if labels:
        ax.bar(range(len(labels)), means, yerr=sds, color=colors, capsize=4, width=0.6)
        ax.set_xticks(range(len(labels)))
        ax.set_xticklabels(labels, rotation=20, ha="right")
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("Similarity")
    ax.set_title("Surface (blue) and semantic (green) similarity")
    fig.tight_layout()
    return _save(fig, path)


def strata_figure(report, path: Path) -> Path:
    """CSS similarity means and case shares per complexity stratum."""
    labels = [s.label.value for s in report.strata]
    means = [s.css_mean if s.css_mean is not None else 0.0 for s in report.strata]
    shares = [s.share * 100 for s in report.strata]

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(7.5, 3.5))
    ax1.bar(labels, means, color="#8268a8", width=0.55)
    ax1.set_ylim(0, 10)
    ax1.set_ylabel("CSS similarity (mean)")
    ax1.set_title("CSS by complexity")
    ax2.bar(labels, shares, color="#c2853f", width=0.55)
    ax2.set_ylim(0, 100)
    ax2.set_ylabel("Share of cases (%)")
    ax2.set_title("Stratum share")
    fig.tight_layout()
    return _save(fig, path)


def frequency_figure(report, path: Path, top_n: int = 20) -> Path:
    """Horizontal bars for the most frequent machine-note primary diagnoses."""
    rows = report.diagnosis_frequency[:top_n]
    labels = [label for label, _ in rows][::-1]
    counts = [count for _, count in rows][::-1]

    fig, ax = plt.subplots(figsize=(6.5, max(2.5, 0.3 * len(rows) + 1.2)))
    if rows:
        ax.barh(range(len(labels)), counts, color="#4878b0")
        ax.set_yticks(range(len(labels)))
        ax.set_yticklabels(labels, fontsize=8)
    ax.set_xlabel("Encounters")
    ax.set_title(f"Primary diagnoses (top {len(rows)})")
    fig.tight_layout()
    return _save(fig, path)


def render_report_figures(report, out_dir: str | Path) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return [
        concordance_figure(report, out_dir / "concordance.png"),
        similarity_figure(report, out_dir / "similarity.png"),
        strata_figure(report, out_dir / "strata.png"),
        frequency_figure(report, out_dir / "frequency.png"),
    ]
