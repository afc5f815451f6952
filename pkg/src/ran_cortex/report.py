"""Figure rendering for simulation and benchmark reports.

Figures land next to the delimited report output as PNG files. Rendering is
headless (Agg) and best-effort presentation: the JSON/JSONL reports stay the
canonical artifact.
"""

from __future__ import annotations

from collections import defaultdict
from typing import Iterable, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .bench import BenchReport
from .simulator import ExperimentReport

_POLICY_COLORS = {"stateless": "#9467bd", "augmented": "#2ca02c"}


def _recurrence_matrix(reports: Sequence[ExperimentReport], event_index: int,
                       kpi: str) -> np.ndarray:
    """(seeds, recurrences) KPI matrix for one event across seed runs."""
    rows = []
    for report in reports:
        event = report.recurrence_kpis[event_index]
        rows.append([rec[kpi] for rec in event["recurrences"]])
    width = max(len(r) for r in rows)
    return np.array([r + [0] * (width - len(r)) for r in rows], dtype=np.float64)


def render_experiment_figures(
    reports: Iterable[ExperimentReport], out_prefix: str
) -> list[str]:
    """Per-recurrence KPI comparison and per-seed totals; returns written paths."""
    by_policy: dict[str, list[ExperimentReport]] = defaultdict(list)
    for report in reports:
        by_policy[report.policy].append(report)
    for runs in by_policy.values():
        runs.sort(key=lambda r: r.seed)
    if not by_policy:
        return []
    written: list[str] = []
    sample = next(iter(by_policy.values()))[0]
    events = sample.recurrence_kpis

    for event_index, event in enumerate(events):
        kpi = (
            "sla_violations"
            if event["kind"] == "stadium_surge"
            else "handover_failures"
        )
        fig, (ax_rec, ax_tot) = plt.subplots(1, 2, figsize=(10, 4))
        for policy, runs in sorted(by_policy.items()):
            matrix = _recurrence_matrix(runs, event_index, kpi)
            recurrences = np.arange(1, matrix.shape[1] + 1)
            mean = matrix.mean(axis=0)
            ax_rec.plot(
                recurrences,
                mean,
                marker="o",
                label=policy,
                color=_POLICY_COLORS.get(policy),
            )
            if matrix.shape[0] > 1:
                ax_rec.fill_between(
                    recurrences,
                    matrix.min(axis=0),
                    matrix.max(axis=0),
                    alpha=0.15,
                    color=_POLICY_COLORS.get(policy),
                )
        ax_rec.set_xlabel("recurrence")
        ax_rec.set_ylabel(kpi.replace("_", " "))
        ax_rec.set_title(f"{event['kind']}: per-recurrence {kpi}")
        ax_rec.legend()
        ax_rec.grid(True, alpha=0.3)

        total_field = kpi
        if len(by_policy) == 2 and "stateless" in by_policy and "augmented" in by_policy:
            base = [getattr(r, total_field) for r in by_policy["stateless"]]
            aug = [getattr(r, total_field) for r in by_policy["augmented"]]
            lim = max(max(base, default=1), max(aug, default=1), 1)
            ax_tot.scatter(base, aug, alpha=0.7, color="#1f77b4")
            ax_tot.plot([0, lim], [0, lim], "k--", linewidth=1)
            ax_tot.set_xlabel(f"stateless {total_field}")
            ax_tot.set_ylabel(f"augmented {total_field}")
            ax_tot.set_title("per-seed totals (below the line = better)")
        else:
            for policy, runs in sorted(by_policy.items()):
                ax_tot.bar(
                    [f"s{r.seed}" for r in runs],
                    [getattr(r, total_field) for r in runs],
                    label=policy,
                    alpha=0.7,
                    color=_POLICY_COLORS.get(policy),
                )
            ax_tot.set_ylabel(total_field)
            ax_tot.legend()
        ax_tot.grid(True, alpha=0.3)
        fig.tight_layout()
        path = f"{out_prefix}_event{event_index}_{kpi}.png"
        fig.savefig(path, dpi=150)
        plt.close(fig)
        written.append(path)
    return written


def render_bench_figure(report: BenchReport, path: str) -> str:
    """Latency histogram with percentile markers."""
    latencies = np.asarray(report.latencies_us, dtype=np.float64)
    fig, ax = plt.subplots(figsize=(7, 4))
    if latencies.size:
        upper = np.percentile(latencies, 99.5)
        ax.hist(latencies[latencies <= upper], bins=60, color="#1f77b4", alpha=0.8)
    for value, label, color in (
        (report.p50_us, "p50", "#2ca02c"),
        (report.p99_us, "p99", "#d62728"),
    ):
        ax.axvline(value, color=color, linestyle="--", linewidth=1.2)
        ax.text(value, ax.get_ylim()[1] * 0.9, f" {label}={value:.0f}us",
                color=color, fontsize=9)
    ax.set_xlabel("recall latency (us)")
    ax.set_ylabel("queries")
    ax.set_title(
        f"{report.mode} recall, n={report.store_size}, d={report.dim}, "
        f"k={report.k} (recall@k={report.recall_at_k:.3f})"
    )
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
