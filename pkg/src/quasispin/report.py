"""Figure rendering for comparison reports.

Renders alongside the CSV/JSON outputs when a plots directory is
configured: engine-by-engine correlators at the final checkpoint,
Monte Carlo z-scores, and (for multi-checkpoint runs) correlator time
series. Uses the Agg backend so headless runs work.
"""

from __future__ import annotations

import math
from pathlib import Path


def _plt():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _finite(value):
    return value is not None and math.isfinite(value)


def render_figures(report, plots_dir) -> list[str]:
    """Write the report's figures into plots_dir, returning the paths."""
    plt = _plt()
    out_dir = Path(plots_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[str] = []

    final_time = report.rows[-1].time if report.rows else 0.0
    final_rows = [r for r in report.rows if r.time == final_time]

    # final-checkpoint correlators, engine by engine
    fig, ax = plt.subplots(figsize=(max(6.0, 0.55 * len(final_rows)), 4.0))
    idx = range(len(final_rows))
    width = 0.27
    if any(_finite(r.oracle) for r in final_rows):
        ax.bar(
            [i - width for i in idx],
            [r.oracle if _finite(r.oracle) else 0.0 for r in final_rows],
            width,
            label="oracle",
        )
    if any(_finite(r.quasi) for r in final_rows):
        ax.bar(
            list(idx),
            [r.quasi if _finite(r.quasi) else 0.0 for r in final_rows],
            width,
            label="quasi",
        )
    if any(_finite(r.lrhv_mean) for r in final_rows):
        ax.errorbar(
            [i + width for i in idx],
            [r.lrhv_mean if _finite(r.lrhv_mean) else 0.0 for r in final_rows],
            yerr=[
                5.0 * r.lrhv_std_error if _finite(r.lrhv_std_error) else 0.0
                for r in final_rows
            ],
            fmt="o",
            color="black",
            capsize=3,
            label="lrhv (5 sigma)",
        )
    ax.set_xticks(list(idx))
    ax.set_xticklabels([r.spec_id for r in final_rows], rotation=45, ha="right")
    ax.set_ylabel("correlator")
    ax.set_title(f"final checkpoint (t = {final_time:g})")
    ax.axhline(0.0, color="gray", linewidth=0.6)
    ax.legend()
    fig.tight_layout()
    path = out_dir / "correlators.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(str(path))

    # z-scores across all checkpoints
    zs = [(i, r.z_score) for i, r in enumerate(report.rows) if _finite(r.z_score)]
    if zs:
        fig, ax = plt.subplots(figsize=(max(6.0, 0.1 * len(report.rows)), 3.2))
        ax.plot([i for i, _ in zs], [abs(z) for _, z in zs], ".", markersize=4)
        ax.axhline(3.0, color="orange", linewidth=0.8, label="3 sigma")
        ax.axhline(5.0, color="red", linewidth=0.8, label="5 sigma")
        ax.set_xlabel("row")
        ax.set_ylabel("|z|")
        ax.set_title("Monte Carlo vs reference")
        ax.legend()
        fig.tight_layout()
        path = out_dir / "zscores.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(str(path))

    # time series when the run has more than one checkpoint
    times = sorted({r.time for r in report.rows})
    if len(times) > 1:
        by_spec: dict[str, list] = {}
        for r in report.rows:
            by_spec.setdefault(r.spec_id, []).append(r)
        fig, ax = plt.subplots(figsize=(7.0, 4.2))
        for spec_id, rows in by_spec.items():
            rows = sorted(rows, key=lambda r: r.time)
            ts = [r.time for r in rows]
            if any(_finite(r.lrhv_mean) for r in rows):
                means = [r.lrhv_mean for r in rows]
                ax.plot(ts, means, "o-", markersize=3, label=f"{spec_id} lrhv")
            ref_key = "oracle" if any(_finite(r.oracle) for r in rows) else "quasi"
            refs = [getattr(r, ref_key) for r in rows]
            if any(_finite(v) for v in refs):
                ax.plot(ts, refs, "--", linewidth=0.9, label=f"{spec_id} {ref_key}")
        ax.set_xlabel("time")
        ax.set_ylabel("correlator")
        ax.set_title("correlators along the schedule")
        if len(by_spec) <= 8:
            ax.legend(fontsize=8)
        fig.tight_layout()
        path = out_dir / "timeseries.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(str(path))

    return written
