"""Restyle report: per-level adherence distances as CSV plus a bar figure.

The CLI restyle path always writes the delimited table; the figure rides
along so a run can be eyeballed without loading the CSV.
"""
from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

REPORT_CSV = "restyle_report.csv"
REPORT_FIGURE = "restyle_report.png"


def write_restyle_report(out_dir, rows: list[dict]) -> tuple[Path, Path]:
    """rows: [{level, skip_steps, control_strength, latent_blend,
    mean_pixel_distance, artifact}] in resemblance order."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / REPORT_CSV
    fields = ["level", "skip_steps", "control_strength", "latent_blend",
              "mean_pixel_distance", "artifact"]
    with csv_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row[k] for k in fields})

    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    levels = [r["level"] for r in rows]
    dists = [r["mean_pixel_distance"] for r in rows]
    ax.bar(levels, dists, color="#4878a8")
    ax.set_ylabel("mean pixel distance to source")
    ax.set_xlabel("resemblance level")
    ax.set_title("stub-backend adherence by resemblance level")
    for i, d in enumerate(dists):
        ax.text(i, d, f"{d:.1f}", ha="center", va="bottom", fontsize=9)
    fig.tight_layout()
    fig_path = out / REPORT_FIGURE
    fig.savefig(fig_path, dpi=110)
    plt.close(fig)
    return csv_path, fig_path
