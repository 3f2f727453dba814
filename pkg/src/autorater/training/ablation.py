"""Model-comparison tables from repeated-experiment reports."""

from __future__ import annotations

import csv
import io

from autorater.training.harness import ExperimentReport

UNIMODAL_NAMES = {"parametric", "text", "image"}


def ablation_table(reports: list[ExperimentReport]) -> dict:
    """Comparison artifact: mean/std R^2 per model plus deltas against the
    best unimodal model, all on one score."""
    if len(reports) < 2:
        raise ValueError("need at least two reports to compare")
    scores = {r.score_name for r in reports}
    if len(scores) != 1:
        raise ValueError(f"reports mix scores: {sorted(scores)}")
    unimodal = [r for r in reports if r.model_name in UNIMODAL_NAMES]
    best_unimodal = max((r.mean_r2 for r in unimodal), default=None)
    rows = []
    for r in reports:
        rows.append(
            {
                "model": r.model_name,
                "score": r.score_name,
                "mean_r2": r.mean_r2,
                "std_r2": r.std_r2,
                "stderr_r2": r.stderr_r2,
                "n_repeats": r.n_repeats,
                "delta_vs_best_unimodal": (r.mean_r2 - best_unimodal) if best_unimodal is not None else None,
            }
        )
    return {"score": reports[0].score_name, "best_unimodal_mean_r2": best_unimodal, "rows": rows}


def ablation_to_csv(table: dict) -> str:
    buf = io.StringIO()
    fields = ["model", "score", "mean_r2", "std_r2", "stderr_r2", "n_repeats", "delta_vs_best_unimodal"]
    writer = csv.DictWriter(buf, fieldnames=fields)
    writer.writeheader()
    for row in table["rows"]:
        writer.writerow(row)
    return buf.getvalue()
