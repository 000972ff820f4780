# src/evaluation/tables.py
from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Mapping, Optional

import pandas as pd

from ..utils import ensure_parents
from .metrics import MetricsReport, summarize

log = logging.getLogger(__name__)

DEFECT_COLUMNS = ["K=1", "K=5", "MRR", "Accuracy", "F-score"]
CLONE_COLUMNS = ["P@10", "MAP"]


def _defect_row(r: MetricsReport) -> dict:
    topk = r.topk_accuracy or {}
    return {"K=1": topk.get(1), "K=5": topk.get(5), "MRR": r.mrr, "Accuracy": r.accuracy, "F-score": r.f_score}


def _clone_row(r: MetricsReport) -> dict:
    return {"P@10": (r.precision_at_k or {}).get(10), "MAP": r.map}


def metrics_frame(reports: Mapping[str, MetricsReport], mode: str = "defects", with_mean: bool = True) -> pd.DataFrame:
    """One row per group (project, functionality, clone type) plus an optional mean row."""
    if mode not in ("defects", "clones"):
        raise ValueError(f"unknown mode {mode!r}")
    columns = DEFECT_COLUMNS if mode == "defects" else CLONE_COLUMNS
    row = _defect_row if mode == "defects" else _clone_row
    df = pd.DataFrame(
        [{**row(r), "queries": r.query_count} for r in reports.values()],
        index=pd.Index(list(reports.keys()), name="group"),
        columns=columns + ["queries"],
    )
    if with_mean and len(df) > 1:
        mean = df[columns].mean(numeric_only=True).to_frame().T
        mean.index = pd.Index(["mean"], name="group")
        mean["queries"] = df["queries"].sum()
        df = pd.concat([df, mean])
    return df


def summary_frame(reports: Mapping[str, MetricsReport], metric: str = "MAP", mode: str = "clones") -> pd.DataFrame:
    """Min / quartiles / mean / max of one column across groups."""
    df = metrics_frame(reports, mode, with_mean=False)
    values = df[metric].dropna().astype(float)
    return pd.DataFrame([summarize(values)], index=pd.Index([metric], name="metric"))


def format_table(df: pd.DataFrame) -> str:
    return df.to_string(float_format=lambda v: f"{v:.2f}", na_rep="-")


def metrics_json(reports: Mapping[str, MetricsReport], details: Optional[Mapping[str, dict]] = None) -> dict:
    """Keyed by group; ``details`` adds per-group fields such as confusion counts."""
    details = details or {}
    return {name: {**r.to_dict(), **details.get(name, {})} for name, r in reports.items()}


def write_metrics_json(
    reports: Mapping[str, MetricsReport], path: Path, details: Optional[Mapping[str, dict]] = None
) -> Path:
    path = ensure_parents(Path(path))
    path.write_text(json.dumps(metrics_json(reports, details), indent=2, sort_keys=True), encoding="utf-8")
    log.info({"wrote": str(path), "groups": len(reports)})
    return path
