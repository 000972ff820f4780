# src/evaluation/defect_eval.py
"""Time-aware defect-detection harness.

Every record of a project is replayed in timestamp order and classified
against the snapshot of strictly earlier records. The audit counter checks
that no ranked match was committed at or after its query.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Optional

from ..corpus.records import ChangeLabel, ChangeRecord
from ..corpus.snapshots import build_snapshots, snapshot_for
from ..ingest.changes import group_by_project
from ..models.classifier import ClassificationResult, ClassifierConfig, MissingAst, PredictedLabel, biased_vote, classify
from ..utils.errors import KernelGuardError
from .metrics import (
    ConfusionCounts,
    MetricsReport,
    RankedList,
    f_score_and_accuracy,
    mean_reciprocal_rank,
    topk_accuracy,
)

log = logging.getLogger(__name__)

TOPK_COLUMNS = (1, 5)


class InsufficientHistory(KernelGuardError):
    pass


@dataclass(frozen=True)
class DefectEvalResult:
    project: str
    report: MetricsReport
    confusion: ConfusionCounts
    time_travel_violations: int
    skipped_queries: int = 0


def _truth(label: ChangeLabel) -> PredictedLabel:
    return PredictedLabel.BUG_INDUCING if label is ChangeLabel.BUG_INDUCING else PredictedLabel.CLEAN


def _violations(query: ChangeRecord, result: ClassificationResult) -> int:
    return sum(1 for m in result.matches if m.timestamp is not None and m.timestamp >= query.timestamp)


def evaluate_project(
    project: str,
    records: list[ChangeRecord],
    cfg: ClassifierConfig,
    query_ids: Optional[set[str]] = None,
) -> DefectEvalResult:
    series = build_snapshots(records)
    if len(series) < 2:
        raise InsufficientHistory(f"project {project!r} spans {len(series)} month(s), need at least 2")

    lists: list[RankedList] = []
    topk: dict[int, list[tuple[PredictedLabel, PredictedLabel]]] = {k: [] for k in TOPK_COLUMNS}
    truth_flags: list[bool] = []
    pred_flags: list[bool] = []
    violations = 0
    skipped = 0

    for rec in series.records:
        if query_ids is not None and rec.change_id not in query_ids:
            continue
        snapshot = snapshot_for(series, rec.timestamp)
        try:
            result = classify(rec, snapshot, cfg)
        except MissingAst as e:
            log.warning({"skipped_query": rec.change_id, "error": str(e)})
            skipped += 1
            continue
        violations += _violations(rec, result)
        truth = _truth(rec.label)
        for k in TOPK_COLUMNS:
            topk[k].append((truth, biased_vote(result.matches, k)))
        lists.append(RankedList.from_ranking(
            rec.change_id,
            [m.change_id for m in result.matches],
            {m.change_id for m in result.matches if m.label is rec.label},
        ))
        truth_flags.append(truth is PredictedLabel.BUG_INDUCING)
        pred_flags.append(result.flagged)

    if not lists:
        raise InsufficientHistory(f"project {project!r} has no evaluable query")

    confusion = ConfusionCounts.from_labels(truth_flags, pred_flags)
    f_score, accuracy = f_score_and_accuracy(confusion)
    report = MetricsReport(
        query_count=len(lists),
        mrr=mean_reciprocal_rank(lists),
        topk_accuracy={k: topk_accuracy(topk[k], k) for k in TOPK_COLUMNS},
        f_score=f_score,
        accuracy=accuracy,
    )
    if violations:
        log.error({"project": project, "time_travel_violations": violations})
    log.info({"project": project, "queries": len(lists), "mrr": round(report.mrr, 4), "skipped": skipped})
    return DefectEvalResult(project, report, confusion, violations, skipped)


def run_defect_eval(
    records: Iterable[ChangeRecord],
    cfg: Optional[ClassifierConfig] = None,
    query_ids: Optional[Iterable[str]] = None,
    projects: Optional[Iterable[str]] = None,
    skip_insufficient: bool = False,
) -> dict[str, DefectEvalResult]:
    """Per-project replay. ``query_ids`` limits which records are classified; all records are still indexed."""
    cfg = cfg or ClassifierConfig()
    wanted = set(projects) if projects is not None else None
    qids = set(query_ids) if query_ids is not None else None

    results: dict[str, DefectEvalResult] = {}
    for project, recs in sorted(group_by_project(records).items()):
        if wanted is not None and project not in wanted:
            continue
        recs = sorted(recs, key=lambda r: r.timestamp)
        try:
            results[project] = evaluate_project(project, recs, cfg, qids)
        except InsufficientHistory as e:
            if not skip_insufficient:
                raise
            log.warning({"skipped_project": project, "reason": str(e)})
    if not results:
        raise InsufficientHistory("no project could be evaluated")
    return results
