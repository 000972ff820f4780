# src/evaluation/clone_eval.py
"""Clone-detection harness: rank in-scope methods by kernel similarity, score P@10 and MAP per group."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional, Sequence

from ..ingest.clonebench import (
    MIN_CLONE_LINES,
    TYPEWISE_CLONE_TYPES,
    CloneBenchEntry,
    CloneGroundTruth,
    CloneType,
    filter_min_lines,
)
from ..kernels.ranking import rank_candidates
from ..kernels.tree_kernels import KernelConfig
from ..utils.errors import KernelGuardError
from .metrics import MetricsReport, RankedList, mean_average_precision, precision_at_k

log = logging.getLogger(__name__)

CLONE_PRECISION_K = 10


class InsufficientEntries(KernelGuardError):
    pass


class CloneScope(str, Enum):
    FUNCTIONALITY = "functionality"
    PROJECT = "project"
    TYPE = "type"

    @classmethod
    def parse(cls, value: "CloneScope | str") -> "CloneScope":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise InsufficientEntries(f"unknown clone scope {value!r} (expected functionality, project or type)") from None


@dataclass(frozen=True)
class CloneEvalResult:
    scope: CloneScope
    groups: dict[str, MetricsReport] = field(default_factory=dict)
    overall: Optional[MetricsReport] = None


@dataclass
class _Query:
    entry: CloneBenchEntry
    candidates: list[CloneBenchEntry]
    relevant: set[str]


def _ranked_list(q: _Query, kernel_cfg: KernelConfig, threads: int) -> RankedList:
    ranked = rank_candidates(q.entry.ast, [(c.method_id, c.ast) for c in q.candidates], kernel_cfg, threads=threads)
    return RankedList.from_ranking(q.entry.method_id, [m.change_id for m in ranked], q.relevant)


def _score_group(name: str, queries: list[_Query], kernel_cfg: KernelConfig, threads: int) -> Optional[MetricsReport]:
    queries = [q for q in queries if q.relevant and q.candidates]
    if not queries:
        log.warning({"group": name, "skipped": "no query with a relevant candidate"})
        return None
    lists = [_ranked_list(q, kernel_cfg, threads) for q in queries]
    totals = {q.entry.method_id: len(q.relevant) for q in queries}
    report = MetricsReport(
        query_count=len(lists),
        precision_at_k={CLONE_PRECISION_K: precision_at_k(lists, CLONE_PRECISION_K)},
        map=mean_average_precision(lists, totals),
    )
    log.info({"group": name, "queries": report.query_count, "map": round(report.map, 4)})
    return report


def _pool_queries(
    pool: list[CloneBenchEntry], truth: CloneGroundTruth, types: Optional[Sequence[CloneType]] = None
) -> list[_Query]:
    """Each entry of the pool that occurs in a labelled pair inside the pool queries all the others."""
    ids = {e.method_id for e in pool}
    queries = []
    for e in pool:
        if not any(truth.lookup(e.method_id, o) is not None for o in ids if o != e.method_id):
            continue
        candidates = [c for c in pool if c.method_id != e.method_id]
        relevant = {c.method_id for c in candidates if truth.is_true_clone(e.method_id, c.method_id, types)}
        queries.append(_Query(e, candidates, relevant))
    return queries


def _group_by(entries: Iterable[CloneBenchEntry], key) -> dict[str, list[CloneBenchEntry]]:
    groups: dict[str, list[CloneBenchEntry]] = {}
    for e in entries:
        k = key(e)
        if k is not None:
            groups.setdefault(str(k), []).append(e)
    return dict(sorted(groups.items()))


def _type_queries(
    entries: list[CloneBenchEntry], truth: CloneGroundTruth, ctype: CloneType, types: Sequence[CloneType]
) -> list[_Query]:
    by_func = _group_by(entries, lambda e: e.functionality_id)
    other_types = [t for t in types if t is not ctype] + [t for t in CloneType if t not in types]
    queries = []
    for pool in by_func.values():
        ids = {e.method_id for e in pool}
        for e in pool:
            relevant = truth.true_clones_of(e.method_id, [ctype]) & ids
            if not relevant:
                continue
            excluded = truth.true_clones_of(e.method_id, other_types) - relevant
            candidates = [c for c in pool if c.method_id != e.method_id and c.method_id not in excluded]
            queries.append(_Query(e, candidates, relevant))
    return queries


def _overall(groups: dict[str, MetricsReport]) -> Optional[MetricsReport]:
    if not groups:
        return None
    reports = list(groups.values())
    return MetricsReport(
        query_count=sum(r.query_count for r in reports),
        precision_at_k={CLONE_PRECISION_K: sum(r.precision_at_k[CLONE_PRECISION_K] for r in reports) / len(reports)},
        map=sum(r.map for r in reports) / len(reports),
    )


def run_clone_eval(
    entries: Sequence[CloneBenchEntry],
    ground_truth: CloneGroundTruth,
    kernel_cfg: Optional[KernelConfig] = None,
    scope: CloneScope | str = CloneScope.FUNCTIONALITY,
    min_lines: int = MIN_CLONE_LINES,
    clone_types: Sequence[CloneType] = TYPEWISE_CLONE_TYPES,
    threads: int = 1,
) -> CloneEvalResult:
    kernel_cfg = kernel_cfg or KernelConfig()
    scope = CloneScope.parse(scope)
    entries = [e for e in entries if e.ast is not None]

    if scope is CloneScope.TYPE:
        entries = filter_min_lines(entries, min_lines)
    if len(entries) < 2:
        raise InsufficientEntries(f"{len(entries)} entries in scope, need at least 2")

    groups: dict[str, MetricsReport] = {}
    if scope is CloneScope.TYPE:
        types = [CloneType.parse(t) for t in clone_types]
        for ctype in types:
            report = _score_group(ctype.value, _type_queries(entries, ground_truth, ctype, types), kernel_cfg, threads)
            if report is not None:
                groups[ctype.value] = report
    else:
        key = (lambda e: e.functionality_id) if scope is CloneScope.FUNCTIONALITY else (lambda e: e.project)
        for name, pool in _group_by(entries, key).items():
            if len(pool) < 2:
                log.warning({"group": name, "skipped": f"{len(pool)} entry in scope"})
                continue
            report = _score_group(name, _pool_queries(pool, ground_truth), kernel_cfg, threads)
            if report is not None:
                groups[name] = report

    if not groups:
        raise InsufficientEntries(f"no {scope.value} group had a query with a relevant candidate")
    return CloneEvalResult(scope, groups, _overall(groups))
