# src/models/classifier.py
"""Two-stage commit-time classification.

1. more-like-this retrieval over the snapshot (at most ``candidate_limit`` candidates)
2. tree-kernel re-ranking of those candidates against the query AST

The decision is a K-NN vote biased towards bugs: any BugInducing change among
the top k makes the query BugInducing, otherwise it is Clean.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from typing import Iterable, Optional

from ..corpus.records import ChangeLabel, ChangeRecord
from ..corpus.snapshots import IndexSnapshot, SnapshotSeries, snapshot_for
from ..kernels.ranking import RankedMatch, rank_candidates
from ..kernels.tree_kernels import KernelConfig
from ..retrieval.index import DEFAULT_CANDIDATE_LIMIT
from ..trees.java import source_to_tree
from ..trees.model import Tree
from ..utils.errors import ConfigError, KernelGuardError

log = logging.getLogger(__name__)


class MissingAst(KernelGuardError):
    pass


class MixedCommit(KernelGuardError):
    pass


class PredictedLabel(str, Enum):
    BUG_INDUCING = "BugInducing"
    CLEAN = "Clean"


@dataclass(frozen=True)
class ClassifierConfig:
    k: int = 1
    kernel_cfg: KernelConfig = field(default_factory=KernelConfig)
    candidate_limit: int = DEFAULT_CANDIDATE_LIMIT
    threads: int = 1

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if self.candidate_limit < 1:
            raise ConfigError(f"candidate limit must be >= 1, got {self.candidate_limit}")
        if self.k > self.candidate_limit:
            raise ConfigError(f"k ({self.k}) exceeds the candidate limit ({self.candidate_limit})")
        if self.threads < 0:
            raise ConfigError("threads must be >= 0")


@dataclass(frozen=True)
class ClassificationResult:
    query_change_id: str
    predicted_label: PredictedLabel
    matches: tuple[RankedMatch, ...] = ()
    suggested_fix: Optional[tuple[str, str]] = None
    k: int = 1
    method_name: Optional[str] = None
    commit_hash: Optional[str] = None
    timestamp: Optional[datetime] = None
    source_text: Optional[str] = None

    @property
    def flagged(self) -> bool:
        return self.predicted_label is PredictedLabel.BUG_INDUCING

    @property
    def top_k(self) -> tuple[RankedMatch, ...]:
        return self.matches[: self.k]

    @property
    def culprit(self) -> Optional[RankedMatch]:
        """The match that triggered the flag: first BugInducing change within the top k."""
        return next((m for m in self.top_k if m.label is ChangeLabel.BUG_INDUCING), None)


def biased_vote(matches: Iterable[RankedMatch], k: int) -> PredictedLabel:
    top = list(matches)[:k]
    if any(m.label is ChangeLabel.BUG_INDUCING for m in top):
        return PredictedLabel.BUG_INDUCING
    return PredictedLabel.CLEAN


def query_tree(query: ChangeRecord) -> Tree:
    if query.ast is not None:
        return query.ast
    try:
        return source_to_tree(query.source_text)
    except KernelGuardError as e:
        raise MissingAst(f"change {query.change_id!r} has no AST and its source does not parse: {e}") from e


def _suggest_fix(ranked_top: Iterable[RankedMatch], snapshot: IndexSnapshot) -> Optional[tuple[str, str]]:
    for m in ranked_top:
        if m.label is not ChangeLabel.BUG_INDUCING or not m.paired_fix_id:
            continue
        fix = snapshot.record(m.paired_fix_id)
        if fix is not None:
            return (fix.change_id, fix.source_text)
    return None


def classify(query: ChangeRecord, snapshot: IndexSnapshot, cfg: Optional[ClassifierConfig] = None) -> ClassificationResult:
    cfg = cfg or ClassifierConfig()
    tree = query_tree(query)
    base = dict(
        query_change_id=query.change_id,
        k=cfg.k,
        method_name=query.method_name,
        commit_hash=query.commit_hash,
        timestamp=query.timestamp,
        source_text=query.source_text,
    )

    hits = snapshot.more_like_this(query.source_text, cfg.candidate_limit)
    candidates: list[tuple[str, Tree]] = []
    metadata: dict[str, dict] = {}
    for doc_id, retrieval_score in hits:
        cand_tree = snapshot.tree(doc_id)
        if cand_tree is None:
            continue
        rec = snapshot.record(doc_id)
        candidates.append((doc_id, cand_tree))
        metadata[doc_id] = {**rec.ranking_metadata(), "retrieval_score": retrieval_score}

    if not candidates:
        return ClassificationResult(predicted_label=PredictedLabel.CLEAN, **base)

    ranked = rank_candidates(tree, candidates, cfg.kernel_cfg, metadata, threads=cfg.threads)
    label = biased_vote(ranked, cfg.k)
    fix = _suggest_fix(ranked[: cfg.k], snapshot) if label is PredictedLabel.BUG_INDUCING else None
    log.debug({"query": query.change_id, "candidates": len(ranked), "predicted": label.value})
    return ClassificationResult(predicted_label=label, matches=tuple(ranked), suggested_fix=fix, **base)


def classify_commit(
    methods: Iterable[ChangeRecord], series: SnapshotSeries, cfg: Optional[ClassifierConfig] = None
) -> list[ClassificationResult]:
    methods = list(methods)
    if not methods:
        return []
    hashes = {m.commit_hash for m in methods}
    if len(hashes) > 1:
        raise MixedCommit(f"methods belong to several commits: {sorted(hashes)}")
    stamps = {m.timestamp for m in methods}
    if len(stamps) > 1:
        raise MixedCommit("methods of one commit carry different timestamps")
    snapshot = snapshot_for(series, methods[0].timestamp)
    return [classify(m, snapshot, cfg) for m in methods]


def is_risky(results: Iterable[ClassificationResult]) -> bool:
    return any(r.flagged for r in results)
