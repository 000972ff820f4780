# src/kernels/ranking.py
from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from datetime import datetime
from typing import Any, Mapping, Optional, Sequence

from ..trees.model import Tree
from .tree_kernels import KernelConfig, SimilarityScore, kernel

log = logging.getLogger(__name__)

# below this many candidates a worker pool costs more than it saves
MIN_PARALLEL_CANDIDATES = 16


@dataclass(frozen=True)
class RankedMatch:
    change_id: str
    rank: int
    kernel_score: SimilarityScore
    retrieval_score: float = 0.0
    label: Optional[Any] = None
    commit_hash: Optional[str] = None
    method_name: Optional[str] = None
    source_text: Optional[str] = None
    timestamp: Optional[datetime] = None
    paired_fix_id: Optional[str] = None

    @property
    def score(self) -> float:
        return self.kernel_score.value


def _score_chunk(query: Tree, chunk: list[tuple[str, Tree]], cfg: KernelConfig) -> list[tuple[str, float]]:
    return [(cid, kernel(query, tree, cfg).value) for cid, tree in chunk]


def _chunks(items: list, n: int) -> list[list]:
    size = max(1, -(-len(items) // n))
    return [items[i:i + size] for i in range(0, len(items), size)]


def resolve_threads(threads: int) -> int:
    """0 means one worker per CPU."""
    if threads < 0:
        raise ValueError("threads must be >= 0")
    return threads or (os.cpu_count() or 1)


def score_candidates(
    query: Tree, candidates: Sequence[tuple[str, Tree]], cfg: KernelConfig, threads: int = 1
) -> dict[str, float]:
    items = list(candidates)
    workers = min(resolve_threads(threads), len(items))
    if workers <= 1 or len(items) < MIN_PARALLEL_CANDIDATES:
        return dict(_score_chunk(query, items, cfg))
    log.debug({"kernel_workers": workers, "candidates": len(items)})
    scores: dict[str, float] = {}
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_score_chunk, query, chunk, cfg) for chunk in _chunks(items, workers)]
        for fut in futures:
            scores.update(fut.result())
    return scores


def _sort_key(cid: str, score: float, meta: Mapping[str, Any]):
    ts = meta.get("timestamp")
    recency = (0, -ts.timestamp()) if ts is not None else (1, 0.0)
    return (-score, -float(meta.get("retrieval_score") or 0.0), recency, cid)


def rank_candidates(
    query: Tree,
    candidates: Sequence[tuple[str, Tree]],
    cfg: Optional[KernelConfig] = None,
    metadata: Optional[Mapping[str, Mapping[str, Any]]] = None,
    threads: int = 1,
) -> list[RankedMatch]:
    """Rank candidates by kernel similarity to the query.

    Ties fall back to retrieval score, then recency, then id. Scores may be
    computed in worker processes; the final order is always decided here.
    """
    cfg = cfg or KernelConfig()
    metadata = metadata or {}
    if not candidates:
        return []
    ids = [cid for cid, _ in candidates]
    if len(set(ids)) != len(ids):
        raise ValueError("candidate ids must be unique")

    scores = score_candidates(query, candidates, cfg, threads)
    order = sorted(ids, key=lambda cid: _sort_key(cid, scores[cid], metadata.get(cid, {})))

    ranked = []
    for rank, cid in enumerate(order, start=1):
        meta = metadata.get(cid, {})
        ranked.append(
            RankedMatch(
                change_id=cid,
                rank=rank,
                kernel_score=SimilarityScore(scores[cid]),
                retrieval_score=float(meta.get("retrieval_score") or 0.0),
                label=meta.get("label"),
                commit_hash=meta.get("commit_hash"),
                method_name=meta.get("method_name"),
                source_text=meta.get("source_text"),
                timestamp=meta.get("timestamp"),
                paired_fix_id=meta.get("paired_fix_id"),
            )
        )
    return ranked
