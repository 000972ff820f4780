# src/evaluation/metrics.py
"""Ranked-retrieval and classification metrics.

Means are taken with math.fsum so that permuting queries never changes a value.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np
from sklearn.metrics import confusion_matrix

from ..utils.errors import KernelGuardError


class EmptyQuerySet(KernelGuardError):
    pass


@dataclass(frozen=True)
class RankedList:
    query_id: str
    entries: tuple[tuple[str, bool], ...] = ()

    @classmethod
    def from_ranking(cls, query_id: str, ranked_ids: Iterable[str], relevant: set[str]) -> "RankedList":
        return cls(query_id, tuple((i, i in relevant) for i in ranked_ids))

    @property
    def relevance(self) -> list[bool]:
        return [rel for _, rel in self.entries]

    def has_relevant(self) -> bool:
        return any(self.relevance)


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @classmethod
    def from_labels(cls, truth: Sequence[bool], predicted: Sequence[bool]) -> "ConfusionCounts":
        """Positive class = True (BugInducing)."""
        if len(truth) != len(predicted):
            raise ValueError("truth and predictions differ in length")
        if not truth:
            return cls()
        tn, fp, fn, tp = confusion_matrix(list(truth), list(predicted), labels=[False, True]).ravel()
        return cls(int(tp), int(fp), int(tn), int(fn))


@dataclass(frozen=True)
class MetricsReport:
    query_count: int
    precision_at_k: Optional[dict[int, float]] = None
    map: Optional[float] = None
    mrr: Optional[float] = None
    topk_accuracy: Optional[dict[int, float]] = None
    f_score: Optional[float] = None
    accuracy: Optional[float] = None

    def __post_init__(self):
        values = [self.map, self.mrr, self.f_score, self.accuracy]
        values += list((self.precision_at_k or {}).values()) + list((self.topk_accuracy or {}).values())
        for v in values:
            if v is not None and not -1e-12 <= v <= 1 + 1e-12:
                raise ValueError(f"metric value {v} outside [0, 1]")

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("precision_at_k", "topk_accuracy"):
            if d[key] is not None:
                d[key] = {str(k): v for k, v in d[key].items()}
        return d


def _mean(values: list[float]) -> float:
    return math.fsum(values) / len(values)


def _require(lists: Sequence) -> None:
    if not lists:
        raise EmptyQuerySet("no queries to evaluate")


def precision_at_k(lists: Sequence[RankedList], k: int) -> float:
    if k < 1:
        raise ValueError("k must be >= 1")
    _require(lists)
    return _mean([sum(lst.relevance[:k]) / k for lst in lists])


def average_precision(lst: RankedList, total_relevant: int) -> float:
    if total_relevant < 1:
        raise ValueError(f"query {lst.query_id!r} needs a positive relevant count")
    hits = 0
    precisions = []
    for i, rel in enumerate(lst.relevance, start=1):
        if rel:
            hits += 1
            precisions.append(hits / i)
    return math.fsum(precisions) / total_relevant


def mean_average_precision(lists: Sequence[RankedList], total_relevant: Mapping[str, int]) -> float:
    _require(lists)
    return _mean([average_precision(lst, total_relevant[lst.query_id]) for lst in lists])


def reciprocal_rank(lst: RankedList) -> float:
    for i, rel in enumerate(lst.relevance, start=1):
        if rel:
            return 1.0 / i
    return 0.0


def mean_reciprocal_rank(lists: Sequence[RankedList]) -> float:
    _require(lists)
    return _mean([reciprocal_rank(lst) for lst in lists])


def topk_accuracy(predictions: Sequence[tuple[object, object]], k: int = 1) -> float:
    """Share of queries whose k-biased prediction equals the ground truth; k only documents how predictions were made."""
    if k < 1:
        raise ValueError("k must be >= 1")
    _require(predictions)
    return sum(1 for truth, pred in predictions if truth == pred) / len(predictions)


def f_score_and_accuracy(counts: ConfusionCounts) -> tuple[float, float]:
    if counts.total == 0:
        raise EmptyQuerySet("confusion counts are all zero")
    precision = counts.tp / (counts.tp + counts.fp) if counts.tp + counts.fp else 0.0
    recall = counts.tp / (counts.tp + counts.fn) if counts.tp + counts.fn else 0.0
    f = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return f, (counts.tp + counts.tn) / counts.total


def summarize(values: Iterable[float]) -> dict[str, float]:
    """Five-number summary plus the mean."""
    arr = np.asarray(list(values), dtype=float)
    if arr.size == 0:
        raise EmptyQuerySet("nothing to summarize")
    q1, median, q3 = np.percentile(arr, [25, 50, 75])
    return {
        "min": float(arr.min()),
        "q1": float(q1),
        "median": float(median),
        "mean": float(arr.mean()),
        "q3": float(q3),
        "max": float(arr.max()),
    }
