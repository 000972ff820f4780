# src/retrieval/index.py
"""Append-only two-field inverted index and a more-like-this query.

Documents get internal ordinals in insertion order; postings are (ordinal, tf)
lists sorted by ordinal. Every read accepts a ``cutoff``: only ordinals below it
are visible, which lets time snapshots share one index as prefixes of it.
"""
from __future__ import annotations

import heapq
import logging
import math
from bisect import bisect_left
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Optional

from ..utils.errors import KernelGuardError
from .analysis import FIELDS, AnalyzedDocument, length_norm

log = logging.getLogger(__name__)

DEFAULT_CANDIDATE_LIMIT = 100
MAX_QUERY_TERMS = 25


class DuplicateDocId(KernelGuardError):
    def __init__(self, doc_id: str):
        super().__init__(f"document {doc_id!r} is already indexed")
        self.doc_id = doc_id


@dataclass(frozen=True)
class StoredDocument:
    ordinal: int
    doc_id: str
    text: str
    metadata: dict[str, Any] = field(default_factory=dict)
    field_lengths: dict[str, int] = field(default_factory=dict)

    @cached_property
    def length_norms(self) -> dict[str, float]:
        return {f: length_norm(n) for f, n in self.field_lengths.items()}


@dataclass(frozen=True)
class CandidateSet:
    entries: tuple[tuple[str, float], ...] = ()
    limit: int = DEFAULT_CANDIDATE_LIMIT

    def __post_init__(self):
        if self.limit < 1:
            raise ValueError("limit must be positive")
        if len(self.entries) > self.limit:
            raise ValueError("more entries than the limit")

    @property
    def ids(self) -> list[str]:
        return [doc_id for doc_id, _ in self.entries]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


class InvertedIndex:
    def __init__(self):
        self._postings: dict[str, dict[str, list[tuple[int, int]]]] = {f: defaultdict(list) for f in FIELDS}
        self._docs: list[StoredDocument] = []
        self._ordinals: dict[str, int] = {}

    # ---------- views ----------
    def _limit(self, cutoff: Optional[int]) -> int:
        n = len(self._docs)
        return n if cutoff is None else max(0, min(cutoff, n))

    def doc_count(self, cutoff: Optional[int] = None) -> int:
        return self._limit(cutoff)

    def postings(self, field_name: str, term: str, cutoff: Optional[int] = None) -> list[tuple[int, int]]:
        plist = self._postings[field_name].get(term)
        if not plist:
            return []
        end = self._limit(cutoff)
        if end >= len(self._docs):
            return plist
        return plist[: bisect_left(plist, (end,))]

    def doc_freq(self, field_name: str, term: str, cutoff: Optional[int] = None) -> int:
        plist = self._postings[field_name].get(term)
        if not plist:
            return 0
        return bisect_left(plist, (self._limit(cutoff),))

    def terms(self, field_name: str) -> list[str]:
        return sorted(self._postings[field_name])

    # ---------- documents ----------
    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._ordinals

    def __len__(self) -> int:
        return len(self._docs)

    def ordinal(self, doc_id: str) -> int:
        return self._ordinals[doc_id]

    def document(self, key: str | int) -> StoredDocument:
        return self._docs[key] if isinstance(key, int) else self._docs[self._ordinals[key]]

    def documents(self, cutoff: Optional[int] = None) -> list[StoredDocument]:
        return self._docs[: self._limit(cutoff)]

    def add(self, doc_id: str, text: str, metadata: Optional[dict[str, Any]] = None) -> int:
        if doc_id in self._ordinals:
            raise DuplicateDocId(doc_id)
        analyzed = AnalyzedDocument.from_text(doc_id, text)
        ordinal = len(self._docs)
        for f in FIELDS:
            for term, tf in analyzed.terms(f).items():
                self._postings[f][term].append((ordinal, tf))
        self._docs.append(StoredDocument(ordinal, doc_id, text, dict(metadata or {}), analyzed.field_lengths))
        self._ordinals[doc_id] = ordinal
        return ordinal

    # ---------- used by storage when loading ----------
    def _restore_document(self, doc: StoredDocument) -> None:
        if doc.ordinal != len(self._docs):
            raise ValueError(f"document ordinal {doc.ordinal} out of sequence")
        if doc.doc_id in self._ordinals:
            raise DuplicateDocId(doc.doc_id)
        self._docs.append(doc)
        self._ordinals[doc.doc_id] = doc.ordinal

    def _restore_postings(self, field_name: str, term: str, plist: list[tuple[int, int]]) -> None:
        if field_name not in self._postings:
            raise ValueError(f"unknown field {field_name!r}")
        ordinals = [o for o, _ in plist]
        if ordinals != sorted(set(ordinals)) or (ordinals and not 0 <= ordinals[0] <= ordinals[-1] < len(self._docs)):
            raise ValueError(f"postings for {field_name}:{term!r} unsorted or out of range")
        self._postings[field_name][term] = list(plist)


def index_add(idx: InvertedIndex, doc_id: str, text: str, metadata: Optional[dict[str, Any]] = None) -> InvertedIndex:
    idx.add(doc_id, text, metadata)
    return idx


def idf(doc_count: int, df: int) -> float:
    return math.log(1.0 + (doc_count - df + 0.5) / (df + 0.5))


def select_query_terms(
    idx: InvertedIndex, query: AnalyzedDocument, field_name: str,
    cutoff: Optional[int] = None, max_terms: int = MAX_QUERY_TERMS,
) -> list[tuple[str, float]]:
    """Top query terms of one field by tf*idf, as (term, idf); terms unseen in the view are skipped."""
    n = idx.doc_count(cutoff)
    weighted = []
    for term, tf in query.terms(field_name).items():
        df = idx.doc_freq(field_name, term, cutoff)
        if df == 0:
            # absent from the view: idf undefined and no posting could match
            continue
        term_idf = idf(n, df)
        weighted.append((-tf * term_idf, term, term_idf))
    weighted.sort()
    return [(term, term_idf) for _, term, term_idf in weighted[:max_terms]]


def more_like_this(
    idx: InvertedIndex, query_text: str, limit: int = DEFAULT_CANDIDATE_LIMIT,
    cutoff: Optional[int] = None, max_query_terms: int = MAX_QUERY_TERMS,
) -> CandidateSet:
    if limit < 1:
        raise ValueError("limit must be positive")
    if idx.doc_count(cutoff) == 0:
        return CandidateSet((), limit)

    query = AnalyzedDocument.from_text("<query>", query_text)
    field_scores: list[dict[int, float]] = []
    for f in FIELDS:
        acc: dict[int, float] = defaultdict(float)
        for term, term_idf in select_query_terms(idx, query, f, cutoff, max_query_terms):
            for ordinal, tf in idx.postings(f, term, cutoff):
                acc[ordinal] += tf * term_idf / idx.document(ordinal).length_norms[f]
        field_scores.append(acc)

    totals: dict[int, float] = defaultdict(float)
    for acc in field_scores:
        for ordinal, s in acc.items():
            totals[ordinal] += s

    scored = [(idx.document(o).doc_id, s) for o, s in totals.items() if s > 0]
    top = heapq.nsmallest(limit, scored, key=lambda e: (-e[1], e[0]))
    log.debug({"mlt_matched": len(scored), "returned": len(top), "cutoff": cutoff})
    return CandidateSet(tuple(top), limit)
