# src/retrieval/analysis.py
"""Standard tokenizer plus the two index-time analyzers (word shingles and edge n-grams)."""
from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field

from nltk.util import everygrams

SHINGLE_MIN, SHINGLE_MAX = 2, 3
EDGE_MIN, EDGE_MAX = 1, 20

SHINGLE_FIELD = "shingle"
EDGEGRAM_FIELD = "edgegram"
FIELDS = (SHINGLE_FIELD, EDGEGRAM_FIELD)

_WORD_RE = re.compile(r"\w+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Lowercased runs of letters, digits and underscores; everything else separates."""
    return _WORD_RE.findall(text.lower()) if text else []


def shingles(tokens: list[str], min_size: int = SHINGLE_MIN, max_size: int = SHINGLE_MAX) -> Counter:
    if min_size < 2 or max_size < min_size:
        raise ValueError(f"bad shingle sizes {min_size}..{max_size}")
    if len(tokens) < min_size:
        return Counter()
    return Counter(" ".join(g) for g in everygrams(tokens, min_len=min_size, max_len=max_size))


def edge_ngrams(tokens: list[str], min_gram: int = EDGE_MIN, max_gram: int = EDGE_MAX) -> Counter:
    if min_gram < 1 or max_gram < min_gram:
        raise ValueError(f"bad gram sizes {min_gram}..{max_gram}")
    grams: Counter = Counter()
    for tok in tokens:
        for k in range(min_gram, min(max_gram, len(tok)) + 1):
            grams[tok[:k]] += 1
    return grams


def length_norm(field_length: int) -> float:
    """Divisor applied to a document's matches in one field; empty fields count as length 1."""
    return math.sqrt(max(1, field_length))


@dataclass(frozen=True)
class AnalyzedDocument:
    doc_id: str
    shingle_terms: Counter = field(default_factory=Counter)
    edgegram_terms: Counter = field(default_factory=Counter)

    @classmethod
    def from_text(cls, doc_id: str, text: str) -> "AnalyzedDocument":
        tokens = tokenize(text)
        return cls(doc_id, shingles(tokens), edge_ngrams(tokens))

    def terms(self, field_name: str) -> Counter:
        if field_name == SHINGLE_FIELD:
            return self.shingle_terms
        if field_name == EDGEGRAM_FIELD:
            return self.edgegram_terms
        raise KeyError(field_name)

    @property
    def field_lengths(self) -> dict[str, int]:
        return {f: sum(self.terms(f).values()) for f in FIELDS}
