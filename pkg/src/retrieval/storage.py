# src/retrieval/storage.py
"""KGIDX1 on-disk format: UTF-8 JSON lines.

    line 1      {"magic": "KGIDX1", "version": 1, "doc_count": N, "term_count": M, "fields": [...], ...extra}
    N lines     {"doc": {"ordinal", "doc_id", "text", "metadata", "field_lengths"}}
    M lines     {"field", "term", "postings": [[ordinal, tf], ...]}  sorted by field, term
"""
from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Optional

from ..utils import ensure_parents
from ..utils.errors import KernelGuardError
from .analysis import FIELDS
from .index import InvertedIndex, StoredDocument

log = logging.getLogger(__name__)

MAGIC = "KGIDX1"
VERSION = 1
_RESERVED = {"magic", "version", "doc_count", "fields", "term_count"}


class IndexFormatError(KernelGuardError):
    def __init__(self, message: str, line_number: Optional[int] = None):
        where = f" (line {line_number})" if line_number is not None else ""
        super().__init__(f"{message}{where}")
        self.line_number = line_number


def write_index(idx: InvertedIndex, path: Path, extra: Optional[dict[str, Any]] = None) -> Path:
    extra = dict(extra or {})
    clash = _RESERVED & extra.keys()
    if clash:
        raise ValueError(f"header keys reserved: {sorted(clash)}")
    path = ensure_parents(Path(path))
    term_count = sum(len(idx.terms(fn)) for fn in FIELDS)
    header = {
        "magic": MAGIC, "version": VERSION, "doc_count": len(idx), "fields": list(FIELDS),
        "term_count": term_count, **extra,
    }
    with open(path, "w", encoding="utf-8") as f:
        f.write(json.dumps(header, sort_keys=True) + "\n")
        for doc in idx.documents():
            payload = {
                "ordinal": doc.ordinal,
                "doc_id": doc.doc_id,
                "text": doc.text,
                "metadata": doc.metadata,
                "field_lengths": doc.field_lengths,
            }
            f.write(json.dumps({"doc": payload}, sort_keys=True) + "\n")
        for field_name in FIELDS:
            for term in idx.terms(field_name):
                plist = [[o, tf] for o, tf in idx.postings(field_name, term)]
                f.write(json.dumps({"field": field_name, "term": term, "postings": plist}, sort_keys=True) + "\n")
    log.info({"wrote": str(path), "docs": len(idx)})
    return path


def _load_line(raw: str, line_number: int) -> dict:
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as e:
        raise IndexFormatError(f"invalid JSON: {e.msg}", line_number) from e
    if not isinstance(obj, dict):
        raise IndexFormatError("expected a JSON object", line_number)
    return obj


def read_index(path: Path) -> tuple[InvertedIndex, dict[str, Any]]:
    """Load an index file; returns the index and the header's extra keys."""
    path = Path(path)
    with open(path, encoding="utf-8") as f:
        lines = f.read().splitlines()
    if not lines:
        raise IndexFormatError("empty index file", 1)

    header = _load_line(lines[0], 1)
    if header.get("magic") != MAGIC:
        raise IndexFormatError(f"bad magic {header.get('magic')!r}, expected {MAGIC}", 1)
    if header.get("version") != VERSION:
        raise IndexFormatError(f"unsupported version {header.get('version')!r}", 1)
    if header.get("fields") != list(FIELDS):
        raise IndexFormatError(f"unexpected fields {header.get('fields')!r}", 1)
    doc_count = header.get("doc_count")
    if not isinstance(doc_count, int) or doc_count < 0:
        raise IndexFormatError("doc_count missing or negative", 1)
    if len(lines) < 1 + doc_count:
        raise IndexFormatError(f"truncated: header announces {doc_count} documents, file has {len(lines) - 1} lines")

    term_count = header.get("term_count")
    if not isinstance(term_count, int) or term_count < 0:
        raise IndexFormatError("term_count missing or negative", 1)

    idx = InvertedIndex()
    for n in range(2, 2 + doc_count):
        obj = _load_line(lines[n - 1], n)
        try:
            d = obj["doc"]
            doc = StoredDocument(
                ordinal=int(d["ordinal"]),
                doc_id=str(d["doc_id"]),
                text=str(d["text"]),
                metadata=dict(d.get("metadata") or {}),
                field_lengths={k: int(v) for k, v in d["field_lengths"].items()},
            )
            idx._restore_document(doc)
        except (KeyError, TypeError, ValueError, AttributeError) as e:
            raise IndexFormatError(f"bad document record: {e}", n) from e

    restored = 0
    for n in range(2 + doc_count, len(lines) + 1):
        raw = lines[n - 1]
        if not raw.strip():
            continue
        obj = _load_line(raw, n)
        try:
            plist = [(int(o), int(tf)) for o, tf in obj["postings"]]
            idx._restore_postings(str(obj["field"]), str(obj["term"]), plist)
            restored += 1
        except (KeyError, TypeError, ValueError) as e:
            raise IndexFormatError(f"bad postings record: {e}", n) from e

    if restored != term_count:
        raise IndexFormatError(f"truncated: header announces {term_count} postings lists, file has {restored}")

    extra = {k: v for k, v in header.items() if k not in _RESERVED}
    log.info({"read": str(path), "docs": len(idx)})
    return idx, extra
