# src/ingest/changes.py
"""Readers for method-level change corpora: the JSONL format and a Technical Debt dataset CSV export."""
from __future__ import annotations

import json
import logging
from dataclasses import replace
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Optional

import pandas as pd

from ..corpus.errors import MalformedRecord, UnknownLabel
from ..corpus.records import ChangeLabel, ChangeRecord, parse_timestamp
from ..trees.errors import SExprError, TreeTooDeep
from ..trees.sexpr import parse_sexpr

log = logging.getLogger(__name__)

JSONL_REQUIRED = ("change_id", "project", "commit_hash", "file_path", "method_name", "timestamp", "label", "source_text")
DROPPED_CHANGE_TYPES = {"delete", "deleted", "deletion", "refactoring"}

# ---------- Technical Debt export columns ----------
TD_COLUMNS = {
    "PROJECT_ID": "project",
    "COMMIT_HASH": "commit_hash",
    "FILE": "file_path",
    "METHOD_NAME": "method_name",
    "COMMITTER_DATE": "timestamp",
    "LABEL": "label",
    "SOURCE_CODE": "source_text",
}
TD_OPTIONAL = ("CHANGE_TYPE", "AST", "FAULT_FIXING_COMMIT_HASH")
TD_LABELS = {
    "FAULT_INDUCING": ChangeLabel.BUG_INDUCING,
    "BUG_INDUCING": ChangeLabel.BUG_INDUCING,
    "FAULT_FIXING": ChangeLabel.BUG_FIXING,
    "BUG_FIXING": ChangeLabel.BUG_FIXING,
}
TD_DROPPED_LABELS = {"REFACTORING"}
TD_DROPPED_CHANGE_TYPES = {"DELETE", "REFACTORING", "RENAME"}


class ChangeFormat(str, Enum):
    JSONL = "jsonl"
    TD_CSV = "td-csv"

    @classmethod
    def parse(cls, value: "ChangeFormat | str") -> "ChangeFormat":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise MalformedRecord(f"unknown corpus format {value!r} (expected jsonl or td-csv)") from None


def _parse_ast(text: Optional[str], line_number: int):
    if text is None or not str(text).strip():
        return None
    try:
        return parse_sexpr(str(text))
    except (SExprError, TreeTooDeep) as e:
        raise MalformedRecord(f"bad ast: {e}", line_number) from e


def _record_from_object(obj: Any, line_number: int, require_label: bool = True) -> Optional[ChangeRecord]:
    if not isinstance(obj, dict):
        raise MalformedRecord("expected a JSON object", line_number)
    if str(obj.get("change_type") or "").strip().lower() in DROPPED_CHANGE_TYPES:
        return None
    required = JSONL_REQUIRED if require_label else tuple(k for k in JSONL_REQUIRED if k not in ("label", "change_id", "project"))
    missing = [k for k in required if obj.get(k) is None]
    if missing:
        raise MalformedRecord(f"missing field(s) {', '.join(missing)}", line_number)

    raw_label = obj.get("label")
    label = None
    if raw_label is not None:
        if str(raw_label).strip().lower() == "refactoring":
            return None
        label = ChangeLabel.parse(raw_label, line_number)

    commit_hash = str(obj["commit_hash"])
    file_path = str(obj["file_path"])
    method_name = str(obj["method_name"])
    change_id = obj.get("change_id") or f"{commit_hash}:{file_path}:{method_name}"
    return ChangeRecord(
        change_id=str(change_id),
        project=str(obj.get("project") or ""),
        commit_hash=commit_hash,
        file_path=file_path,
        method_name=method_name,
        timestamp=parse_timestamp(obj["timestamp"], line_number),
        label=label,
        source_text=str(obj["source_text"]),
        ast=_parse_ast(obj.get("ast"), line_number),
        paired_fix_id=obj.get("paired_fix_id") or None,
    )


def _iter_jsonl(path: Path, require_label: bool = True):
    with open(path, encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise MalformedRecord(f"invalid JSON: {e.msg}", line_number) from e
            yield line_number, _record_from_object(obj, line_number, require_label)


def _unique(records: Iterable[tuple[int, ChangeRecord]]) -> list[ChangeRecord]:
    seen: set[str] = set()
    out = []
    for line_number, r in records:
        if r.change_id in seen:
            raise MalformedRecord(f"duplicate change_id {r.change_id!r}", line_number)
        seen.add(r.change_id)
        out.append(r)
    return out


def _resolve_fix_links(records: list[ChangeRecord]) -> list[ChangeRecord]:
    """Drop paired_fix_id values that do not point at a BugFixing record of the same file."""
    by_id = {r.change_id: r for r in records}
    out = []
    for r in records:
        fix = by_id.get(r.paired_fix_id) if r.paired_fix_id else None
        if r.paired_fix_id and (fix is None or fix.label is not ChangeLabel.BUG_FIXING or fix.file_path != r.file_path):
            log.warning({"dropped_fix_link": r.change_id, "paired_fix_id": r.paired_fix_id})
            r = replace(r, paired_fix_id=None)
        out.append(r)
    return out


def read_jsonl_changes(path: Path) -> list[ChangeRecord]:
    kept = [(n, r) for n, r in _iter_jsonl(Path(path)) if r is not None]
    return _resolve_fix_links(_unique(kept))


def read_td_csv(path: Path) -> list[ChangeRecord]:
    df = pd.read_csv(path, dtype=str, keep_default_na=False)
    missing = [c for c in TD_COLUMNS if c not in df.columns]
    if missing:
        raise MalformedRecord(f"missing column(s) {', '.join(missing)}", 1)
    for c in TD_OPTIONAL:
        if c not in df.columns:
            df[c] = ""

    kept: list[tuple[int, ChangeRecord]] = []
    fix_commits: dict[str, str] = {}
    seen: set[str] = set()
    dropped = 0
    for row_number, row in enumerate(df.itertuples(index=False), start=2):
        row = row._asdict()
        label_raw = row["LABEL"].strip().upper()
        if (
            row["CHANGE_TYPE"].strip().upper() in TD_DROPPED_CHANGE_TYPES
            or label_raw in TD_DROPPED_LABELS
            or not row["FILE"].strip().lower().endswith(".java")
        ):
            dropped += 1
            continue
        if label_raw not in TD_LABELS:
            raise UnknownLabel(row["LABEL"], row_number)
        project, commit, file_path, method = (row[c].strip() for c in ("PROJECT_ID", "COMMIT_HASH", "FILE", "METHOD_NAME"))
        change_id = f"{project}:{commit}:{file_path}:{method}"
        if change_id in seen:
            log.warning({"duplicate_row": change_id, "row": row_number})
            dropped += 1
            continue
        seen.add(change_id)
        record = ChangeRecord(
            change_id=change_id,
            project=project,
            commit_hash=commit,
            file_path=file_path,
            method_name=method,
            timestamp=parse_timestamp(row["COMMITTER_DATE"], row_number),
            label=TD_LABELS[label_raw],
            source_text=row["SOURCE_CODE"],
            ast=_parse_ast(row["AST"], row_number),
        )
        kept.append((row_number, record))
        if row["FAULT_FIXING_COMMIT_HASH"].strip():
            fix_commits[change_id] = f"{project}:{row['FAULT_FIXING_COMMIT_HASH'].strip()}:{file_path}:{method}"

    records = []
    for _, r in kept:
        candidate = fix_commits.get(r.change_id)
        if candidate is not None and r.label is ChangeLabel.BUG_INDUCING and candidate in seen:
            r = replace(r, paired_fix_id=candidate)
        records.append(r)
    log.info({"td_rows": len(df), "kept": len(records), "dropped": dropped})
    return _resolve_fix_links(records)


def ingest_changes(path: Path, fmt: ChangeFormat | str = ChangeFormat.JSONL) -> list[ChangeRecord]:
    """Read a change corpus and return its records in timestamp order (file order breaks ties)."""
    fmt = ChangeFormat.parse(fmt)
    path = Path(path)
    records = read_jsonl_changes(path) if fmt is ChangeFormat.JSONL else read_td_csv(path)
    records.sort(key=lambda r: r.timestamp)
    log.info({"ingested": str(path), "format": fmt.value, "records": len(records)})
    return records


def read_commit_payload(path: Path) -> list[ChangeRecord]:
    """Method-level changes of one pending commit; labels and change ids are optional here."""
    kept = [(n, r) for n, r in _iter_jsonl(Path(path), require_label=False) if r is not None]
    return _unique(kept)


def group_by_project(records: Iterable[ChangeRecord]) -> dict[str, list[ChangeRecord]]:
    groups: dict[str, list[ChangeRecord]] = {}
    for r in records:
        groups.setdefault(r.project, []).append(r)
    return groups
