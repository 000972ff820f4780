# src/corpus/records.py
from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from typing import Any, Optional

import pandas as pd

from ..trees.model import Tree
from ..trees.sexpr import parse_sexpr
from .errors import MalformedRecord, UnknownLabel


class ChangeLabel(str, Enum):
    BUG_INDUCING = "bug_inducing"
    BUG_FIXING = "bug_fixing"

    @classmethod
    def parse(cls, value: "ChangeLabel | str", line_number: Optional[int] = None) -> "ChangeLabel":
        if isinstance(value, cls):
            return value
        norm = str(value).strip().lower().replace("-", "_").replace(" ", "_")
        aliases = {
            "bug_inducing": cls.BUG_INDUCING, "buginducing": cls.BUG_INDUCING,
            "fault_inducing": cls.BUG_INDUCING, "bug_fixing": cls.BUG_FIXING,
            "bugfixing": cls.BUG_FIXING, "fault_fixing": cls.BUG_FIXING,
        }
        if norm not in aliases:
            raise UnknownLabel(str(value), line_number)
        return aliases[norm]

    @property
    def display(self) -> str:
        return "BugInducing" if self is ChangeLabel.BUG_INDUCING else "BugFixing"


def parse_timestamp(value: Any, line_number: Optional[int] = None) -> datetime:
    """RFC 3339 (or anything pandas reads) to an aware UTC datetime; naive input is taken as UTC."""
    if isinstance(value, datetime):
        ts = pd.Timestamp(value)
    else:
        if value is None or (isinstance(value, str) and not value.strip()):
            raise MalformedRecord("missing timestamp", line_number)
        try:
            ts = pd.Timestamp(str(value).strip())
        except (ValueError, TypeError) as e:
            raise MalformedRecord(f"unparseable timestamp {value!r}", line_number) from e
    if ts is pd.NaT:
        raise MalformedRecord(f"unparseable timestamp {value!r}", line_number)
    ts = ts.tz_localize("UTC") if ts.tzinfo is None else ts.tz_convert("UTC")
    return ts.to_pydatetime()


@dataclass(frozen=True)
class ChangeRecord:
    change_id: str
    project: str
    commit_hash: str
    file_path: str
    method_name: str
    timestamp: datetime
    label: Optional[ChangeLabel]
    source_text: str
    ast: Optional[Tree] = None
    paired_fix_id: Optional[str] = None

    def __post_init__(self):
        if not self.change_id:
            raise MalformedRecord("empty change_id")
        if self.timestamp.tzinfo is None:
            object.__setattr__(self, "timestamp", self.timestamp.replace(tzinfo=timezone.utc))
        else:
            object.__setattr__(self, "timestamp", self.timestamp.astimezone(timezone.utc))
        if self.label is not None:
            # unlabeled records only come from commit payloads awaiting classification
            object.__setattr__(self, "label", ChangeLabel.parse(self.label))

    @property
    def is_buggy(self) -> bool:
        return self.label is ChangeLabel.BUG_INDUCING

    def to_metadata(self) -> dict[str, Any]:
        """JSON-ready fields stored alongside the indexed source text."""
        return {
            "project": self.project,
            "commit_hash": self.commit_hash,
            "file_path": self.file_path,
            "method_name": self.method_name,
            "timestamp": self.timestamp.isoformat(),
            "label": self.label.value if self.label is not None else None,
            "ast": self.ast.sexpr if self.ast is not None else None,
            "paired_fix_id": self.paired_fix_id,
        }

    @classmethod
    def from_metadata(cls, change_id: str, source_text: str, meta: dict[str, Any]) -> "ChangeRecord":
        try:
            return cls(
                change_id=change_id,
                project=str(meta["project"]),
                commit_hash=str(meta["commit_hash"]),
                file_path=str(meta["file_path"]),
                method_name=str(meta["method_name"]),
                timestamp=parse_timestamp(meta["timestamp"]),
                label=ChangeLabel.parse(meta["label"]) if meta["label"] is not None else None,
                source_text=source_text,
                ast=parse_sexpr(meta["ast"]) if meta.get("ast") else None,
                paired_fix_id=meta.get("paired_fix_id"),
            )
        except KeyError as e:
            raise MalformedRecord(f"stored record {change_id!r} lacks field {e.args[0]!r}") from e

    def ranking_metadata(self) -> dict[str, Any]:
        """Fields rank_candidates copies into each RankedMatch."""
        return {
            "timestamp": self.timestamp,
            "label": self.label,
            "commit_hash": self.commit_hash,
            "method_name": self.method_name,
            "source_text": self.source_text,
            "paired_fix_id": self.paired_fix_id,
        }
