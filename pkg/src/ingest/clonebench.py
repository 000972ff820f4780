# src/ingest/clonebench.py
"""Clone benchmark reader.

Layout::

    <root>/functionality_<id>/<method_id>.java   method source
    <root>/functionality_<id>/<method_id>.sexpr  optional stored AST
    <root>/pairs.csv                             id1,id2,is_true,clone_type
    <root>/methods.csv                           optional method_id,project
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional

import pandas as pd

from ..corpus.errors import DanglingReference, MalformedRecord
from ..trees.model import Tree
from ..trees.java import source_to_tree
from ..trees.sexpr import parse_sexpr
from ..utils.errors import KernelGuardError

log = logging.getLogger(__name__)

MIN_CLONE_LINES = 6
_FUNC_DIR_RE = re.compile(r"^functionality_(\d+)$")
_TRUE_VALUES = {"true", "1", "yes", "t", "y"}
_FALSE_VALUES = {"false", "0", "no", "f", "n"}


class CloneType(str, Enum):
    T1 = "T1"
    T2 = "T2"
    VST3 = "VST3"
    ST3 = "ST3"
    MT3 = "MT3"
    WT3T4 = "WT3T4"

    @classmethod
    def parse(cls, value: "CloneType | str") -> "CloneType":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().upper())
        except ValueError:
            raise MalformedRecord(f"unknown clone type {value!r}") from None


TYPEWISE_CLONE_TYPES = (CloneType.T1, CloneType.T2, CloneType.VST3, CloneType.ST3)


def count_lines(source_text: str) -> int:
    return sum(1 for line in source_text.splitlines() if line.strip())


@dataclass(frozen=True)
class CloneBenchEntry:
    functionality_id: int
    method_id: str
    source_text: str
    line_count: int = 0
    project: Optional[str] = None
    ast: Optional[Tree] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not self.line_count:
            object.__setattr__(self, "line_count", max(1, count_lines(self.source_text)))


@dataclass(frozen=True)
class CloneTruth:
    is_true: bool
    clone_type: Optional[CloneType] = None


class CloneGroundTruth:
    """Unordered pair -> CloneTruth."""

    def __init__(self, pairs: Optional[dict[tuple[str, str], CloneTruth]] = None):
        self._pairs: dict[tuple[str, str], CloneTruth] = {}
        self._true_by_id: dict[str, dict[str, CloneTruth]] = {}
        for (a, b), truth in (pairs or {}).items():
            self.add(a, b, truth)

    @staticmethod
    def key(a: str, b: str) -> tuple[str, str]:
        return (a, b) if a <= b else (b, a)

    def add(self, a: str, b: str, truth: CloneTruth) -> None:
        """Record a pair; a later label for the same pair replaces the earlier one."""
        self._pairs[self.key(a, b)] = truth
        if truth.is_true:
            self._true_by_id.setdefault(a, {})[b] = truth
            self._true_by_id.setdefault(b, {})[a] = truth
        else:
            self._true_by_id.get(a, {}).pop(b, None)
            self._true_by_id.get(b, {}).pop(a, None)

    def lookup(self, a: str, b: str) -> Optional[CloneTruth]:
        return self._pairs.get(self.key(a, b))

    def is_true_clone(self, a: str, b: str, types: Optional[Iterable[CloneType]] = None) -> bool:
        truth = self.lookup(a, b)
        if truth is None or not truth.is_true:
            return False
        return types is None or truth.clone_type in set(types)

    def true_clones_of(self, method_id: str, types: Optional[Iterable[CloneType]] = None) -> set[str]:
        wanted = set(types) if types is not None else None
        return {
            other for other, truth in self._true_by_id.get(method_id, {}).items()
            if wanted is None or truth.clone_type in wanted
        }

    def ids(self) -> set[str]:
        return {m for pair in self._pairs for m in pair}

    def items(self):
        return self._pairs.items()

    def __len__(self) -> int:
        return len(self._pairs)


def _parse_flag(value: str, line_number: int) -> bool:
    v = str(value).strip().lower()
    if v in _TRUE_VALUES:
        return True
    if v in _FALSE_VALUES:
        return False
    raise MalformedRecord(f"is_true must be a boolean, got {value!r}", line_number)


def _entry_tree(java_path: Path, source: str) -> Optional[Tree]:
    sexpr_path = java_path.with_suffix(".sexpr")
    try:
        if sexpr_path.exists():
            return parse_sexpr(sexpr_path.read_text(encoding="utf-8").strip())
        return source_to_tree(source)
    except KernelGuardError as e:
        log.warning({"skipped_method": java_path.stem, "error": str(e)})
        return None


def ingest_clonebench(path: Path) -> tuple[list[CloneBenchEntry], CloneGroundTruth]:
    root = Path(path)
    if not root.is_dir():
        raise FileNotFoundError(f"clone bench directory not found: {root}")

    projects: dict[str, str] = {}
    methods_csv = root / "methods.csv"
    if methods_csv.exists():
        mdf = pd.read_csv(methods_csv, dtype=str, keep_default_na=False)
        if not {"method_id", "project"} <= set(mdf.columns):
            raise MalformedRecord("methods.csv needs method_id and project columns", 1)
        projects = dict(zip(mdf["method_id"].str.strip(), mdf["project"].str.strip()))

    entries: list[CloneBenchEntry] = []
    known: set[str] = set()
    for func_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        m = _FUNC_DIR_RE.match(func_dir.name)
        if not m:
            continue
        fid = int(m.group(1))
        for java in sorted(func_dir.glob("*.java")):
            method_id = java.stem
            if method_id in known:
                raise MalformedRecord(f"method id {method_id!r} appears in more than one functionality")
            known.add(method_id)
            source = java.read_text(encoding="utf-8")
            tree = _entry_tree(java, source)
            if tree is None:
                continue
            entries.append(CloneBenchEntry(fid, method_id, source, project=projects.get(method_id), ast=tree))

    truth = CloneGroundTruth()
    pairs_csv = root / "pairs.csv"
    if not pairs_csv.exists():
        raise FileNotFoundError(f"pairs.csv not found under {root}")
    pdf = pd.read_csv(pairs_csv, dtype=str, keep_default_na=False)
    need = {"id1", "id2", "is_true"}
    if not need <= set(pdf.columns):
        raise MalformedRecord(f"pairs.csv needs columns {sorted(need)}", 1)
    if "clone_type" not in pdf.columns:
        pdf["clone_type"] = ""

    parsed = {e.method_id for e in entries}
    skipped_pairs = 0
    for line_number, row in enumerate(pdf.itertuples(index=False), start=2):
        a, b = row.id1.strip(), row.id2.strip()
        for mid in (a, b):
            if mid not in known:
                raise DanglingReference(f"pairs.csv line {line_number} references unknown method {mid!r}")
        if a not in parsed or b not in parsed:
            skipped_pairs += 1
            continue
        ctype = CloneType.parse(row.clone_type) if row.clone_type.strip() else None
        truth.add(a, b, CloneTruth(_parse_flag(row.is_true, line_number), ctype))

    log.info({"clonebench": str(root), "entries": len(entries), "pairs": len(truth), "skipped_pairs": skipped_pairs})
    return entries, truth


def filter_min_lines(entries: Iterable[CloneBenchEntry], min_lines: int = MIN_CLONE_LINES) -> list[CloneBenchEntry]:
    if min_lines < 1:
        raise ValueError("min_lines must be >= 1")
    return [e for e in entries if e.line_count >= min_lines]
