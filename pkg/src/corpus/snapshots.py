# src/corpus/snapshots.py
"""Month-wise cumulative index snapshots.

A series owns one append-only index holding every record in timestamp order;
each snapshot is the prefix of it below a cutoff, so snapshot N+1 always
contains snapshot N.
"""
from __future__ import annotations

import logging
from bisect import bisect_left
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Iterator, Optional

import pandas as pd

from ..retrieval.index import DEFAULT_CANDIDATE_LIMIT, CandidateSet, InvertedIndex, more_like_this
from ..retrieval.storage import IndexFormatError, read_index, write_index
from ..trees.java import source_to_tree
from ..trees.model import Tree
from ..utils.errors import KernelGuardError
from .errors import EmptyCorpus, MalformedRecord, MixedProjects, UnsortedRecords
from .records import ChangeRecord, parse_timestamp

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TimePeriod:
    index: int  # 1-based
    start: datetime
    end: datetime

    def contains(self, t: datetime) -> bool:
        return self.start <= t < self.end


def month_periods(first: datetime, last: datetime) -> list[TimePeriod]:
    """Contiguous UTC calendar months covering [first, last]."""
    def month_of(t: datetime) -> pd.Period:
        return pd.Timestamp(t.astimezone(timezone.utc).replace(tzinfo=None)).to_period("M")

    months = pd.period_range(start=month_of(first), end=month_of(last), freq="M")
    periods = []
    for i, p in enumerate(months, start=1):
        start = p.start_time.tz_localize("UTC").to_pydatetime()
        end = (p + 1).start_time.tz_localize("UTC").to_pydatetime()
        periods.append(TimePeriod(i, start, end))
    return periods


class SnapshotSeries:
    def __init__(self, project: str, records: list[ChangeRecord], index: InvertedIndex, periods: list[TimePeriod]):
        self.project = project
        self.records = records
        self.index = index
        self.periods = periods
        self._timestamps = [r.timestamp for r in records]
        self._by_id = {r.change_id: i for i, r in enumerate(records)}
        self._cutoffs = [bisect_left(self._timestamps, p.end) for p in periods]
        self._trees: dict[str, Optional[Tree]] = {}

    def __len__(self) -> int:
        return len(self.periods)

    @property
    def snapshots(self) -> list[tuple[TimePeriod, "IndexSnapshot"]]:
        return [(p, IndexSnapshot(self, c, p)) for p, c in zip(self.periods, self._cutoffs)]

    def __iter__(self) -> Iterator[tuple[TimePeriod, "IndexSnapshot"]]:
        return iter(self.snapshots)

    def record(self, change_id: str) -> ChangeRecord:
        return self.records[self._by_id[change_id]]

    def position(self, change_id: str) -> int:
        return self._by_id[change_id]

    def cutoff_before(self, t: datetime) -> int:
        return bisect_left(self._timestamps, t)

    def period_of(self, t: datetime) -> Optional[TimePeriod]:
        if not self.periods or t < self.periods[0].start:
            return None
        for p in self.periods:
            if p.contains(t):
                return p
        return self.periods[-1]

    def tree(self, change_id: str) -> Optional[Tree]:
        """AST of a record, parsed from its source on first use when none was stored; None if that fails."""
        if change_id not in self._trees:
            rec = self.record(change_id)
            tree = rec.ast
            if tree is None:
                try:
                    tree = source_to_tree(rec.source_text)
                except KernelGuardError as e:
                    log.warning({"unparseable_candidate": change_id, "error": str(e)})
                    tree = None
            self._trees[change_id] = tree
        return self._trees[change_id]


@dataclass(frozen=True)
class IndexSnapshot:
    """Read-only view of the first ``cutoff`` records of a series."""

    series: Optional[SnapshotSeries]
    cutoff: int
    period: Optional[TimePeriod] = None

    @property
    def doc_count(self) -> int:
        return 0 if self.series is None else self.series.index.doc_count(self.cutoff)

    def is_empty(self) -> bool:
        return self.doc_count == 0

    def records(self) -> list[ChangeRecord]:
        return [] if self.series is None else self.series.records[: self.cutoff]

    def __contains__(self, change_id: str) -> bool:
        return (
            self.series is not None
            and change_id in self.series._by_id
            and self.series.position(change_id) < self.cutoff
        )

    def record(self, change_id: str) -> Optional[ChangeRecord]:
        return self.series.record(change_id) if change_id in self else None

    def tree(self, change_id: str) -> Optional[Tree]:
        return self.series.tree(change_id) if change_id in self else None

    def more_like_this(self, query_text: str, limit: int = DEFAULT_CANDIDATE_LIMIT) -> CandidateSet:
        if self.series is None:
            return CandidateSet((), limit)
        return more_like_this(self.series.index, query_text, limit, cutoff=self.cutoff)


EMPTY_SNAPSHOT = IndexSnapshot(None, 0, None)


def _check_records(records: list[ChangeRecord]) -> str:
    if not records:
        raise EmptyCorpus("no change records to index")
    unlabeled = [r.change_id for r in records if r.label is None]
    if unlabeled:
        raise MalformedRecord(f"indexed records need a label: {unlabeled[:3]}")
    projects = {r.project for r in records}
    if len(projects) > 1:
        raise MixedProjects(projects)
    for prev, cur in zip(records, records[1:]):
        if cur.timestamp < prev.timestamp:
            raise UnsortedRecords(
                f"record {cur.change_id!r} ({cur.timestamp.isoformat()}) precedes "
                f"{prev.change_id!r} ({prev.timestamp.isoformat()})"
            )
    return projects.pop()


def build_snapshots(records: Iterable[ChangeRecord]) -> SnapshotSeries:
    records = list(records)
    project = _check_records(records)
    idx = InvertedIndex()
    for r in records:
        idx.add(r.change_id, r.source_text, r.to_metadata())
    periods = month_periods(records[0].timestamp, records[-1].timestamp)
    series = SnapshotSeries(project, records, idx, periods)
    log.info({"project": project, "records": len(records), "snapshots": len(periods)})
    return series


def snapshot_for(series: SnapshotSeries, query_time: datetime) -> IndexSnapshot:
    """Everything strictly earlier than query_time; the period is the one holding query_time."""
    query_time = parse_timestamp(query_time)
    return IndexSnapshot(series, series.cutoff_before(query_time), series.period_of(query_time))


def snapshot_counts(series: SnapshotSeries) -> list[dict]:
    return [
        {"period": p.index, "month": p.start.strftime("%Y-%m"), "records": snap.doc_count}
        for p, snap in series.snapshots
    ]


# ---------- persistence ----------
def save_series(series: SnapshotSeries, path: Path) -> Path:
    extra = {
        "project": series.project,
        "periods": [[p.index, p.start.isoformat(), p.end.isoformat()] for p in series.periods],
        "snapshot_cutoffs": list(series._cutoffs),
    }
    return write_index(series.index, path, extra)


def load_series(path: Path) -> SnapshotSeries:
    idx, extra = read_index(path)
    try:
        project = str(extra["project"])
        periods = [
            TimePeriod(int(i), parse_timestamp(s), parse_timestamp(e)) for i, s, e in extra["periods"]
        ]
    except (KeyError, TypeError, ValueError) as e:
        raise IndexFormatError(f"snapshot table missing or malformed: {e}", 1) from e
    records = [ChangeRecord.from_metadata(d.doc_id, d.text, d.metadata) for d in idx.documents()]
    _check_records(records)
    series = SnapshotSeries(project, records, idx, periods)
    if series._cutoffs != extra.get("snapshot_cutoffs"):
        raise IndexFormatError("snapshot cutoffs disagree with the stored records", 1)
    return series
