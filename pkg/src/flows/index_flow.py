# src/flows/index_flow.py
from __future__ import annotations

from pathlib import Path
from typing import Optional

from prefect import flow, get_run_logger, task
from prefect.cache_policies import NONE

from ..corpus.errors import EmptyCorpus
from ..corpus.snapshots import build_snapshots, save_series, snapshot_counts
from ..ingest.changes import ChangeFormat, group_by_project, ingest_changes
from ..utils.errors import ConfigError
from ..utils.paths import CHANGES_JSONL, INDEX_FILE


@task
def ingest(corpus_path: Path, fmt: str, project: Optional[str]):
    records = ingest_changes(corpus_path, fmt)
    by_project = group_by_project(records)
    if project is None:
        if len(by_project) > 1:
            raise ConfigError(f"corpus holds {len(by_project)} projects; pass project=")
        return records
    if project not in by_project:
        raise EmptyCorpus(f"no records for project {project!r}")
    return by_project[project]


@task(cache_policy=NONE)
def index(records, out_path: Path):
    series = build_snapshots(records)
    save_series(series, out_path)
    return snapshot_counts(series)


@flow(name="kernelguard-index")
def index_flow(
    corpus_path: Path = CHANGES_JSONL,
    out_path: Path = INDEX_FILE,
    fmt: str = ChangeFormat.JSONL.value,
    project: Optional[str] = None,
):
    logger = get_run_logger()
    records = ingest(Path(corpus_path), fmt, project)
    counts = index(records, Path(out_path))
    logger.info({"snapshots": len(counts), "records": len(records), "index": str(out_path)})
    return counts


if __name__ == "__main__":
    index_flow()
