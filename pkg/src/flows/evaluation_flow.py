# src/flows/evaluation_flow.py
"""Batch experiment runs of the two harnesses, outside the commit hook."""
from __future__ import annotations

from dataclasses import asdict
from pathlib import Path
from typing import Optional

from prefect import flow, get_run_logger, task
from prefect.cache_policies import NONE

from ..evaluation.clone_eval import CloneScope, run_clone_eval
from ..evaluation.defect_eval import run_defect_eval
from ..evaluation.tables import write_metrics_json
from ..ingest.changes import ChangeFormat, ingest_changes
from ..ingest.clonebench import MIN_CLONE_LINES, TYPEWISE_CLONE_TYPES, ingest_clonebench
from ..kernels.tree_kernels import KernelConfig
from ..models.classifier import ClassifierConfig
from ..utils.paths import CHANGES_JSONL, CLONE_METRICS_JSON, CLONEBENCH_DIR, DEFECT_METRICS_JSON


@task
def load_changes(dataset_path: Path, fmt: str):
    return ingest_changes(dataset_path, fmt)


@task(cache_policy=NONE)
def replay(records, cfg: ClassifierConfig, projects: Optional[list[str]]):
    return run_defect_eval(records, cfg, projects=projects, skip_insufficient=projects is None)


@task
def load_clonebench(dataset_path: Path):
    return ingest_clonebench(dataset_path)


@task(cache_policy=NONE)
def rank_clones(entries, truth, kernel_cfg: KernelConfig, scope: str, min_lines: int, threads: int):
    return run_clone_eval(
        entries, truth, kernel_cfg, scope=scope, min_lines=min_lines, clone_types=TYPEWISE_CLONE_TYPES, threads=threads
    )


@flow(name="kernelguard-defect-eval", validate_parameters=False)
def defect_eval_flow(
    dataset_path: Path = CHANGES_JSONL,
    fmt: str = ChangeFormat.JSONL.value,
    cfg: Optional[ClassifierConfig] = None,
    out_path: Path = DEFECT_METRICS_JSON,
    projects: Optional[list[str]] = None,
):
    logger = get_run_logger()
    records = load_changes(Path(dataset_path), fmt)
    results = replay(records, cfg or ClassifierConfig(), projects)
    reports = {p: r.report for p, r in results.items()}
    details = {p: {"confusion": asdict(r.confusion), "time_travel_violations": r.time_travel_violations}
               for p, r in results.items()}
    write_metrics_json(reports, Path(out_path), details)
    logger.info({"projects": len(results), "metrics_json": str(out_path)})
    return results


@flow(name="kernelguard-clone-eval", validate_parameters=False)
def clone_eval_flow(
    dataset_path: Path = CLONEBENCH_DIR,
    kernel_cfg: Optional[KernelConfig] = None,
    scope: str = CloneScope.FUNCTIONALITY.value,
    out_path: Path = CLONE_METRICS_JSON,
    min_lines: int = MIN_CLONE_LINES,
    threads: int = 1,
):
    logger = get_run_logger()
    entries, truth = load_clonebench(Path(dataset_path))
    result = rank_clones(entries, truth, kernel_cfg or KernelConfig(), scope, min_lines, threads)
    reports = dict(result.groups)
    if result.overall is not None:
        reports["overall"] = result.overall
    write_metrics_json(reports, Path(out_path))
    logger.info({"scope": result.scope.value, "groups": len(result.groups), "metrics_json": str(out_path)})
    return result


if __name__ == "__main__":
    defect_eval_flow()
