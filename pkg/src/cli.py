# src/cli.py
"""Command-line entry point: ``python -m src.cli <command> ...``.

Exit codes: 0 = nothing risky / success, 1 = risky methods found, 2 = error.
Standard output carries reports and tables only; diagnostics go to standard error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Optional, Sequence

import pandas as pd
from dotenv import load_dotenv

from .corpus.errors import EmptyCorpus
from .corpus.snapshots import build_snapshots, load_series, save_series, snapshot_counts
from .evaluation.clone_eval import CloneScope, run_clone_eval
from .evaluation.defect_eval import run_defect_eval
from .evaluation.tables import format_table, metrics_frame, metrics_json, summary_frame, write_metrics_json
from .ingest.changes import ChangeFormat, group_by_project, ingest_changes, read_commit_payload
from .ingest.clonebench import ingest_clonebench
from .kernels.tree_kernels import KernelConfig
from .models.classifier import ClassifierConfig, classify_commit, is_risky
from .models.report import render_report, results_from_jsonl, write_results_jsonl
from .utils.config import CLONE_TYPE_CHOICES, KERNEL_CHOICES, RunConfig, load_run_config
from .utils.errors import ConfigError, KernelGuardError
from .utils.paths import CLONE_METRICS_JSON, DEFECT_METRICS_JSON, INDEX_FILE

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_RISKY = 1
EXIT_ERROR = 2
EVAL_MODES = ("defects", "clones")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_ERROR)


# ---------- parser ----------
def _common_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--kernel", choices=KERNEL_CHOICES, default=None, help="tree kernel (default ptk)")
    p.add_argument("--lambda", dest="lam", type=float, default=None, help="decay lambda (default 0.4)")
    p.add_argument("--mu", type=float, default=None, help="PTK decay mu (default 0.4)")
    p.add_argument("--k", type=int, default=None, help="top-k for the biased vote (default 1)")
    p.add_argument("--candidates", type=int, default=None, help="more-like-this candidates (default 100)")
    p.add_argument("--threads", type=int, default=None, help="kernel worker processes, 0 = auto")
    p.add_argument("--project", default=None)
    p.add_argument("--no-normalize", dest="normalize", action="store_const", const=False, default=None)
    p.add_argument("--config", type=Path, default=None, help="key=value settings file")
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--json", action="store_true", help="machine-readable output on stdout")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _eval_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("dataset", type=Path)
    p.add_argument("--format", choices=[f.value for f in ChangeFormat], default=ChangeFormat.JSONL.value)
    p.add_argument("--scope", choices=[s.value for s in CloneScope], default=CloneScope.FUNCTIONALITY.value)
    p.add_argument("--min-lines", type=int, default=None)
    p.add_argument("--types", default=None, help=f"comma-separated subset of {','.join(CLONE_TYPE_CHOICES)}")


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = _Parser(prog="kernelguard", description="Tree-kernel bug-inducing change detection")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("index", parents=[common], help="build the snapshot index of a change corpus")
    p.add_argument("corpus", type=Path)
    p.add_argument("--format", choices=[f.value for f in ChangeFormat], default=ChangeFormat.JSONL.value)

    p = sub.add_parser("classify", parents=[common], help="classify the methods of a pending commit")
    p.add_argument("index", type=Path)
    p.add_argument("payload", type=Path)

    p = sub.add_parser("evaluate", parents=[common], help="run an evaluation harness")
    p.add_argument("--mode", choices=EVAL_MODES, required=True)
    _eval_flags(p)

    for mode in EVAL_MODES:
        p = sub.add_parser(f"evaluate-{mode}", parents=[common], help=f"evaluate --mode {mode}")
        p.set_defaults(mode=mode)
        _eval_flags(p)

    p = sub.add_parser("report", parents=[common], help="render saved classification results")
    p.add_argument("results", type=Path)
    return parser


# ---------- settings ----------
def run_config(args: argparse.Namespace) -> RunConfig:
    flags = {
        "kernel": args.kernel,
        "lambda": args.lam,
        "mu": args.mu,
        "k": args.k,
        "candidates": args.candidates,
        "threads": args.threads,
        "project": args.project,
        "normalize": args.normalize,
        "min_lines": getattr(args, "min_lines", None),
        "types": getattr(args, "types", None),
    }
    return load_run_config(flags, args.config)


def kernel_config(rc: RunConfig) -> KernelConfig:
    return KernelConfig(kind=rc.kernel, lam=rc.lam, mu=rc.mu, normalize=rc.normalize)


def classifier_config(rc: RunConfig) -> ClassifierConfig:
    return ClassifierConfig(
        k=rc.k, kernel_cfg=kernel_config(rc), candidate_limit=rc.candidate_limit, threads=rc.resolved_threads()
    )


def configure_logging(command: str, verbose: bool) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if command in ("classify", "report") else logging.INFO
    logging.basicConfig(stream=sys.stderr, level=level, format="%(levelname)s %(name)s %(message)s", force=True)


# ---------- commands ----------
def cmd_index(args: argparse.Namespace, rc: RunConfig) -> int:
    records = ingest_changes(args.corpus, args.format)
    by_project = group_by_project(records)
    if rc.project is not None:
        if rc.project not in by_project:
            raise EmptyCorpus(f"no records for project {rc.project!r} in {args.corpus}")
        records = by_project[rc.project]
    elif len(by_project) > 1:
        raise ConfigError(f"corpus holds {len(by_project)} projects; pick one with --project")

    series = build_snapshots(records)
    out = save_series(series, args.out or INDEX_FILE)
    counts = snapshot_counts(series)
    if args.json:
        print(json.dumps({"project": series.project, "index": str(out), "snapshots": counts}))
    else:
        print(f"{len(counts)} snapshots ({series.project}, {len(series.records)} records) -> {out}")
        for c in counts:
            print(f"  {c['month']}: {c['records']} records")
    return EXIT_OK


def cmd_classify(args: argparse.Namespace, rc: RunConfig) -> int:
    series = load_series(args.index)
    methods = read_commit_payload(args.payload)
    results = classify_commit(methods, series, classifier_config(rc))
    if args.out is not None:
        write_results_jsonl(results, args.out)
    if args.json:
        write_results_jsonl(results, sys.stdout)
    else:
        sys.stdout.write(render_report(results))
    return EXIT_RISKY if is_risky(results) else EXIT_OK


def _print_frame(df: pd.DataFrame, title: Optional[str] = None) -> None:
    if title:
        print(title)
    print(format_table(df))


def _evaluate_defects(args: argparse.Namespace, rc: RunConfig) -> int:
    records = ingest_changes(args.dataset, args.format)
    projects = [rc.project] if rc.project else None
    multi = len(group_by_project(records)) > 1
    results = run_defect_eval(
        records, classifier_config(rc), projects=projects, skip_insufficient=projects is None and multi
    )
    reports = {p: r.report for p, r in results.items()}
    details = {
        p: {"confusion": asdict(r.confusion), "time_travel_violations": r.time_travel_violations,
            "skipped_queries": r.skipped_queries}
        for p, r in results.items()
    }
    write_metrics_json(reports, args.out or DEFECT_METRICS_JSON, details)
    if args.json:
        print(json.dumps(metrics_json(reports, details), sort_keys=True))
    else:
        _print_frame(metrics_frame(reports, "defects"))
    return EXIT_OK


def _evaluate_clones(args: argparse.Namespace, rc: RunConfig) -> int:
    entries, truth = ingest_clonebench(args.dataset)
    result = run_clone_eval(
        entries,
        truth,
        kernel_config(rc),
        scope=args.scope,
        min_lines=rc.min_lines,
        clone_types=rc.clone_types,
        threads=rc.resolved_threads(),
    )
    reports = dict(result.groups)
    json_reports = {**reports, "overall": result.overall} if result.overall is not None else reports
    write_metrics_json(json_reports, args.out or CLONE_METRICS_JSON)
    if args.json:
        print(json.dumps(metrics_json(json_reports), sort_keys=True))
        return EXIT_OK
    _print_frame(metrics_frame(reports, "clones"), f"scope: {result.scope.value}")
    if result.scope is not CloneScope.TYPE and len(reports) > 1:
        print()
        _print_frame(summary_frame(reports, "MAP"), "MAP summary")
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace, rc: RunConfig) -> int:
    if args.mode == "defects":
        return _evaluate_defects(args, rc)
    return _evaluate_clones(args, rc)


def cmd_report(args: argparse.Namespace, rc: RunConfig) -> int:
    results = results_from_jsonl(args.results)
    if args.json:
        write_results_jsonl(results, sys.stdout)
    else:
        sys.stdout.write(render_report(results))
    return EXIT_RISKY if is_risky(results) else EXIT_OK


COMMANDS = {
    "index": cmd_index,
    "classify": cmd_classify,
    "evaluate": cmd_evaluate,
    "evaluate-defects": cmd_evaluate,
    "evaluate-clones": cmd_evaluate,
    "report": cmd_report,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    load_dotenv()
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_ERROR
    configure_logging(args.command, args.verbose)
    try:
        rc = run_config(args)
        return COMMANDS[args.command](args, rc)
    except (KernelGuardError, OSError, UnicodeDecodeError, json.JSONDecodeError, csv.Error,
            pd.errors.ParserError, pd.errors.EmptyDataError, RecursionError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
