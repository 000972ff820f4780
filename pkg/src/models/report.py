# src/models/report.py
"""Risky-commit reports: plain text for people, JSON lines for tools."""
from __future__ import annotations

import json
from itertools import zip_longest
from pathlib import Path
from typing import Any, Iterable, Optional, TextIO

from ..corpus.errors import MalformedRecord
from ..corpus.records import ChangeLabel, parse_timestamp
from ..kernels.ranking import RankedMatch
from ..kernels.tree_kernels import SimilarityScore
from ..utils import ensure_parents
from .classifier import ClassificationResult, PredictedLabel

NO_RISK_LINE = "no risky changes detected"
NO_FIX_LINE = "no recorded fix"
COLUMN_WIDTH = 60


def _side_by_side(left: str, right: str, width: int = COLUMN_WIDTH) -> list[str]:
    rows = [f"  {'incoming change':<{width}} | matched past change"]
    rows.append(f"  {'-' * width}-+-{'-' * width}")
    for a, b in zip_longest(left.splitlines(), right.splitlines(), fillvalue=""):
        a = a.expandtabs(4)
        if len(a) > width:
            a = a[: width - 1] + "~"
        rows.append(f"  {a:<{width}} | {b.expandtabs(4)}".rstrip())
    return rows


def _indent(text: str, prefix: str = "    ") -> list[str]:
    return [f"{prefix}{line}".rstrip() for line in text.splitlines()] or [prefix.rstrip()]


def render_report(results: Iterable[ClassificationResult]) -> str:
    results = list(results)
    flagged = [r for r in results if r.flagged]
    if not flagged:
        return NO_RISK_LINE + "\n"

    lines = [f"risky commit: {len(flagged)} of {len(results)} method(s) resemble past bug-inducing changes", ""]
    for r in flagged:
        m = r.culprit
        lines.append(f"== method {r.method_name or r.query_change_id} (change {r.query_change_id}) ==")
        if m is not None:
            lines.append(
                f"  matched past change {m.change_id}: commit {m.commit_hash or '?'}, "
                f"rank {m.rank}, score {m.score:.4f}"
            )
            if m.timestamp is not None:
                lines.append(f"  committed {m.timestamp.isoformat()}")
            lines.append("")
            lines.extend(_side_by_side(r.source_text or "", m.source_text or ""))
        lines.append("")
        if r.suggested_fix is not None:
            fix_id, fix_text = r.suggested_fix
            lines.append(f"  suggested fix ({fix_id}):")
            lines.extend(_indent(fix_text))
        else:
            lines.append(f"  {NO_FIX_LINE}")
        lines.append("")
    return "\n".join(lines).rstrip("\n") + "\n"


# ---------- JSON lines ----------
def _match_to_dict(m: RankedMatch) -> dict[str, Any]:
    return {
        "change_id": m.change_id,
        "rank": m.rank,
        "kernel_score": m.score,
        "retrieval_score": m.retrieval_score,
        "label": m.label.value if isinstance(m.label, ChangeLabel) else m.label,
        "commit_hash": m.commit_hash,
        "method_name": m.method_name,
        "source_text": m.source_text,
        "timestamp": m.timestamp.isoformat() if m.timestamp else None,
        "paired_fix_id": m.paired_fix_id,
    }


def result_to_dict(r: ClassificationResult) -> dict[str, Any]:
    return {
        "query_change_id": r.query_change_id,
        "predicted_label": r.predicted_label.value,
        "k": r.k,
        "method_name": r.method_name,
        "commit_hash": r.commit_hash,
        "timestamp": r.timestamp.isoformat() if r.timestamp else None,
        "source_text": r.source_text,
        "suggested_fix": list(r.suggested_fix) if r.suggested_fix else None,
        "matches": [_match_to_dict(m) for m in r.matches],
    }


def _match_from_dict(d: dict[str, Any]) -> RankedMatch:
    return RankedMatch(
        change_id=d["change_id"],
        rank=int(d["rank"]),
        kernel_score=SimilarityScore(float(d["kernel_score"])),
        retrieval_score=float(d.get("retrieval_score") or 0.0),
        label=ChangeLabel.parse(d["label"]) if d.get("label") else None,
        commit_hash=d.get("commit_hash"),
        method_name=d.get("method_name"),
        source_text=d.get("source_text"),
        timestamp=parse_timestamp(d["timestamp"]) if d.get("timestamp") else None,
        paired_fix_id=d.get("paired_fix_id"),
    )


def result_from_dict(d: dict[str, Any]) -> ClassificationResult:
    fix = d.get("suggested_fix")
    return ClassificationResult(
        query_change_id=d["query_change_id"],
        predicted_label=PredictedLabel(d["predicted_label"]),
        matches=tuple(_match_from_dict(m) for m in d.get("matches") or []),
        suggested_fix=(fix[0], fix[1]) if fix else None,
        k=int(d.get("k") or 1),
        method_name=d.get("method_name"),
        commit_hash=d.get("commit_hash"),
        timestamp=parse_timestamp(d["timestamp"]) if d.get("timestamp") else None,
        source_text=d.get("source_text"),
    )


def write_results_jsonl(results: Iterable[ClassificationResult], out: Optional[Path | TextIO] = None) -> str:
    text = "".join(json.dumps(result_to_dict(r), sort_keys=True) + "\n" for r in results)
    if isinstance(out, (str, Path)):
        ensure_parents(Path(out)).write_text(text, encoding="utf-8")
    elif out is not None:
        out.write(text)
    return text


def results_from_jsonl(path: Path) -> list[ClassificationResult]:
    out = []
    with open(path, encoding="utf-8") as f:
        for n, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                out.append(result_from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
                raise MalformedRecord(f"bad classification result: {e}", n) from e
    return out
