import json

import pytest

from src.cli import EXIT_ERROR, EXIT_OK, EXIT_RISKY, main
from src.models.report import NO_RISK_LINE

from .conftest import deep_parens_source, family_source, make_record, record_to_json, write_jsonl


@pytest.fixture
def index_file(tmp_path, planted_jsonl):
    out = tmp_path / "idx" / "planted.kgidx"
    assert main(["index", str(planted_jsonl), "--out", str(out)]) == EXIT_OK
    return out


def payload(tmp_path, source, name="p.jsonl", commit="newcommit"):
    row = {
        "commit_hash": commit, "file_path": "src/Demo.java", "method_name": "m",
        "timestamp": "2021-04-01T12:00:00Z", "source_text": source,
    }
    return write_jsonl(tmp_path / name, [row])


def test_index_prints_snapshot_counts(tmp_path, planted_jsonl, capsys):
    out = tmp_path / "x.kgidx"
    assert main(["index", str(planted_jsonl), "--out", str(out)]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == f"3 snapshots (planted, 24 records) -> {out}"
    assert lines[1:] == ["  2021-01: 12 records", "  2021-02: 22 records", "  2021-03: 24 records"]
    assert out.exists()


def test_index_json_output(tmp_path, planted_jsonl, capsys):
    assert main(["index", str(planted_jsonl), "--out", str(tmp_path / "x.kgidx"), "--json"]) == EXIT_OK
    data = json.loads(capsys.readouterr().out)
    assert data["project"] == "planted"
    assert [s["records"] for s in data["snapshots"]] == [12, 22, 24]


def test_index_missing_and_empty_corpus(tmp_path, capsys):
    assert main(["index", str(tmp_path / "missing.jsonl"), "--out", str(tmp_path / "x")]) == EXIT_ERROR
    empty = tmp_path / "empty.jsonl"
    empty.write_text("", encoding="utf-8")
    assert main(["index", str(empty), "--out", str(tmp_path / "x")]) == EXIT_ERROR
    assert "error:" in capsys.readouterr().err


def test_index_needs_project_choice_for_mixed_corpus(tmp_path, planted_jsonl):
    from datetime import datetime, timezone

    extra = record_to_json(make_record("other-1", datetime(2021, 1, 5, tzinfo=timezone.utc), project="other"))
    path = tmp_path / "mixed.jsonl"
    path.write_text(planted_jsonl.read_text(encoding="utf-8") + json.dumps(extra) + "\n", encoding="utf-8")
    out = str(tmp_path / "x.kgidx")
    assert main(["index", str(path), "--out", out]) == EXIT_ERROR
    assert main(["index", str(path), "--out", out, "--project", "planted"]) == EXIT_OK
    assert main(["index", str(path), "--out", out, "--project", "nobody"]) == EXIT_ERROR


def test_classify_duplicate_of_bug_is_risky(tmp_path, index_file, capsys):
    p = payload(tmp_path, family_source(0, renamed=True))
    assert main(["classify", str(index_file), str(p), "--threads", "1"]) == EXIT_RISKY
    out = capsys.readouterr().out
    assert out.startswith("risky commit")
    assert "c-dup-0" in out


def test_classify_novel_code_is_clean(tmp_path, index_file, capsys):
    p = payload(tmp_path, "void zq() { }")
    assert main(["classify", str(index_file), str(p), "--threads", "1"]) == EXIT_OK
    assert capsys.readouterr().out == NO_RISK_LINE + "\n"


def test_classify_malformed_payload(tmp_path, index_file):
    bad = tmp_path / "bad.jsonl"
    bad.write_text("{not json\n", encoding="utf-8")
    assert main(["classify", str(index_file), str(bad)]) == EXIT_ERROR


def test_classify_deeply_nested_payload_is_an_error(tmp_path, index_file, capsys):
    p = payload(tmp_path, deep_parens_source(200))
    assert main(["classify", str(index_file), str(p), "--threads", "1"]) == EXIT_ERROR
    assert "nesting" in capsys.readouterr().err


def test_classify_then_report(tmp_path, index_file, capsys):
    p = payload(tmp_path, family_source(2, renamed=True))
    results = tmp_path / "res" / "results.jsonl"
    assert main(["classify", str(index_file), str(p), "--threads", "1", "--out", str(results)]) == EXIT_RISKY
    first = capsys.readouterr().out
    assert main(["report", str(results)]) == EXIT_RISKY
    assert capsys.readouterr().out == first


def test_classify_json_lines(tmp_path, index_file, capsys):
    p = payload(tmp_path, family_source(1, renamed=True))
    assert main(["classify", str(index_file), str(p), "--threads", "1", "--json"]) == EXIT_OK
    row = json.loads(capsys.readouterr().out.splitlines()[0])
    assert row["predicted_label"] == "Clean"
    assert row["matches"][0]["change_id"] == "dup-1"


def test_evaluate_defects_prints_table(tmp_path, planted_jsonl, capsys):
    out = tmp_path / "m.json"
    code = main(["evaluate", "--mode", "defects", str(planted_jsonl), "--threads", "1", "--out", str(out)])
    assert code == EXIT_OK
    text = capsys.readouterr().out
    assert "MRR" in text and "planted" in text
    data = json.loads(out.read_text(encoding="utf-8"))
    assert data["planted"]["time_travel_violations"] == 0
    assert data["planted"]["query_count"] == 24


def test_evaluate_clones_project_scope(tmp_path, clonebench_dir, capsys):
    out = tmp_path / "c.json"
    code = main(["evaluate-clones", str(clonebench_dir), "--scope", "project", "--threads", "1", "--out", str(out)])
    assert code == EXIT_OK
    text = capsys.readouterr().out
    assert "scope: project" in text
    assert "MAP summary" in text
    assert set(json.loads(out.read_text(encoding="utf-8"))) == {"alpha", "beta", "overall"}


@pytest.mark.parametrize("argv", [
    ["evaluate", "--mode", "bugs", "x"],
    ["frobnicate"],
    [],
    ["classify", "only-one-arg"],
])
def test_usage_errors(argv):
    assert main(argv) == EXIT_ERROR


def test_invalid_setting_is_an_error(tmp_path, planted_jsonl, capsys):
    assert main(["index", str(planted_jsonl), "--out", str(tmp_path / "x"), "--lambda", "2"]) == EXIT_ERROR
    assert "lambda" in capsys.readouterr().err


def test_help_exits_zero(capsys):
    assert main(["--help"]) == EXIT_OK
