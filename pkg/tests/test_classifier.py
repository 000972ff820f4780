import random
import time
from datetime import datetime, timedelta, timezone

import pytest

from src.corpus.records import ChangeLabel
from src.corpus.snapshots import EMPTY_SNAPSHOT, build_snapshots, snapshot_for
from src.kernels.ranking import RankedMatch
from src.kernels.tree_kernels import SimilarityScore
from src.models.classifier import (
    ClassifierConfig,
    MissingAst,
    MixedCommit,
    PredictedLabel,
    biased_vote,
    classify,
    classify_commit,
    is_risky,
)
from src.trees.java import source_to_tree
from src.utils.errors import ConfigError

from .conftest import deep_else_if_source, deep_parens_source, family_source, long_method_source, make_record

UTC = timezone.utc
BUG = "public int f(int a) { if (a > 3) { return a - 1; } return a; }"
FIX = "public int f(int a) { if (a > 4) { return a - 2; } return a; }"


def ts(*args):
    return datetime(*args, tzinfo=UTC)


@pytest.fixture
def series():
    return build_snapshots([
        make_record("bug", ts(2021, 1, 5), ChangeLabel.BUG_INDUCING, BUG, commit="b111", paired_fix_id="fix"),
        make_record("fix", ts(2021, 1, 9), ChangeLabel.BUG_FIXING, FIX, commit="f222"),
        make_record("other", ts(2021, 1, 12), ChangeLabel.BUG_FIXING, family_source(3), commit="o333"),
    ])


def match(cid, label, rank):
    return RankedMatch(cid, rank, SimilarityScore(1.0 / rank), label=label)


def test_biased_vote_flags_any_bug_in_top_k():
    ranked = [match(f"m{i}", ChangeLabel.BUG_FIXING, i) for i in range(1, 5)]
    ranked.append(match("m5", ChangeLabel.BUG_INDUCING, 5))
    assert biased_vote(ranked, 1) is PredictedLabel.CLEAN
    assert biased_vote(ranked, 4) is PredictedLabel.CLEAN
    assert biased_vote(ranked, 5) is PredictedLabel.BUG_INDUCING
    assert biased_vote([], 5) is PredictedLabel.CLEAN


def test_identical_bug_is_flagged_with_full_score(series):
    query = make_record("q", ts(2021, 2, 1), None, BUG, commit="q999")
    result = classify(query, snapshot_for(series, query.timestamp))
    assert result.flagged
    top = result.matches[0]
    assert top.change_id == "bug"
    assert top.score == pytest.approx(1.0)
    assert result.culprit is top
    assert top.commit_hash == "b111"


def test_suggested_fix_comes_from_paired_record(series):
    query = make_record("q", ts(2021, 2, 1), None, BUG)
    result = classify(query, snapshot_for(series, query.timestamp))
    assert result.suggested_fix == ("fix", FIX)


def test_fix_outside_snapshot_is_not_suggested():
    s = build_snapshots([
        make_record("bug", ts(2021, 1, 5), ChangeLabel.BUG_INDUCING, BUG, paired_fix_id="fix"),
        make_record("fix", ts(2021, 3, 9), ChangeLabel.BUG_FIXING, FIX),
    ])
    query = make_record("q", ts(2021, 2, 1), None, BUG)
    result = classify(query, snapshot_for(s, query.timestamp))
    assert result.flagged
    assert result.suggested_fix is None


def test_closest_fix_gives_clean(series):
    query = make_record("q", ts(2021, 2, 1), None, family_source(3, renamed=True))
    result = classify(query, snapshot_for(series, query.timestamp))
    assert result.matches[0].change_id == "other"
    assert result.predicted_label is PredictedLabel.CLEAN
    assert result.culprit is None


def test_empty_snapshot_is_clean():
    query = make_record("q", ts(2021, 2, 1), None, BUG)
    result = classify(query, EMPTY_SNAPSHOT)
    assert result.predicted_label is PredictedLabel.CLEAN
    assert result.matches == ()


def test_query_before_history_is_clean(series):
    query = make_record("q", ts(2020, 6, 1), None, BUG)
    assert not classify(query, snapshot_for(series, query.timestamp)).flagged


def test_unparseable_query_needs_ast(series):
    query = make_record("q", ts(2021, 2, 1), None, "void m() { while (true) {} }")
    with pytest.raises(MissingAst):
        classify(query, snapshot_for(series, query.timestamp))


@pytest.mark.parametrize("source", [deep_parens_source(200), deep_else_if_source(300)])
def test_deeply_nested_query_needs_ast(series, source):
    query = make_record("q", ts(2021, 2, 1), None, source)
    with pytest.raises(MissingAst):
        classify(query, snapshot_for(series, query.timestamp))
    with pytest.raises(MissingAst):
        classify(query, EMPTY_SNAPSHOT)


def test_classify_commit(series):
    methods = [
        make_record("q1", ts(2021, 2, 1), None, BUG, commit="c1"),
        make_record("q2", ts(2021, 2, 1), None, family_source(3, renamed=True), commit="c1"),
    ]
    results = classify_commit(methods, series)
    assert [r.flagged for r in results] == [True, False]
    assert is_risky(results)
    assert not is_risky(results[1:])
    assert classify_commit([], series) == []


def test_classify_commit_rejects_mixed_input(series):
    with pytest.raises(MixedCommit):
        classify_commit([
            make_record("q1", ts(2021, 2, 1), None, BUG, commit="c1"),
            make_record("q2", ts(2021, 2, 1), None, BUG, commit="c2"),
        ], series)
    with pytest.raises(MixedCommit):
        classify_commit([
            make_record("q1", ts(2021, 2, 1), None, BUG, commit="c1"),
            make_record("q2", ts(2021, 2, 2), None, BUG, commit="c1"),
        ], series)


@pytest.mark.parametrize("kwargs", [{"k": 0}, {"candidate_limit": 0}, {"k": 5, "candidate_limit": 3}, {"threads": -1}])
def test_config_validation(kwargs):
    with pytest.raises(ConfigError):
        ClassifierConfig(**kwargs)


STATEMENTS = (
    "int t = a + b;",
    "if (a > b) { return a - 1; }",
    "if (b == 0) { return 0; } else { b = b - 1; }",
    "log(a);",
    "audit(\"call\", b);",
    "a = a * 2;",
    "int s = a % 3;",
    "return a + b;",
)


def random_method(rng, i):
    body = " ".join(rng.choice(STATEMENTS) for _ in range(rng.randint(1, 5)))
    return f"public int m{i % 4}(int a, int b) {{ {body} return b; }}"


def random_series(rng, size=40):
    labels = (ChangeLabel.BUG_INDUCING, ChangeLabel.BUG_FIXING)
    records = [
        make_record(f"r{i:02d}", ts(2021, 1 + i % 3, 1 + i // 3), rng.choice(labels), random_method(rng, i))
        for i in range(size)
    ]
    return build_snapshots(sorted(records, key=lambda r: r.timestamp))


@pytest.mark.parametrize("seed", [5, 6, 7])
def test_flagging_is_monotone_in_k(seed):
    rng = random.Random(seed)
    series = random_series(rng)
    for q in range(10):
        query = make_record(f"q{q}", ts(2021, 6, 1), None, random_method(rng, q))
        snapshot = snapshot_for(series, query.timestamp)
        flags = [classify(query, snapshot, ClassifierConfig(k=k)).flagged for k in range(1, 8)]
        # once flagged, every larger k stays flagged
        assert flags == sorted(flags)


@pytest.mark.parametrize("seed", [11, 12])
def test_flag_set_iff_bug_in_top_k(seed):
    rng = random.Random(seed)
    series = random_series(rng)
    for q in range(10):
        query = make_record(f"q{q}", ts(2021, 6, 1), None, random_method(rng, q))
        k = rng.randint(1, 6)
        result = classify(query, snapshot_for(series, query.timestamp), ClassifierConfig(k=k))
        assert result.matches
        assert result.flagged == any(m.label is ChangeLabel.BUG_INDUCING for m in result.matches[:k])
        assert result.top_k == result.matches[:k]
        assert (result.culprit is not None) == result.flagged


def test_classification_is_repeatable(series):
    query = make_record("q", ts(2021, 2, 1), None, BUG, commit="q999")
    snap = snapshot_for(series, query.timestamp)
    assert classify(query, snap, ClassifierConfig(k=2)) == classify(query, snap, ClassifierConfig(k=2))


@pytest.fixture(scope="module")
def ten_thousand_records():
    start = datetime(2020, 1, 1, tzinfo=UTC)
    labels = (ChangeLabel.BUG_INDUCING, ChangeLabel.BUG_FIXING)
    return build_snapshots([
        make_record(f"r{i:05d}", start + timedelta(minutes=30 * i), labels[i % 2],
                    long_method_source(i % 500, 4 + i % 12), commit=f"c{i:05d}")
        for i in range(10_000)
    ])


@pytest.mark.slow
def test_commit_of_five_methods_classified_within_a_minute(ten_thousand_records):
    when = datetime(2021, 1, 1, tzinfo=UTC)
    methods = [
        make_record(f"q{i}", when, None, long_method_source(7 * i, 46), commit="incoming", method=f"run_{7 * i}")
        for i in range(5)
    ]
    assert all(400 <= len(source_to_tree(m.source_text).labels) <= 500 for m in methods)
    cfg = ClassifierConfig(k=1, candidate_limit=100, threads=0)

    start = time.perf_counter()
    results = classify_commit(methods, ten_thousand_records, cfg)
    elapsed = time.perf_counter() - start

    assert len(results) == 5
    assert all(len(r.matches) == 100 for r in results)
    assert elapsed < 60
