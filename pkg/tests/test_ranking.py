from datetime import datetime, timezone

import pytest

from src.kernels.ranking import _chunks, rank_candidates, resolve_threads, score_candidates
from src.kernels.tree_kernels import KernelConfig, KernelKind, kernel
from src.trees.sexpr import parse_sexpr

from .conftest import random_tree


def test_identical_candidate_ranks_first():
    q = parse_sexpr("(A(B(x))(C))")
    cands = [("c1", parse_sexpr("(A(B(y))(C))")), ("c2", parse_sexpr("(A(B(x))(C))")), ("c3", parse_sexpr("(Z)"))]
    ranked = rank_candidates(q, cands)
    assert ranked[0].change_id == "c2"
    assert ranked[0].score == pytest.approx(1.0)
    assert [m.rank for m in ranked] == [1, 2, 3]


def test_zero_scores_fall_back_to_tie_break():
    q = parse_sexpr("(A(B))")
    cands = [(cid, parse_sexpr("(X(Y))")) for cid in ("b", "c", "a")]
    meta = {
        "a": {"timestamp": datetime(2020, 1, 1, tzinfo=timezone.utc)},
        "b": {"timestamp": datetime(2021, 1, 1, tzinfo=timezone.utc)},
    }
    ranked = rank_candidates(q, cands, metadata=meta)
    assert all(m.score == 0.0 for m in ranked)
    # newest first, candidates without a timestamp last
    assert [m.change_id for m in ranked] == ["b", "a", "c"]


def test_retrieval_score_breaks_kernel_ties():
    q = parse_sexpr("(A(B))")
    cands = [("a", parse_sexpr("(A(B))")), ("b", parse_sexpr("(A(B))"))]
    ranked = rank_candidates(q, cands, metadata={"b": {"retrieval_score": 2.0}, "a": {"retrieval_score": 1.0}})
    assert [m.change_id for m in ranked] == ["b", "a"]


def test_order_matches_single_pair_calls(rng):
    cfg = KernelConfig(KernelKind.SSTK)
    q = random_tree(rng)
    cands = [(f"c{i}", random_tree(rng)) for i in range(5)]
    ranked = rank_candidates(q, cands, cfg)
    expected = sorted(cands, key=lambda c: (-kernel(q, c[1], cfg).value, c[0]))
    assert [m.change_id for m in ranked] == [cid for cid, _ in expected]
    assert sorted(m.change_id for m in ranked) == sorted(cid for cid, _ in cands)


def test_scores_non_increasing(rng):
    q = random_tree(rng)
    ranked = rank_candidates(q, [(f"c{i}", random_tree(rng)) for i in range(30)])
    scores = [m.score for m in ranked]
    assert scores == sorted(scores, reverse=True)


def test_worker_pool_gives_same_scores(rng):
    q = random_tree(rng)
    cands = [(f"c{i}", random_tree(rng)) for i in range(20)]
    assert score_candidates(q, cands, KernelConfig(), threads=2) == score_candidates(q, cands, KernelConfig(), threads=1)


def test_metadata_copied_into_matches():
    ts = datetime(2022, 5, 1, tzinfo=timezone.utc)
    ranked = rank_candidates(
        parse_sexpr("(A)"), [("x", parse_sexpr("(A)"))],
        metadata={"x": {"label": "bug", "commit_hash": "abc", "timestamp": ts, "paired_fix_id": "fix"}},
    )
    m = ranked[0]
    assert (m.label, m.commit_hash, m.timestamp, m.paired_fix_id) == ("bug", "abc", ts, "fix")


def test_empty_and_duplicate_candidates():
    q = parse_sexpr("(A)")
    assert rank_candidates(q, []) == []
    with pytest.raises(ValueError):
        rank_candidates(q, [("a", q), ("a", q)])


def test_threads_helpers():
    assert resolve_threads(3) == 3
    assert resolve_threads(0) >= 1
    with pytest.raises(ValueError):
        resolve_threads(-1)
    assert _chunks(list(range(5)), 2) == [[0, 1, 2], [3, 4]]
