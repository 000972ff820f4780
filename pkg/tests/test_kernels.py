import math
import time

import pytest

from src.kernels.oracle import TreeTooLargeForOracle, oracle_fragments, oracle_kernel
from src.kernels.tree_kernels import (
    InvalidKernelConfig,
    KernelConfig,
    KernelKind,
    delta_ptk,
    delta_sstk,
    delta_stk,
    kernel,
    self_kernel,
)
from src.trees.errors import DegenerateTree
from src.trees.java import source_to_tree
from src.trees.sexpr import parse_sexpr

from .conftest import random_tree

KINDS = [KernelKind.STK, KernelKind.SSTK, KernelKind.PTK]


def raw(kind, lam=1.0, mu=1.0):
    return KernelConfig(kind, lam, mu, normalize=False)


# ---------- deltas ----------
def test_sstk_preterminal_pair():
    t = parse_sexpr("(A(B))")
    assert delta_sstk(t, 0, t, 0, 0.4) == pytest.approx(0.4)


def test_sstk_differing_labels():
    a, b = parse_sexpr("(A(B))"), parse_sexpr("(X(B))")
    assert delta_sstk(a, 0, b, 0, 1.0) == 0.0


def test_sstk_two_preterminal_children():
    t = parse_sexpr("(A(B(x))(C(y)))")
    assert delta_sstk(t, 0, t, 0, 1.0) == 4.0


def test_stk_preterminal_and_broken_child():
    t = parse_sexpr("(A(B(x))(C(y)))")
    u = parse_sexpr("(A(B(x))(C(z)))")
    assert delta_stk(t, 1, t, 1, 1.0) == 1.0
    assert delta_stk(t, 0, u, 0, 1.0) == 0.0


def test_stk_chain_sums_to_two():
    # the lone terminal (C) is not an STK fragment
    t = parse_sexpr("(A(B(C)))")
    total = sum(delta_stk(t, i, t, j, 1.0) for i in range(3) for j in range(3))
    assert total == 2.0
    assert kernel(t, t, raw(KernelKind.STK)).value == 2.0


def test_ptk_single_node():
    t = parse_sexpr("(A)")
    assert delta_ptk(t, 0, t, 0, 1.0, 1.0) == 1.0


def test_ptk_only_root_shared():
    a, b = parse_sexpr("(A(B))"), parse_sexpr("(A(C))")
    assert kernel(a, b, raw(KernelKind.PTK)).value == 1.0


def test_delta_rejects_foreign_node():
    t = parse_sexpr("(A)")
    with pytest.raises(IndexError):
        delta_ptk(t, 3, t, 0)


# ---------- oracle ----------
def test_oracle_stk_drops_terminals():
    assert oracle_fragments(parse_sexpr("(A(B)(C))"), KernelKind.STK).counts == {"(A(B)(C))": 1}


def test_oracle_ptk_single_node():
    assert oracle_fragments(parse_sexpr("(A)"), KernelKind.PTK).counts == {"(A)": 1}


def test_oracle_ptk_enumeration():
    counts = oracle_fragments(parse_sexpr("(A(B)(C))"), KernelKind.PTK).counts
    assert counts == {"(A)": 1, "(B)": 1, "(C)": 1, "(A(B))": 1, "(A(C))": 1, "(A(B)(C))": 1}


def test_oracle_cap():
    big = parse_sexpr("(A" + "(B)" * 12 + ")")
    with pytest.raises(TreeTooLargeForOracle):
        oracle_fragments(big, KernelKind.PTK)


@pytest.mark.parametrize("kind", KINDS)
def test_declaration_tree_against_oracle(kind):
    t = parse_sexpr("(VariableDeclarationStatement(PrimitiveType:int)"
                    "(VariableDeclarationFragment(SimpleName:i)(NumberLiteral:0)))")
    assert kernel(t, t, raw(kind)).value == oracle_kernel(t, t, kind)


# int i = 0; with terminals as their own leaves: eight nodes
DECLARATION_WITH_TERMINALS = (
    "(VariableDeclarationStatement(PrimitiveType(int))"
    "(VariableDeclarationFragment(SimpleName(i))(NumberLiteral(0))))"
)


@pytest.mark.parametrize("kind,fragments", [
    (KernelKind.STK, 5),
    (KernelKind.SSTK, 17),
    (KernelKind.PTK, 48),
])
def test_eight_node_declaration_fragment_counts(kind, fragments):
    t = parse_sexpr(DECLARATION_WITH_TERMINALS)
    assert len(t.labels) == 8
    multiset = oracle_fragments(t, kind)
    # no fragment repeats inside this tree, so the self dot product is the fragment count
    assert multiset.total() == len(multiset) == fragments
    assert oracle_kernel(t, t, kind) == fragments
    assert kernel(t, t, raw(kind)).value == fragments


def test_eight_node_declaration_stk_fragments():
    counts = oracle_fragments(parse_sexpr(DECLARATION_WITH_TERMINALS), KernelKind.STK).counts
    assert set(counts) == {
        DECLARATION_WITH_TERMINALS,
        "(PrimitiveType(int))",
        "(VariableDeclarationFragment(SimpleName(i))(NumberLiteral(0)))",
        "(SimpleName(i))",
        "(NumberLiteral(0))",
    }


def test_kernels_match_oracle_on_random_pairs(rng):
    start = time.perf_counter()
    for _ in range(250):
        a, b = random_tree(rng), random_tree(rng)
        for kind in KINDS:
            assert round(kernel(a, b, raw(kind)).value) == oracle_kernel(a, b, kind), (kind, a.sexpr, b.sexpr)
    assert time.perf_counter() - start < 10


def test_fragment_family_containment(rng):
    for _ in range(100):
        t = random_tree(rng)
        stk, sstk, ptk = (oracle_fragments(t, k) for k in KINDS)
        assert set(stk.counts) <= set(sstk.counts) <= set(ptk.counts)
        assert stk.total() <= sstk.total() <= ptk.total()


# ---------- kernel properties ----------
@pytest.mark.parametrize("kind", KINDS)
def test_self_similarity_is_one(rng, kind):
    cfg = KernelConfig(kind)
    for _ in range(100):
        t = random_tree(rng)
        v = kernel(t, t, cfg).value
        if self_kernel(t, cfg) == 0.0:
            assert v == 0.0
        else:
            assert v == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("kind", KINDS)
def test_symmetry_and_range(rng, kind):
    cfg = KernelConfig(kind)
    for _ in range(200):
        a, b = random_tree(rng), random_tree(rng)
        ab, ba = kernel(a, b, cfg).value, kernel(b, a, cfg).value
        assert ab == ba
        assert 0.0 <= ab <= 1.0 + 1e-12
        assert kernel(a, b, raw(kind, 0.4, 0.4)).value == kernel(b, a, raw(kind, 0.4, 0.4)).value


@pytest.mark.parametrize("kind", KINDS)
def test_disjoint_alphabets(kind):
    a = parse_sexpr("(A(B)(C(A)))")
    b = parse_sexpr("(X(Y)(Z))")
    assert kernel(a, b, KernelConfig(kind)).value == 0.0
    assert kernel(a, b, raw(kind)).value == 0.0


@pytest.mark.parametrize("kind", KINDS)
def test_lambda_monotonic(rng, kind):
    for _ in range(50):
        a, b = random_tree(rng), random_tree(rng)
        values = [kernel(a, b, raw(kind, lam, 0.4)).value for lam in (0.1, 0.3, 0.5, 0.8, 1.0)]
        assert all(x <= y + 1e-12 for x, y in zip(values, values[1:]))


def test_single_node_sstk_normalizes_to_zero():
    t = parse_sexpr("(A)")
    assert kernel(t, t, KernelConfig(KernelKind.SSTK)).value == 0.0


def test_identical_java_methods_score_one():
    src = 'public String foo(int i) { if (i == 0) return "Foo!"; }'
    assert kernel(source_to_tree(src), source_to_tree(src)).value == pytest.approx(1.0, abs=1e-12)


def test_renamed_method_scores_below_identical():
    a = source_to_tree("int f(int a) { return a + 1; }")
    b = source_to_tree("int g(int b) { return b + 1; }")
    v = kernel(a, b).value
    assert 0.0 < v < 1.0


def test_normalized_value_formula():
    a = parse_sexpr("(A(B)(C))")
    b = parse_sexpr("(A(B)(D))")
    cfg = KernelConfig(KernelKind.PTK, 0.5, 0.5)
    r = raw(KernelKind.PTK, 0.5, 0.5)
    expected = kernel(a, b, r).value / math.sqrt(kernel(a, a, r).value * kernel(b, b, r).value)
    assert kernel(a, b, cfg).value == pytest.approx(expected, rel=1e-12)


# ---------- config ----------
@pytest.mark.parametrize("lam,mu", [(0.0, 0.4), (1.5, 0.4), (0.4, 0.0), (0.4, -1.0), (float("nan"), 0.4)])
def test_invalid_decays(lam, mu):
    with pytest.raises(InvalidKernelConfig):
        KernelConfig(KernelKind.PTK, lam, mu)


def test_mu_ignored_outside_ptk():
    assert KernelConfig(KernelKind.SSTK, 0.4, 0.9) == KernelConfig(KernelKind.SSTK, 0.4, 0.1)
    assert KernelConfig(KernelKind.PTK, 0.4, 0.9) != KernelConfig(KernelKind.PTK, 0.4, 0.1)


def test_kind_parse():
    assert KernelKind.parse("PTK") is KernelKind.PTK
    with pytest.raises(InvalidKernelConfig):
        KernelKind.parse("graph")


def test_kernel_requires_trees():
    with pytest.raises(DegenerateTree):
        kernel(None, parse_sexpr("(A)"))
