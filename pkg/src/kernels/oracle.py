# src/kernels/oracle.py
"""Brute-force fragment enumeration, used to check the kernels in tests.

Exponential in tree size; guarded by a node cap.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations, product

from ..trees.model import Tree
from ..utils.errors import KernelGuardError
from .tree_kernels import KernelKind

DEFAULT_ORACLE_CAP = 12


class TreeTooLargeForOracle(KernelGuardError):
    def __init__(self, node_count: int, cap: int):
        super().__init__(f"oracle enumeration capped at {cap} nodes, tree has {node_count}")
        self.node_count = node_count
        self.cap = cap


@dataclass(frozen=True)
class FragmentMultiset:
    counts: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        bad = {k: v for k, v in self.counts.items() if v < 1}
        if bad:
            raise ValueError(f"fragment counts must be positive: {bad}")

    def dot(self, other: "FragmentMultiset") -> int:
        small, big = sorted((self.counts, other.counts), key=len)
        return sum(c * big.get(frag, 0) for frag, c in small.items())

    def total(self) -> int:
        return sum(self.counts.values())

    def __len__(self) -> int:
        return len(self.counts)


def _rooted_stk(t: Tree, n: int, memo: dict) -> list[str]:
    return [t.serialize_from(n)] if t.children[n] else []


def _rooted_sstk(t: Tree, n: int, memo: dict) -> list[str]:
    if n in memo:
        return memo[n]
    kids = t.children[n]
    out: list[str] = []
    if kids:
        # each child is either cut (kept as a bare label) or expanded by one of its own fragments
        options = [[f"({t.labels[c]})"] + _rooted_sstk(t, c, memo) for c in kids]
        head = str(t.labels[n])
        out = [f"({head}{''.join(choice)})" for choice in product(*options)]
    memo[n] = out
    return out


def _rooted_ptk(t: Tree, n: int, memo: dict) -> list[str]:
    if n in memo:
        return memo[n]
    kids = t.children[n]
    head = str(t.labels[n])
    out = [f"({head})"]
    for size in range(1, len(kids) + 1):
        for subset in combinations(kids, size):
            options = [_rooted_ptk(t, c, memo) for c in subset]
            out.extend(f"({head}{''.join(choice)})" for choice in product(*options))
    memo[n] = out
    return out


_ROOTED = {
    KernelKind.STK: _rooted_stk,
    KernelKind.SSTK: _rooted_sstk,
    KernelKind.PTK: _rooted_ptk,
}


def oracle_fragments(t: Tree, kind: KernelKind | str, cap: int = DEFAULT_ORACLE_CAP) -> FragmentMultiset:
    """Every fragment of the requested family, keyed by canonical s-expression."""
    if t.node_count > cap:
        raise TreeTooLargeForOracle(t.node_count, cap)
    rooted = _ROOTED[KernelKind.parse(kind)]
    memo: dict[int, list[str]] = {}
    counts: Counter[str] = Counter()
    for n in range(t.node_count):
        counts.update(rooted(t, n, memo))
    return FragmentMultiset(dict(counts))


def oracle_kernel(t1: Tree, t2: Tree, kind: KernelKind | str, cap: int = DEFAULT_ORACLE_CAP) -> int:
    return oracle_fragments(t1, kind, cap).dot(oracle_fragments(t2, kind, cap))
