# src/kernels/tree_kernels.py
"""Convolution tree kernels over pre-order trees: STK, SSTK and PTK.

K(T1, T2) = sum of delta(n1, n2) over node pairs. Only pairs whose match key
agrees (production for STK/SSTK, label for PTK) are visited; they come from a
sorted join of the two node lists and are evaluated children-first, so every
child delta is already in the cache when its parent pair is reached.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Callable, Hashable, Optional

from ..trees.errors import DegenerateTree
from ..trees.model import Tree
from ..utils.errors import KernelGuardError

DEFAULT_LAMBDA = 0.4
DEFAULT_MU = 0.4


class InvalidKernelConfig(KernelGuardError):
    pass


class KernelKind(str, Enum):
    STK = "stk"
    SSTK = "sstk"
    PTK = "ptk"

    @classmethod
    def parse(cls, value: "KernelKind | str") -> "KernelKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise InvalidKernelConfig(f"unknown kernel kind {value!r} (expected stk, sstk or ptk)") from None


@dataclass(frozen=True)
class KernelConfig:
    kind: KernelKind = KernelKind.PTK
    lam: float = DEFAULT_LAMBDA
    mu: float = DEFAULT_MU
    normalize: bool = True

    def __post_init__(self):
        object.__setattr__(self, "kind", KernelKind.parse(self.kind))
        for name in ("lam", "mu"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or math.isnan(v) or not 0 < v <= 1:
                raise InvalidKernelConfig(f"{name} must be in (0, 1], got {v!r}")
        if self.kind is not KernelKind.PTK and self.mu != DEFAULT_MU:
            # mu only shapes PTK; fold it so equal STK/SSTK configs hash equal
            object.__setattr__(self, "mu", DEFAULT_MU)


@dataclass(frozen=True)
class SimilarityScore:
    value: float

    def __post_init__(self):
        if self.value < 0 or math.isnan(self.value):
            raise ValueError(f"similarity must be non-negative, got {self.value!r}")

    def __float__(self) -> float:
        return self.value


# ---------- single-pair deltas ----------
def delta_stk(t1: Tree, n1: int, t2: Tree, n2: int, lam: float = DEFAULT_LAMBDA) -> float:
    """Subtree delta: the whole descendancy of n1 must equal that of n2."""
    return _delta_one(t1, n1, t2, n2, KernelConfig(KernelKind.STK, lam, DEFAULT_MU, False))


def delta_sstk(t1: Tree, n1: int, t2: Tree, n2: int, lam: float = DEFAULT_LAMBDA) -> float:
    return _delta_one(t1, n1, t2, n2, KernelConfig(KernelKind.SSTK, lam, DEFAULT_MU, False))


def delta_ptk(t1: Tree, n1: int, t2: Tree, n2: int, lam: float = DEFAULT_LAMBDA, mu: float = DEFAULT_MU) -> float:
    return _delta_one(t1, n1, t2, n2, KernelConfig(KernelKind.PTK, lam, mu, False))


def _delta_one(t1: Tree, n1: int, t2: Tree, n2: int, cfg: KernelConfig) -> float:
    for t, n in ((t1, n1), (t2, n2)):
        if not 0 <= n < t.node_count:
            raise IndexError(f"node {n} not in tree of {t.node_count} nodes")
    # pairs earlier in pre-order cannot sit below (n1, n2)
    pairs = [(a, b) for a, b in _matched_pairs(t1, t2, cfg.kind) if a >= n1 and b >= n2]
    cache = _fill_cache(t1, t2, pairs, cfg)
    return cache.get((n1, n2), 0.0)


# ---------- node-pair selection ----------
def _match_key(t: Tree, kind: KernelKind) -> Callable[[int], Hashable]:
    if kind is KernelKind.PTK:
        return lambda i: t.labels[i].key
    return lambda i: t.productions[i]


def _node_list(t: Tree, kind: KernelKind) -> list[tuple]:
    key = _match_key(t, kind)
    nodes = range(t.node_count)
    if kind is not KernelKind.PTK:
        # leaves are never the root of an STK/SSTK fragment
        nodes = (i for i in nodes if t.children[i])
    return sorted((key(i), i) for i in nodes)


def _matched_pairs(t1: Tree, t2: Tree, kind: KernelKind) -> list[tuple[int, int]]:
    """Sorted merge-join of the two node lists, returned children-first."""
    a = _node_list(t1, kind)
    b = _node_list(t2, kind)
    pairs: list[tuple[int, int]] = []
    i = j = 0
    while i < len(a) and j < len(b):
        ka, kb = a[i][0], b[j][0]
        if ka < kb:
            i += 1
        elif ka > kb:
            j += 1
        else:
            i_end = i
            while i_end < len(a) and a[i_end][0] == ka:
                i_end += 1
            j_end = j
            while j_end < len(b) and b[j_end][0] == kb:
                j_end += 1
            for _, n1 in a[i:i_end]:
                for _, n2 in b[j:j_end]:
                    pairs.append((n1, n2))
            i, j = i_end, j_end
    pairs.sort(reverse=True)
    return pairs


# ---------- cache filling ----------
def _fill_cache(t1: Tree, t2: Tree, pairs: list[tuple[int, int]], cfg: KernelConfig) -> dict:
    cache: dict[tuple[int, int], float] = {}
    lam = cfg.lam
    if cfg.kind is KernelKind.STK:
        for n1, n2 in pairs:
            prod = lam
            for c1, c2 in zip(t1.children[n1], t2.children[n2]):
                leaf1, leaf2 = not t1.children[c1], not t2.children[c2]
                if leaf1 and leaf2:
                    continue
                if leaf1 != leaf2:
                    prod = 0.0
                    break
                prod *= cache.get((c1, c2), 0.0)
                if prod == 0.0:
                    break
            cache[(n1, n2)] = prod
    elif cfg.kind is KernelKind.SSTK:
        for n1, n2 in pairs:
            prod = lam
            for c1, c2 in zip(t1.children[n1], t2.children[n2]):
                prod *= 1.0 + cache.get((c1, c2), 0.0)
            cache[(n1, n2)] = prod
    else:
        lam2 = lam * lam
        for n1, n2 in pairs:
            kids1, kids2 = t1.children[n1], t2.children[n2]
            total = 0.0
            if kids1 and kids2:
                total = _ptk_child_sum(kids1, kids2, cache, lam)
            cache[(n1, n2)] = cfg.mu * (lam2 + total)
    return cache


def _ptk_child_sum(kids1: tuple[int, ...], kids2: tuple[int, ...], cache: dict, lam: float) -> float:
    """Sum over equal-length child subsequences, weighted by lam ** (span1 + span2).

    d[i][j] holds the weight of subsequence pairs ending exactly at (i, j);
    s[i][j] accumulates d over the (i, j) prefix rectangle with the gap decay.
    """
    m, n = len(kids1), len(kids2)
    lam2 = lam * lam
    s_prev = [0.0] * (n + 1)
    total = 0.0
    for i in range(1, m + 1):
        s_cur = [0.0] * (n + 1)
        c1 = kids1[i - 1]
        for j in range(1, n + 1):
            delta = cache.get((c1, kids2[j - 1]), 0.0)
            d = delta * (1.0 + lam2 * s_prev[j - 1]) if delta else 0.0
            total += d
            s_cur[j] = d + lam * s_prev[j] + lam * s_cur[j - 1] - lam2 * s_prev[j - 1]
        s_prev = s_cur
    return total


def _raw_kernel(t1: Tree, t2: Tree, cfg: KernelConfig) -> float:
    pairs = _matched_pairs(t1, t2, cfg.kind)
    if not pairs:
        return 0.0
    cache = _fill_cache(t1, t2, pairs, cfg)
    # summed in pair order so a given ordered pair always yields the same float
    return math.fsum(cache[p] for p in pairs)


@lru_cache(maxsize=8192)
def self_kernel(t: Tree, cfg: KernelConfig) -> float:
    return _raw_kernel(t, t, cfg)


def _canonical_order(t1: Tree, t2: Tree) -> tuple[Tree, Tree]:
    return (t2, t1) if t2.sexpr < t1.sexpr else (t1, t2)


def kernel(t1: Tree, t2: Tree, cfg: Optional[KernelConfig] = None) -> SimilarityScore:
    """K(t1, t2) under cfg; symmetric and, when normalized, within [0, 1]."""
    cfg = cfg or KernelConfig()
    for t in (t1, t2):
        if t is None or not isinstance(t, Tree):
            raise DegenerateTree("kernel needs two non-empty trees")
    a, b = _canonical_order(t1, t2)
    raw = _raw_kernel(a, b, cfg)
    if not cfg.normalize:
        return SimilarityScore(raw)
    if raw == 0.0:
        return SimilarityScore(0.0)
    kaa, kbb = self_kernel(a, cfg), self_kernel(b, cfg)
    if kaa == 0.0 or kbb == 0.0:
        return SimilarityScore(0.0)
    return SimilarityScore(min(1.0, raw / math.sqrt(kaa * kbb)))
