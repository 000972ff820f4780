# src/trees/model.py
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

from .errors import DegenerateTree, InvalidTree, TreeTooDeep

MAX_DEPTH = 10_000

_FORBIDDEN_KIND_CHARS = set("():\\")
_ESCAPES = {"\\": "\\\\", "(": "\\(", ")": "\\)"}


def escape_value(value: str) -> str:
    return "".join(_ESCAPES.get(c, c) for c in value)


@dataclass(frozen=True)
class Label:
    """Node label: a kind such as ``MethodDeclaration`` plus an optional value (``SimpleName:foo``)."""

    kind: str
    value: Optional[str] = None

    def __post_init__(self):
        if not self.kind or any(c in _FORBIDDEN_KIND_CHARS or c.isspace() for c in self.kind):
            raise InvalidTree(f"invalid label kind {self.kind!r}")
        if self.value is not None:
            trimmed = self.value.strip()
            if not trimmed:
                raise InvalidTree(f"empty value for label kind {self.kind!r}")
            object.__setattr__(self, "value", trimmed)

    @property
    def key(self) -> tuple[str, str]:
        # sortable form; None and "" never coexist since empty values are rejected
        return (self.kind, self.value or "")

    def __str__(self) -> str:
        if self.value is None:
            return self.kind
        return f"{self.kind}:{escape_value(self.value)}"


@dataclass(frozen=True)
class Tree:
    """Rooted ordered labeled tree, nodes stored in pre-order (root is node 0).

    Every child index is larger than its parent's, so iterating node indices
    in descending order visits children before parents.
    """

    labels: tuple[Label, ...]
    children: tuple[tuple[int, ...], ...]
    root: int = field(default=0)

    def __post_init__(self):
        if not self.labels:
            raise DegenerateTree("tree has no nodes")
        if len(self.labels) != len(self.children):
            raise InvalidTree("labels and children lists differ in length")
        if self.root != 0:
            raise InvalidTree("root must be node 0 (pre-order storage)")
        self._check_preorder()

    def _check_preorder(self) -> None:
        n = len(self.labels)
        expected = 0
        depth_max = 0
        stack = [(0, 1)]
        while stack:
            node, depth = stack.pop()
            if node != expected:
                raise InvalidTree(f"node {node} visited out of pre-order (expected {expected})")
            expected += 1
            if depth > depth_max:
                depth_max = depth
                if depth_max > MAX_DEPTH:
                    raise TreeTooDeep(depth_max, MAX_DEPTH)
            kids = self.children[node]
            for child in reversed(kids):
                if not 0 <= child < n:
                    raise InvalidTree(f"child index {child} out of range")
                stack.append((child, depth + 1))
            if expected > n:
                raise InvalidTree("cycle or shared child detected")
        if expected != n:
            raise InvalidTree(f"{n - expected} nodes unreachable from the root")
        object.__setattr__(self, "_depth", depth_max)

    @property
    def node_count(self) -> int:
        return len(self.labels)

    @property
    def depth(self) -> int:
        return self._depth  # type: ignore[attr-defined]

    def is_leaf(self, node: int) -> bool:
        return not self.children[node]

    @cached_property
    def productions(self) -> tuple[tuple, ...]:
        """Per node: (label key, child label keys), the unit STK/SSTK match on."""
        return tuple(
            (self.labels[i].key, tuple(self.labels[c].key for c in kids))
            for i, kids in enumerate(self.children)
        )

    @cached_property
    def sexpr(self) -> str:
        return self.serialize_from(self.root)

    def serialize_from(self, node: int) -> str:
        """Canonical s-expression of the subtree rooted at ``node``."""
        out: list[str] = []
        stack: list[Optional[int]] = [node]
        while stack:
            item = stack.pop()
            if item is None:
                out.append(")")
                continue
            out.append("(")
            out.append(str(self.labels[item]))
            stack.append(None)
            stack.extend(reversed(self.children[item]))
        return "".join(out)

    def __str__(self) -> str:
        return self.sexpr


class TreeBuilder:
    """Accumulates nodes in pre-order; parsers add a node right after its parent's earlier siblings' subtrees."""

    def __init__(self):
        self._labels: list[Label] = []
        self._children: list[list[int]] = []

    def add(self, label: Label, parent: Optional[int] = None) -> int:
        idx = len(self._labels)
        if parent is None and idx != 0:
            raise InvalidTree("only the first node may be the root")
        self._labels.append(label)
        self._children.append([])
        if parent is not None:
            self._children[parent].append(idx)
        return idx

    def __len__(self) -> int:
        return len(self._labels)

    def build(self) -> Tree:
        return Tree(tuple(self._labels), tuple(tuple(c) for c in self._children))


def tree_from_nested(node: tuple) -> Tree:
    """Build a Tree from ``(label, [child, ...])`` tuples; labels may be Label or ``"Kind"``/``"Kind:value"``."""
    builder = TreeBuilder()
    stack: list[tuple[tuple, Optional[int]]] = [(node, None)]
    while stack:
        (label, kids), parent = stack.pop()
        idx = builder.add(_as_label(label), parent)
        stack.extend((kid, idx) for kid in reversed(list(kids)))
    return builder.build()


def _as_label(label) -> Label:
    if isinstance(label, Label):
        return label
    kind, sep, value = str(label).partition(":")
    return Label(kind.strip(), value if sep else None)


