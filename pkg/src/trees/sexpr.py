# src/trees/sexpr.py
"""S-expression codec for ASTs.

Grammar: ``tree := '(' label tree* ')'`` and ``label := kind (':' value)?``.
Values may contain any character; ``(``, ``)`` and ``\\`` are escaped with a
backslash. Whitespace between nodes and around the kind/value is ignored.
"""
from __future__ import annotations

from pathlib import Path
from typing import Iterable, Iterator

from .errors import EmptyLabel, InvalidTree, SExprError, TrailingGarbage, TreeTooDeep, UnbalancedParens
from .model import MAX_DEPTH, Label, Tree, TreeBuilder


class InvalidLabel(SExprError):
    pass


def _byte_offset(text: str, index: int) -> int:
    return len(text[:index].encode("utf-8"))


def _skip_ws(text: str, i: int) -> int:
    n = len(text)
    while i < n and text[i].isspace():
        i += 1
    return i


def _read_label(text: str, start: int) -> tuple[Label, int]:
    buf: list[str] = []
    colon_at = -1
    i = start
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\\":
            if i + 1 >= n:
                raise UnbalancedParens("input ends inside an escape", _byte_offset(text, n))
            buf.append(text[i + 1])
            i += 2
            continue
        if c in "()":
            break
        if c == ":" and colon_at < 0:
            colon_at = len(buf)
        buf.append(c)
        i += 1
    else:
        raise UnbalancedParens("input ends inside a label", _byte_offset(text, n))

    raw = "".join(buf)
    if colon_at < 0:
        kind, value = raw.strip(), None
    else:
        kind, value = raw[:colon_at].strip(), raw[colon_at + 1:]
        if not value.strip():
            raise EmptyLabel("empty label value", _byte_offset(text, start))
    if not kind:
        raise EmptyLabel("empty label kind", _byte_offset(text, start))
    try:
        return Label(kind, value), i
    except InvalidTree as e:
        raise InvalidLabel(str(e), _byte_offset(text, start)) from e


def parse_sexpr(text: str) -> Tree:
    """Parse one s-expression tree; nesting is handled iteratively so deep trees do not hit the recursion limit."""
    n = len(text)
    i = _skip_ws(text, 0)
    if i >= n or text[i] != "(":
        raise UnbalancedParens("expected '('", _byte_offset(text, i))

    builder = TreeBuilder()
    open_nodes: list[int] = []
    while True:
        # text[i] == "(" here
        label, i = _read_label(text, i + 1)
        node = builder.add(label, open_nodes[-1] if open_nodes else None)
        open_nodes.append(node)
        if len(open_nodes) > MAX_DEPTH:
            raise TreeTooDeep(len(open_nodes), MAX_DEPTH)

        while True:
            i = _skip_ws(text, i)
            if i >= n:
                raise UnbalancedParens("unclosed '('", _byte_offset(text, n))
            c = text[i]
            if c == "(":
                break
            if c == ")":
                open_nodes.pop()
                i += 1
                if not open_nodes:
                    end = _skip_ws(text, i)
                    if end < n and text[end] == ")":
                        raise UnbalancedParens("unmatched ')'", _byte_offset(text, end))
                    if end < n:
                        raise TrailingGarbage("text after the root closes", _byte_offset(text, end))
                    return builder.build()
                continue
            raise TrailingGarbage("unexpected text after a child node", _byte_offset(text, i))


def serialize_sexpr(tree: Tree) -> str:
    return tree.sexpr


def read_asts(path: Path) -> list[Tree]:
    """Read a line-delimited ``.asts`` file (or a single-tree file)."""
    text = Path(path).read_text(encoding="utf-8")
    return list(iter_asts(text.splitlines()))


def iter_asts(lines: Iterable[str]) -> Iterator[Tree]:
    for line in lines:
        if line.strip():
            yield parse_sexpr(line)


def write_asts(path: Path, trees: Iterable[Tree]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for t in trees:
            f.write(serialize_sexpr(t))
            f.write("\n")
    return path
