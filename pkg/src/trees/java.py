# src/trees/java.py
"""Recursive-descent parser for the Java-like subset used by method-level changes.

Produces trees in the JDT/Gumtree node vocabulary (CompilationUnit,
TypeDeclaration, MethodDeclaration, Block, IfStatement, ...). Anything outside
the subset raises UnsupportedConstruct instead of being approximated.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from contextlib import contextmanager
from typing import Iterable, Iterator

from .errors import EmptyInput, JavaSyntaxError, UnsupportedConstruct
from .model import Tree, tree_from_nested

WRAPPER_CLASS = "__KernelGuardWrapper__"

# nested expressions, prefix operators and statements; each level costs about ten parser frames
MAX_NESTING = 40

MODIFIERS = {
    "public", "private", "protected", "static", "final", "abstract",
    "synchronized", "native", "strictfp", "transient", "volatile", "default",
}
PRIMITIVES = {"int", "long", "short", "byte", "char", "boolean", "float", "double"}

# keywords / operators outside the subset, mapped to the construct name reported
UNSUPPORTED_KEYWORDS = {
    "while": "while loop", "for": "for loop", "do": "do-while loop", "switch": "switch statement",
    "try": "try statement", "catch": "try statement", "finally": "try statement",
    "throw": "throw statement", "break": "break statement", "continue": "continue statement",
    "new": "object creation", "instanceof": "instanceof", "interface": "interface declaration",
    "enum": "enum declaration", "import": "import declaration", "package": "package declaration",
    "assert": "assert statement", "super": "super reference", "extends": "extends clause",
    "implements": "implements clause", "throws": "throws clause", "yield": "yield statement",
    "record": "record declaration",
}
UNSUPPORTED_OPS = {
    "++": "increment", "--": "decrement", "+=": "compound assignment", "-=": "compound assignment",
    "*=": "compound assignment", "/=": "compound assignment", "%=": "compound assignment",
    "->": "lambda", "::": "method reference", "[": "array", "]": "array", "?": "conditional expression",
    "@": "annotation", "&": "bitwise operator", "|": "bitwise operator", "^": "bitwise operator",
    "~": "bitwise operator", "<<": "shift operator", ">>": "shift operator",
}

_TOKEN_RE = re.compile(
    r"""
     (?P<ws>\s+)
    |(?P<comment>//[^\n]*|/\*.*?\*/)
    |(?P<number>0[xX][0-9a-fA-F]+[lL]?|(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?[fFdDlL]?)
    |(?P<string>"(?:\\.|[^"\\\n])*")
    |(?P<char>'(?:\\.|[^'\\\n])+')
    |(?P<ident>[A-Za-z_$][A-Za-z0-9_$]*)
    |(?P<op>->|::|<<|>>|\+\+|--|&&|\|\||==|!=|<=|>=|\+=|-=|\*=|/=|%=|[-+*/%<>=!(){};,.\[\]?:@&|^~])
    """,
    re.VERBOSE | re.DOTALL,
)


@dataclass(frozen=True)
class Token:
    kind: str  # ident | number | string | char | op | eof
    text: str
    line: int
    column: int


def tokenize_java(source: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    line, line_start = 1, 0
    n = len(source)
    while pos < n:
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise JavaSyntaxError(f"unexpected character {source[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        text = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, text, line, pos - line_start + 1))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            line_start = pos + text.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


def N(label: str, *children) -> tuple:
    return (label, [c for c in children if c is not None])


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.depth = 0

    # ---------- token helpers ----------
    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.peek()
        self.pos += 1
        return tok

    def at(self, text: str, ahead: int = 0) -> bool:
        tok = self.peek(ahead)
        return tok.kind in ("op", "ident") and tok.text == text

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if not self.at(text):
            self._reject(tok, f"expected {text!r}")
        return self.next()

    def expect_ident(self) -> Token:
        tok = self.peek()
        if tok.kind != "ident" or tok.text in UNSUPPORTED_KEYWORDS:
            self._reject(tok, "expected an identifier")
        return self.next()

    @contextmanager
    def nested(self) -> Iterator[None]:
        if self.depth >= MAX_NESTING:
            tok = self.peek()
            raise UnsupportedConstruct(f"nesting deeper than {MAX_NESTING}", tok.line, tok.column)
        self.depth += 1
        try:
            yield
        finally:
            self.depth -= 1

    def _reject(self, tok: Token, message: str):
        if tok.kind == "ident" and tok.text in UNSUPPORTED_KEYWORDS:
            raise UnsupportedConstruct(UNSUPPORTED_KEYWORDS[tok.text], tok.line, tok.column)
        if tok.kind == "op" and tok.text in UNSUPPORTED_OPS:
            raise UnsupportedConstruct(UNSUPPORTED_OPS[tok.text], tok.line, tok.column)
        found = tok.text or "end of input"
        raise JavaSyntaxError(f"{message}, found {found!r}", tok.line, tok.column)

    # ---------- declarations ----------
    def compilation_unit(self) -> tuple:
        types = []
        while self.peek().kind != "eof":
            types.append(self.type_declaration())
        if not types:
            self._reject(self.peek(), "expected a class declaration")
        return N("CompilationUnit", *types)

    def modifiers(self) -> list[tuple]:
        mods = []
        while self.peek().kind == "ident" and self.peek().text in MODIFIERS:
            mods.append(N(f"Modifier:{self.next().text}"))
        if self.at("@"):
            self._reject(self.peek(), "annotation")
        return mods

    def type_declaration(self) -> tuple:
        mods = self.modifiers()
        self.expect("class")
        name = self.expect_ident()
        if not self.at("{"):
            self._reject(self.peek(), "expected '{'")
        self.expect("{")
        members = []
        while not self.at("}"):
            if self.peek().kind == "eof":
                self._reject(self.peek(), "expected '}'")
            members.append(self.member())
        self.expect("}")
        return N("TypeDeclaration", *mods, N("TYPE_DECLARATION_KIND:class"), N(f"SimpleName:{name.text}"), *members)

    def member(self) -> tuple:
        mods = self.modifiers()
        tok = self.peek()
        if tok.kind == "ident" and tok.text == "class":
            raise UnsupportedConstruct("nested class", tok.line, tok.column)
        if tok.kind == "ident" and self.at("(", 1):
            raise UnsupportedConstruct("constructor", tok.line, tok.column)
        return_type = self.type_node(allow_void=True)
        name = self.expect_ident()
        if not self.at("("):
            raise UnsupportedConstruct("field declaration", name.line, name.column)
        self.expect("(")
        params = []
        if not self.at(")"):
            params.append(self.parameter())
            while self.at(","):
                self.next()
                params.append(self.parameter())
        self.expect(")")
        if self.at(";"):
            raise UnsupportedConstruct("abstract method", self.peek().line, self.peek().column)
        body = self.block()
        return N("MethodDeclaration", *mods, return_type, N(f"SimpleName:{name.text}"), *params, body)

    def parameter(self) -> tuple:
        mods = self.modifiers()
        ptype = self.type_node()
        name = self.expect_ident()
        return N("SingleVariableDeclaration", *mods, ptype, N(f"SimpleName:{name.text}"))

    def type_node(self, allow_void: bool = False) -> tuple:
        tok = self.peek()
        if tok.kind != "ident" or tok.text in UNSUPPORTED_KEYWORDS or tok.text in MODIFIERS:
            self._reject(tok, "expected a type")
        self.next()
        if tok.text in PRIMITIVES or (allow_void and tok.text == "void"):
            node = N(f"PrimitiveType:{tok.text}")
        else:
            parts = [tok.text]
            while self.at(".") and self.peek(1).kind == "ident":
                self.next()
                parts.append(self.next().text)
            name = N(f"SimpleName:{parts[0]}") if len(parts) == 1 else N(f"QualifiedName:{'.'.join(parts)}")
            node = N("SimpleType", name)
        if self.at("<"):
            raise UnsupportedConstruct("generic type", self.peek().line, self.peek().column)
        if self.at("["):
            raise UnsupportedConstruct("array", self.peek().line, self.peek().column)
        return node

    # ---------- statements ----------
    def block(self) -> tuple:
        self.expect("{")
        stmts = []
        while not self.at("}"):
            if self.peek().kind == "eof":
                self._reject(self.peek(), "expected '}'")
            stmts.append(self.statement())
        self.expect("}")
        return N("Block", *stmts)

    def statement(self) -> tuple:
        with self.nested():
            return self._statement()

    def _statement(self) -> tuple:
        tok = self.peek()
        if self.at("{"):
            return self.block()
        if self.at(";"):
            self.next()
            return N("EmptyStatement")
        if tok.kind == "ident":
            if tok.text == "if":
                return self.if_statement()
            if tok.text == "return":
                self.next()
                value = None if self.at(";") else self.expression()
                self.expect(";")
                return N("ReturnStatement", value)
            if tok.text in UNSUPPORTED_KEYWORDS:
                self._reject(tok, "statement")
            if tok.text in ("else", "class"):
                self._reject(tok, "expected a statement")
            if self._starts_declaration():
                return self.local_declaration()
        expr = self.expression()
        self.expect(";")
        return N("ExpressionStatement", expr)

    def _starts_declaration(self) -> bool:
        tok = self.peek()
        if tok.text in PRIMITIVES or tok.text == "final":
            return True
        nxt = self.peek(1)
        if nxt.kind == "ident" and nxt.text not in UNSUPPORTED_KEYWORDS:
            return True
        # qualified type: a.b.C name
        ahead = 1
        while self.at(".", ahead) and self.peek(ahead + 1).kind == "ident":
            ahead += 2
        return ahead > 1 and self.peek(ahead).kind == "ident"

    def local_declaration(self) -> tuple:
        mods = self.modifiers()
        vtype = self.type_node()
        fragments = [self.declarator()]
        while self.at(","):
            self.next()
            fragments.append(self.declarator())
        self.expect(";")
        return N("VariableDeclarationStatement", *mods, vtype, *fragments)

    def declarator(self) -> tuple:
        name = self.expect_ident()
        init = None
        if self.at("="):
            self.next()
            init = self.expression()
        if self.at("["):
            self._reject(self.peek(), "array")
        return N("VariableDeclarationFragment", N(f"SimpleName:{name.text}"), init)

    def if_statement(self) -> tuple:
        self.expect("if")
        self.expect("(")
        cond = self.expression()
        self.expect(")")
        then = self.statement()
        otherwise = None
        if self.at("else"):
            self.next()
            otherwise = self.statement()
        return N("IfStatement", cond, then, otherwise)

    # ---------- expressions ----------
    def expression(self) -> tuple:
        with self.nested():
            return self._expression()

    def _expression(self) -> tuple:
        lhs = self.binary(0)
        if self.at("="):
            if lhs[0].split(":")[0] not in ("SimpleName", "FieldAccess"):
                self._reject(self.peek(), "assignment target")
            self.next()
            rhs = self.expression()
            return N("Assignment", lhs, N("ASSIGNMENT_OPERATOR:="), rhs)
        tok = self.peek()
        if tok.kind == "op" and tok.text in UNSUPPORTED_OPS:
            self._reject(tok, "operator")
        return lhs

    _LEVELS = (("||",), ("&&",), ("==", "!="), ("<", ">", "<=", ">="), ("+", "-"), ("*", "/", "%"))

    def binary(self, level: int) -> tuple:
        if level == len(self._LEVELS):
            return self.unary()
        left = self.binary(level + 1)
        ops = self._LEVELS[level]
        while self.peek().kind == "op" and self.peek().text in ops:
            op = self.next().text
            right = self.binary(level + 1)
            left = N("InfixExpression", left, N(f"INFIX_EXPRESSION_OPERATOR:{op}"), right)
        return left

    def unary(self) -> tuple:
        if self.at("!") or self.at("-"):
            op = self.next().text
            with self.nested():
                operand = self.unary()
            return N("PrefixExpression", N(f"PREFIX_EXPRESSION_OPERATOR:{op}"), operand)
        return self.postfix(self.primary())

    def postfix(self, expr: tuple) -> tuple:
        while self.at("."):
            self.next()
            name = self.expect_ident()
            if self.at("("):
                expr = N("MethodInvocation", expr, N(f"SimpleName:{name.text}"), *self.arguments())
            else:
                expr = N("FieldAccess", expr, N(f"SimpleName:{name.text}"))
        tok = self.peek()
        if tok.kind == "op" and tok.text in ("++", "--", "["):
            self._reject(tok, "operator")
        return expr

    def arguments(self) -> list[tuple]:
        self.expect("(")
        args = []
        if not self.at(")"):
            args.append(self.expression())
            while self.at(","):
                self.next()
                args.append(self.expression())
        self.expect(")")
        return args

    def primary(self) -> tuple:
        tok = self.peek()
        if tok.kind == "number":
            self.next()
            return N(f"NumberLiteral:{tok.text}")
        if tok.kind == "string":
            self.next()
            return N(f"StringLiteral:{tok.text}")
        if tok.kind == "char":
            self.next()
            return N(f"CharacterLiteral:{tok.text}")
        if self.at("("):
            self.next()
            inner = self.expression()
            self.expect(")")
            return N("ParenthesizedExpression", inner)
        if tok.kind == "ident":
            if tok.text in ("true", "false"):
                self.next()
                return N(f"BooleanLiteral:{tok.text}")
            if tok.text == "null":
                self.next()
                return N("NullLiteral")
            if tok.text == "this":
                self.next()
                return N("ThisExpression")
            if tok.text in UNSUPPORTED_KEYWORDS:
                self._reject(tok, "expression")
            name = self.expect_ident()
            if self.at("("):
                return N("MethodInvocation", N(f"SimpleName:{name.text}"), *self.arguments())
            return N(f"SimpleName:{name.text}")
        self._reject(tok, "expected an expression")


def parse_java_subset(source: str) -> Tree:
    """Parse a compilation unit of the supported subset into a JDT-vocabulary Tree."""
    parser = _Parser(tokenize_java(source))
    try:
        nested = parser.compilation_unit()
    except RecursionError:
        tok = parser.peek()
        raise UnsupportedConstruct("deep nesting", tok.line, tok.column) from None
    return tree_from_nested(nested)


def wrap_in_dummy_class(method_sources: Iterable[str]) -> str:
    sources = [s.strip() for s in method_sources]
    if not sources:
        raise EmptyInput("no method sources to wrap")
    if any(not s for s in sources):
        raise EmptyInput("blank method source")
    return f"public class {WRAPPER_CLASS} {{ " + " ".join(sources) + " }"


def source_to_tree(method_sources: Iterable[str] | str) -> Tree:
    if isinstance(method_sources, str):
        method_sources = [method_sources]
    return parse_java_subset(wrap_in_dummy_class(method_sources))

