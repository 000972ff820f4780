from __future__ import annotations

from ..utils.errors import KernelGuardError


class SExprError(KernelGuardError):
    """S-expression decoding failure at a byte offset of the input."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnbalancedParens(SExprError):
    pass


class EmptyLabel(SExprError):
    pass


class TrailingGarbage(SExprError):
    pass


class TreeTooDeep(KernelGuardError):
    def __init__(self, depth: int, limit: int):
        super().__init__(f"tree depth {depth} exceeds the limit of {limit}")
        self.depth = depth
        self.limit = limit


class DegenerateTree(KernelGuardError):
    pass


class InvalidTree(KernelGuardError):
    pass


class EmptyInput(KernelGuardError):
    pass


class JavaParseError(KernelGuardError):
    pass


class JavaSyntaxError(JavaParseError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class UnsupportedConstruct(JavaParseError):
    def __init__(self, construct: str, line: int, column: int):
        super().__init__(f"unsupported construct '{construct}' (line {line}, column {column})")
        self.construct = construct
        self.line = line
        self.column = column
