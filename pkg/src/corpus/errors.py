from __future__ import annotations

from typing import Optional

from ..utils.errors import KernelGuardError


class MalformedRecord(KernelGuardError):
    def __init__(self, message: str, line_number: Optional[int] = None):
        where = f" at line {line_number}" if line_number is not None else ""
        super().__init__(f"{message}{where}")
        self.line_number = line_number


class UnknownLabel(MalformedRecord):
    def __init__(self, label: str, line_number: Optional[int] = None):
        super().__init__(f"unknown label {label!r}", line_number)
        self.label = label


class EmptyCorpus(KernelGuardError):
    pass


class UnsortedRecords(KernelGuardError):
    pass


class MixedProjects(KernelGuardError):
    def __init__(self, projects):
        super().__init__(f"records span several projects: {sorted(projects)}")
        self.projects = sorted(projects)


class DanglingReference(KernelGuardError):
    pass
