"""Diagnostic records shared by the parser and the validator."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Any


@dataclass(frozen=True)
class SourceSpan:
    """A location in a source file; line and column are 1-based."""

    file: str
    line: int
    column: int
    length: int = 0


class Severity(enum.Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class Diagnostic:
    """A single validation or parse finding."""

    code: str
    severity: Severity
    site: str
    message: str
    suggestion: str | None = None
    span: SourceSpan | None = None

    @property
    def sort_key(self) -> tuple[str, str]:
        return (self.code, self.site)

    def to_dict(self) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "code": self.code,
            "severity": self.severity.value,
            "site": self.site,
            "message": self.message,
            "suggestion": self.suggestion,
        }
        if self.span is not None:
            doc["span"] = {
                "file": self.span.file,
                "line": self.span.line,
                "column": self.span.column,
                "length": self.span.length,
            }
        return doc

    def render(self) -> str:
        loc = ""
        if self.span is not None:
            loc = f"{self.span.file}:{self.span.line}:{self.span.column}: "
        return f"{loc}{self.code} [{self.severity.value}] {self.site}: {self.message}"


def has_errors(diagnostics: list[Diagnostic]) -> bool:
    return any(d.severity is Severity.ERROR for d in diagnostics)
