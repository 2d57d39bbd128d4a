"""Exception hierarchy. Every error the CLI reports as a data/usage error derives from ProcdiffError."""

from __future__ import annotations

from dataclasses import dataclass


class ProcdiffError(Exception):
    pass


class ModelError(ProcdiffError, ValueError):
    pass


@dataclass(frozen=True)
class ParseDiagnostic:
    line: int
    message: str
    severity: str = "error"

    def __str__(self) -> str:
        return f"line {self.line}: {self.severity}: {self.message}"


class ParseError(ProcdiffError):
    """Raised when model or schema text cannot be parsed; carries the diagnostics."""

    def __init__(self, diagnostics: list[ParseDiagnostic], source_name: str = "<input>"):
        self.diagnostics = diagnostics
        self.source_name = source_name
        super().__init__("; ".join(f"{source_name}: {d}" for d in diagnostics))

    @property
    def line(self) -> int:
        return self.diagnostics[0].line


class RepositoryError(ProcdiffError):
    pass


class DeltaError(ProcdiffError):
    def __init__(self, message: str, missing=()):
        self.missing = list(missing)
        super().__init__(message)


class PipelineSyntaxError(ProcdiffError):
    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"{message} (at offset {offset})")


class PipelineTypeError(ProcdiffError):
    def __init__(self, stage_index: int, stage_name: str, expected: str, actual: str):
        self.stage_index = stage_index
        self.stage_name = stage_name
        self.expected = expected
        self.actual = actual
        super().__init__(
            f"stage {stage_index} ({stage_name}): expected {expected}, got {actual}"
        )


class EvalError(ProcdiffError):
    def __init__(self, message: str, stage_index: int | None = None):
        self.stage_index = stage_index
        prefix = f"stage {stage_index}: " if stage_index is not None else ""
        super().__init__(prefix + message)


class TreeError(ProcdiffError):
    pass
