"""Source positions, diagnostics and the error hierarchy shared by all tools."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True, order=True)
class SourceSpan:
    """Half-open region of an input file, 1-based lines and columns."""

    file: str = "<input>"
    line: int = 1
    col: int = 1
    end_line: int = 1
    end_col: int = 1

    def __post_init__(self):
        if (self.end_line, self.end_col) < (self.line, self.col):
            raise ValueError("span end precedes start")

    def __str__(self):
        return f"{self.file}:{self.line}:{self.col}"


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    code: str  # machine readable, e.g. "unresolved-name"
    message: str
    span: SourceSpan = field(default_factory=SourceSpan)

    def __str__(self):
        return f"{self.span}: {self.severity}[{self.code}]: {self.message}"


class CodaError(Exception):
    """Base for all toolkit errors."""


class ModelError(CodaError):
    """A model failed validation; carries the full list of diagnostics."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


class ParseFailure(CodaError):
    """Input text could not be parsed; carries diagnostics with spans."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


class KernelError(CodaError):
    """Runtime fault inside the execution kernel (NotEnabled, type faults...)."""


class NotEnabled(KernelError):
    pass


class DeadlockReached(KernelError):
    def __init__(self, message, state=None, trace=None):
        super().__init__(message)
        self.state = state
        self.trace = trace


class ScheduleUnsatisfiable(KernelError):
    pass


class GoldenError(CodaError):
    """Golden-file comparison infrastructure error (not a divergence)."""


class StaleGolden(GoldenError):
    pass


class FormatError(GoldenError):
    pass


class RefinementSpecError(CodaError):
    """Ill-formed refinement pairing (unmapped event/state, ill-typed gluing)."""
