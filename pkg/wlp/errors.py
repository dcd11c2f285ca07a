"""
Error Hierarchy - Weighted Logic Programming Engine
===================================================
Typed exceptions shared by every module. Library code raises these;
only the CLI turns them into exit codes.

Exit codes:
- 1 usage / configuration
- 2 parse error
- 3 validation error (also carrier and term type errors)
- 4 non-convergence, divergence, NaN
- 5 transform refusal (alignment, collapse, name clash)

Author: WLP Engine
Version: 1.0.0
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence


# ============================================================
# DIAGNOSTICS
# ============================================================

@dataclass(frozen=True)
class SourceSpan:
    """1-based position of a statement in a .wlp or .tsv source."""
    line: int
    column: int = 1

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


@dataclass(frozen=True)
class Diagnostic:
    """One finding of kernel.validate."""
    severity: str
    location: str
    message: str

    def __str__(self) -> str:
        return f"{self.severity} {self.location}: {self.message}"


# ============================================================
# BASE
# ============================================================

class WlpError(Exception):
    """Base class; `exit_code` is what the CLI returns."""
    exit_code = 1


class UsageError(WlpError):
    exit_code = 1


class ConfigError(WlpError):
    exit_code = 1


class ParseError(WlpError):
    """Syntax error in program text or a fact table."""
    exit_code = 2

    def __init__(self, message: str, span: Optional[SourceSpan] = None):
        self.span = span
        self.raw_message = message
        if span is not None:
            message = f"line {span.line}, column {span.column}: {message}"
        super().__init__(message)


class ValidationError(WlpError):
    exit_code = 3

    def __init__(self, diagnostics: Sequence[Diagnostic]):
        self.diagnostics: List[Diagnostic] = list(diagnostics)
        lines = "; ".join(str(d) for d in self.diagnostics)
        super().__init__(f"program failed validation: {lines}")


class CarrierError(WlpError, TypeError):
    """A value does not belong to the semiring's carrier."""
    exit_code = 3


class TermTypeError(WlpError, TypeError):
    """Arithmetic applied to a non-integer term."""
    exit_code = 3


class GoalUnderivableError(WlpError):
    exit_code = 3


# ============================================================
# SOLVER
# ============================================================

class DivergenceError(WlpError):
    """Iteration did not converge (or the chart grew without bound)."""
    exit_code = 4

    def __init__(self, message: str, residual: float = float("inf"), iterations: int = 0):
        self.residual = residual
        self.iterations = iterations
        super().__init__(message)


class NumericError(WlpError, ArithmeticError):
    """A NaN appeared, e.g. from inf + (-inf) in the entropy semiring."""
    exit_code = 4


class SolveModeError(UsageError):
    pass


# ============================================================
# TRANSFORMS
# ============================================================

class TransformError(WlpError):
    exit_code = 5


class AlignmentError(TransformError):
    pass


class NameClashError(TransformError):
    pass


class CollapseError(TransformError):
    pass


class UnknownRuleError(TransformError):
    pass


class UnknownVariableError(TransformError):
    pass


class GeneralizeError(TransformError):
    pass


class PositionError(TransformError):
    pass


class PairingError(TransformError):
    """A pairing names an unknown predicate or reuses one."""


class UnsupportedProjectionError(TransformError):
    """The proof carries no product provenance, or crosses a generalized axiom."""


# ============================================================
# INFOMETRICS
# ============================================================

class InfometricsError(WlpError):
    exit_code = 3


class ZeroMassError(InfometricsError):
    pass


class NegativeWeightError(InfometricsError):
    pass


class MismatchedAxiomsError(InfometricsError):
    pass
