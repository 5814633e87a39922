"""Exception hierarchy shared by all gq modules."""


class GqError(Exception):
    """Base class for every error raised by this package."""


class ChartMismatchError(GqError):
    """Operands live over different variable universes."""


class GradingError(GqError):
    """A weight/degree precondition is violated (wrong weight, inhomogeneous input, ...)."""


class StructureError(GqError):
    """A structural identity required by a construction fails (L_Q omega != 0, d^2 != 0, ...)."""


class CompositionError(GqError):
    """Paths composed at mismatched endpoints."""


class InconsistentPathError(GqError):
    """Base curve and fiber samples of a path violate the anchor compatibility."""


class UnsupportedInputError(GqError):
    """Input is valid mathematics but outside what this package models."""


class ParseError(GqError):
    """Syntax error in a DSL program; carries line/column and the offending token."""

    def __init__(self, message, line, column, token=None):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column
        self.token = token


class SemanticError(GqError):
    """A parsed DSL program references unknown names or violates weight/arity rules."""

    def __init__(self, message, line=None, column=None):
        if line is not None:
            super().__init__(f"{line}:{column}: {message}")
        else:
            super().__init__(message)
        self.line = line
        self.column = column
