"""Exception hierarchy. Every error raised on purpose derives from OscihomError."""


class OscihomError(Exception):
    """Base class; ``module`` names the subsystem that failed."""

    module = "oscihom"


class DomainError(OscihomError, ValueError):
    pass


class AccuracyError(OscihomError, ArithmeticError):
    """A refinement loop could not certify its result."""


class BudgetError(OscihomError, RuntimeError):
    """The requested computation exceeds the node budget."""


class UnsupportedDimensionError(DomainError):
    pass


class ConditioningError(DomainError):
    pass


class SolverError(OscihomError, RuntimeError):
    def __init__(self, message, rcond=None):
        super().__init__(message if rcond is None else f"{message} (rcond={rcond:.3e})")
        self.rcond = rcond


class UndeterminedDirectionError(DomainError):
    module = "geometry"


class _Located(OscihomError):
    def __init__(self, message, text="", column=None):
        self.text = text
        self.column = column
        where = "" if column is None else f" at column {column + 1}"
        src = f" in {text!r}" if text else ""
        super().__init__(f"{message}{where}{src}")


class ExpressionSyntaxError(_Located, ValueError):
    module = "periodic_field"


class EvaluationError(_Located, ArithmeticError):
    module = "periodic_field"
