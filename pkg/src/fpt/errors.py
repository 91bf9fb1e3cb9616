"""Exception hierarchy shared across the package."""


class FptError(Exception):
    """Base class for all package errors."""


class ConfigError(FptError, ValueError):
    """Invalid configuration: model spec, threshold, cohort spec, shape parameters."""


class DomainError(FptError, ValueError):
    """Input outside the mathematical domain of an operation (e.g. non-finite)."""


class SchemaViolation(FptError, ValueError):
    """A data row contradicts the declared schema; names the row and variable."""

    def __init__(self, message: str, *, row: int | None = None, variable: str | None = None):
        super().__init__(message)
        self.row = row
        self.variable = variable


class ConstructionError(FptError):
    """Tree induction cannot proceed (e.g. empty dataset)."""


class QueryError(FptError, ValueError):
    """A query, event or substitution references something the model does not declare."""


class UndefinedConditionalError(FptError):
    """Conditioning on a set of statements with zero probability mass."""

    def __init__(self, conditions):
        self.conditions = list(conditions)
        pretty = ", ".join(f"{s.variable}={s.value}" for s in self.conditions) or "(empty)"
        super().__init__(f"conditional probability undefined: P({pretty}) = 0")


class StratificationError(FptError):
    """Stratified splitting requires both classes to be present."""
