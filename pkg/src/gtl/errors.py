"""Exception types shared across the package."""


class GtlError(Exception):
    """Base class for all errors raised by this package."""

    code = "error"


class InputError(GtlError):
    """Malformed or inconsistent user input (files, ids, labels)."""

    code = "input"


class RangeError(GtlError):
    """An index (time, bin, state) outside its valid range."""

    code = "range"


class UsageError(GtlError):
    """An operation called in a way its contract forbids."""

    code = "usage"


class ParseError(GtlError):
    """Formula text that does not conform to the grammar."""

    code = "parse"

    def __init__(self, message, line, col, expected=()):
        self.line = line
        self.col = col
        self.expected = tuple(expected)
        detail = f"{message} at line {line}, column {col}"
        if expected:
            detail += " (expected " + " or ".join(expected) + ")"
        super().__init__(detail)


class OutOfScopeError(GtlError):
    """Formula outside the supported type-I/type-II co-safe/safe fragments."""

    code = "scope"


class InfeasibleError(GtlError):
    """A constraint (coverage, misclassification) cannot be met."""

    code = "infeasible"
