"""Exception types shared across the package."""


class AggraphError(Exception):
    """Base class for every error this package raises on purpose."""


class InputError(AggraphError, ValueError):
    """Malformed user input: bad graph literal, bad config, bad arguments."""


class ParseError(InputError):
    """Term syntax or scoping error, with source position."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, col {col})")
        self.line = line
        self.col = col


class CapacityError(AggraphError):
    """A configured size cap would be exceeded; refusing to continue."""


class BudgetError(AggraphError):
    """Estimated evaluation cost exceeds the configured budget."""


class CapabilityError(AggraphError):
    """A connective lacks the capability needed here (e.g. no asym rule)."""


class ConnectiveClassError(AggraphError):
    """A connective is outside the function class an operation requires."""


class IrrationalityError(AggraphError):
    """A density comparison against alpha fell inside the numeric guard."""

    def __init__(self, alpha: float, e: int, v: int, margin: float):
        super().__init__(
            f"alpha={alpha!r} is numerically indistinguishable from {v}/{e} "
            f"(|e*alpha - v| <= {margin:g}); pick an alpha farther from "
            f"small rationals or tighten the pattern-size caps"
        )
        self.alpha = alpha
        self.e = e
        self.v = v


class EvaluationError(AggraphError):
    """A term evaluation hit an invalid state (unbound variable etc.)."""
