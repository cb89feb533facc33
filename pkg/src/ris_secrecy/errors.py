"""Exception hierarchy shared by the library and the command line."""


class RisSecError(Exception):
    """Base class for all errors raised by this package."""

    kind = "error"


class ConfigurationError(RisSecError, ValueError):
    """Inputs are structurally inconsistent (shapes, array sizes, zero denominators)."""

    kind = "configuration"


class DomainError(RisSecError, ValueError):
    """A numeric argument lies outside the domain of the operation."""

    kind = "domain"


class ParseError(RisSecError, ValueError):
    """A scenario file is missing, malformed or has an ill-typed field."""

    kind = "parse"


class ValidationError(RisSecError, ValueError):
    """A parsed value violates a scenario invariant."""

    kind = "validation"
