"""Exception hierarchy for the propagation package."""


class CppfError(Exception):
    """Base class for all package errors."""


class DomainError(CppfError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigurationError(CppfError, ValueError):
    """A model or engine configuration is inconsistent or unusable."""


class ValidationError(ConfigurationError):
    """One or more scenario fields failed validation.

    ``problems`` holds ``(field_name, message)`` pairs.
    """

    def __init__(self, problems):
        self.problems = list(problems)
        text = "; ".join(f"{name}: {msg}" for name, msg in self.problems)
        super().__init__(text)


class DomainOverflowError(CppfError):
    """The terrain excursion exceeds the computational column."""


class OutOfRangeError(CppfError, IndexError):
    """A requested point lies outside a computed grid."""


class FormatError(CppfError, ValueError):
    """Text could not be parsed as, or written in, one of the file formats."""

    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


class UnsupportedError(FormatError):
    """The input asks for a feature the engine does not provide."""
