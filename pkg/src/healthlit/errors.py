"""Exception hierarchy shared across the package.

The CLI maps any :class:`HealthLitError` to exit status 1.
"""


class HealthLitError(Exception):
    """Base class for every error raised deliberately by this package."""


class ContractError(HealthLitError, ValueError):
    """A precondition of an operation was violated by the caller."""


class LexiconError(HealthLitError, ValueError):
    """Malformed lexicon file or a lexicon that fails validation."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class CorpusError(HealthLitError):
    """Bad input documents or a corrupted parallel dataset on disk."""


class PolishError(HealthLitError):
    """The external grammar-polish command failed."""


class NumericError(HealthLitError, FloatingPointError):
    """A non-finite value appeared during a forward or backward pass."""
