"""Exception hierarchy shared across the package.

All trajseq errors derive from :class:`TrajseqError` so callers can catch
user/input problems in one place (the CLI maps them to exit code 2).
"""


class TrajseqError(Exception):
    """Base class for all errors raised by trajseq."""


class DomainError(TrajseqError, ValueError):
    """A time argument lies outside the domain of a trajectory."""


class FormatError(TrajseqError, ValueError):
    """Malformed input data (file schema, sample layout, invariant violation)."""


class DataError(TrajseqError, ValueError):
    """Structurally valid input whose content is inconsistent (e.g. discontinuous segments)."""


class ConfigurationError(TrajseqError, ValueError):
    """Inconsistent or unusable configuration (unknown labels, bad cut criterion, ...)."""
