"""Exception types shared across the toolkit."""

from __future__ import annotations


class EdgePerfError(Exception):
    """Base class for every error raised by edgeperf."""


class DomainViolation(EdgePerfError, ValueError):
    """A value lies outside its documented domain.

    ``index`` is the offending record position (when ingesting a sequence)
    and ``field`` the name of the offending field.
    """

    def __init__(self, message: str, *, index: int | None = None, field: str | None = None):
        self.index = index
        self.field = field
        parts = []
        if index is not None:
            parts.append(f"record {index}")
        if field is not None:
            parts.append(f"field {field!r}")
        prefix = ", ".join(parts)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class MixedProfiles(EdgePerfError, ValueError):
    pass


class EmptyGrid(EdgePerfError, ValueError):
    pass


class SchemaError(EdgePerfError, ValueError):
    """A CSV header does not match the expected column set."""

    def __init__(self, message: str, *, column: str | None = None):
        self.column = column
        super().__init__(message)


class ConfigError(EdgePerfError, ValueError):
    def __init__(self, message: str, *, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        where = path or "<config>"
        if line is not None:
            where = f"{where}:{line}"
        super().__init__(f"{where}: {message}")


class RankDeficient(EdgePerfError, ValueError):
    """Least-squares design matrix does not have full column rank."""

    def __init__(self, message: str, *, component: str | None = None):
        self.component = component
        super().__init__(f"{component}: {message}" if component else message)


class NonFinite(EdgePerfError, ValueError):
    pass


class NonPositiveLatency(EdgePerfError, ValueError):
    pass


class BurstOverflow(EdgePerfError, ValueError):
    pass
