"""Latency/accuracy toolkit for edge-offloaded object detection.

Modules: :mod:`metrics`, :mod:`measurements`, :mod:`models`,
:mod:`netsim`, :mod:`optimizer` and the :mod:`cli` entry point.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BurstOverflow,
    ConfigError,
    DomainViolation,
    EdgePerfError,
    EmptyGrid,
    MixedProfiles,
    NonFinite,
    NonPositiveLatency,
    RankDeficient,
    SchemaError,
)

__all__ = [
    "BurstOverflow",
    "ConfigError",
    "DomainViolation",
    "EdgePerfError",
    "EmptyGrid",
    "MixedProfiles",
    "NonFinite",
    "NonPositiveLatency",
    "RankDeficient",
    "SchemaError",
    "__version__",
]
