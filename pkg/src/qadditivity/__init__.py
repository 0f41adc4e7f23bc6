"""Effective Hamiltonians, energy additivity and thermodynamic bookkeeping
for closed bipartite quantum systems."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigError,
    DimensionError,
    DomainError,
    NumericalFailure,
    QAdditivityError,
    SingularMap,
    SingularPopulation,
    SingularTime,
)

__all__ = [
    "ConfigError",
    "DimensionError",
    "DomainError",
    "NumericalFailure",
    "QAdditivityError",
    "SingularMap",
    "SingularPopulation",
    "SingularTime",
    "__version__",
]
