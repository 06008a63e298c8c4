"""Bivariate distributionally robust bounds under mean-covariance ambiguity."""

from .errors import (
    BivdroError,
    CertificateUnavailable,
    ConsistencyError,
    DomainError,
    OracleInfeasible,
)
from .moments import MomentSpec, from_correlation, pooled_moments, validate

__version__ = "0.1.0"

__all__ = [
    "BivdroError",
    "CertificateUnavailable",
    "ConsistencyError",
    "DomainError",
    "MomentSpec",
    "OracleInfeasible",
    "from_correlation",
    "pooled_moments",
    "validate",
    "__version__",
]
