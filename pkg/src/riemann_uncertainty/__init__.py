"""Riemann zeta in the critical strip, recast as a Fock-space uncertainty relation."""

__version__ = "0.1.0"

from .errors import (ClaimViolation, ConvergenceError, DegenerateError, DomainError, NoZeroError,
                     NumericError, PoleError, PrecisionOverflowError, TruncationError)
from .zeta_core import PrecisionConfig, ZetaSeries, eval_zeta, find_zero_near, taylor_coeffs
from .fock import TruncationPolicy, build_riemann_operator, coherent_vector, displacement_matrix
from .uncertainty import UncertaintyReport, check_uncertainty, rhs_direct, rhs_paper, variance_x1
from .rh_scan import CrossingReport, ScanConfig, run_scan, witness_search

__all__ = [
    "ClaimViolation", "ConvergenceError", "DegenerateError", "DomainError", "NoZeroError",
    "NumericError", "PoleError", "PrecisionOverflowError", "TruncationError",
    "PrecisionConfig", "ZetaSeries", "eval_zeta", "find_zero_near", "taylor_coeffs",
    "TruncationPolicy", "build_riemann_operator", "coherent_vector", "displacement_matrix",
    "UncertaintyReport", "check_uncertainty", "rhs_direct", "rhs_paper", "variance_x1",
    "CrossingReport", "ScanConfig", "run_scan", "witness_search",
]
