"""Phase-transition thresholds, finite-N bounds, angles and l1 recovery
experiments for randomly projected simplices and cross-polytopes."""

from . import angles, bounds, duals, experiments, exponents, linprog, specfun, thresholds
from .duals import Family
from .errors import ConvergenceError, DomainError
from .thresholds import TransitionKind, asymptotic_rho, phase_curve, rho_threshold

__version__ = "0.1.0"

__all__ = [
    "angles", "bounds", "duals", "experiments", "exponents", "linprog", "specfun", "thresholds",
    "Family", "TransitionKind", "DomainError", "ConvergenceError",
    "rho_threshold", "asymptotic_rho", "phase_curve",
]
