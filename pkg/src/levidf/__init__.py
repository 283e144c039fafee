"""Diederich-Fornaess exponents of domains with Levi-flat boundary."""

__version__ = "0.1.0"

from .domains import builtin, get_domain, register_user_domain
from .dfexp import SweepConfig, eta_formula, eta_sweep, verify_theorem
from .harmonic import alpha_from_eta, harmonicity_residual
from .levimetric import curvature, metric_h

__all__ = [
    "builtin",
    "get_domain",
    "register_user_domain",
    "SweepConfig",
    "eta_formula",
    "eta_sweep",
    "verify_theorem",
    "alpha_from_eta",
    "harmonicity_residual",
    "curvature",
    "metric_h",
]
