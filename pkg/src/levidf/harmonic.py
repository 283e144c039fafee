"""Conformal harmonic measures built from powers of h_delta.

For a boundary distance function with constant local exponent ``eta`` the
density ``h_delta**alpha`` with ``alpha = eta/(1 - eta)`` is leafwise
harmonic.  This module builds the candidate, measures its harmonicity defect
and compares the disk-bundle density against the Poisson kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import hyperdual as hd
from .complexdiff import wirtinger
from .domains import Domain, FoliatedChart
from .levimetric import metric_h, metric_jet, transverse_derivative

__all__ = [
    "alpha_from_eta",
    "eta_from_alpha",
    "poincare_density",
    "HarmonicMeasureCandidate",
    "harmonicity_residual",
    "poisson_reference",
    "DensityFit",
    "example_density_match",
    "density_transition_check",
]


def alpha_from_eta(eta: float) -> float:
    if not 0.0 < eta < 1.0:
        raise ValueError(f"eta must lie in (0, 1), got {eta}")
    return 1.0 / (1.0 / eta - 1.0)


def eta_from_alpha(alpha: float) -> float:
    if not alpha > 0.0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    return alpha / (1.0 + alpha)


def poincare_density(zprime) -> float:
    """Volume density ``4/(1-|z|^2)^2`` of the curvature -1 Poincare metric on a leaf disk."""
    r2 = float(np.sum(np.abs(np.asarray(zprime, dtype=complex)) ** 2))
    return 4.0 / (1.0 - r2) ** 2


@dataclass(frozen=True)
class HarmonicMeasureCandidate:
    domain: Domain
    chart: FoliatedChart
    eta: float
    leaf_metric: Callable = poincare_density

    @property
    def alpha(self) -> float:
        return alpha_from_eta(self.eta)

    def density(self, zprime, t: float) -> float:
        return metric_h(self.domain, self.chart, zprime, t) ** self.alpha

    def describe(self) -> str:
        return f"h_delta^{self.alpha:g} vol_omega (x) dt"


def harmonicity_residual(domain: Domain, chart: FoliatedChart, alpha: float, zprime, t: float) -> float:
    """Frobenius norm of the leafwise Levi matrix of ``h_delta**alpha``."""
    hj = metric_jet(domain, chart, zprime, t)
    w = wirtinger(hd.pow_real(hj, alpha), chart.n - 1)
    return float(np.linalg.norm(w.levi))


def poisson_reference(zprime, theta: float) -> float:
    """``2 (1 - |z'|^2) / |e^{i theta} - z'|^2``."""
    z = complex(np.asarray(zprime, dtype=complex).reshape(-1)[0])
    return 2.0 * (1.0 - abs(z) ** 2) / abs(complex(math.cos(theta), math.sin(theta)) - z) ** 2


@dataclass
class DensityFit:
    kappa: float
    max_rel_residual: float
    densities: np.ndarray
    references: np.ndarray
    tol: float = 1e-8

    @property
    def passed(self) -> bool:
        return self.max_rel_residual < self.tol


def example_density_match(
    samples: Sequence[tuple],
    alpha: float = 1.0,
    domain: Domain | None = None,
    tol: float = 1e-8,
) -> DensityFit:
    """Fit ``h**alpha = kappa * reference`` with one global constant.

    ``kappa`` is the least-squares fit in log space, i.e. the geometric mean
    of the ratios.
    """
    from .domains import builtin

    domain = domain or builtin("disk_bundle")
    chart = domain.chart
    dens = np.array([metric_h(domain, chart, zp, t) ** alpha for zp, t in samples])
    ref = np.array([poisson_reference(zp, t) for zp, t in samples])
    kappa = float(np.exp(np.mean(np.log(dens) - np.log(ref))))
    resid = float(np.max(np.abs(dens - kappa * ref) / (kappa * ref)))
    return DensityFit(kappa, resid, dens, ref, tol)


def density_transition_check(
    domain: Domain,
    chart_a: FoliatedChart,
    chart_b: FoliatedChart,
    alpha: float,
    samples: Sequence[tuple],
) -> float:
    """Max relative error of ``density_A = |dt_B/dt_A|**alpha * density_B``."""
    worst = 0.0
    for zp, t_a in samples:
        t_b, ratio = transverse_derivative(chart_a, chart_b, zp, float(t_a))
        da = metric_h(domain, chart_a, zp, t_a) ** alpha
        db = metric_h(domain, chart_b, zp, t_b) ** alpha
        worst = max(worst, abs(da - abs(ratio) ** alpha * db) / da)
    return worst
