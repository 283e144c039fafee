"""Local Diederich-Fornaess exponent: curvature formula and definitional sweep.

The formula route reads the exponent off the leafwise curvature of
``h_delta``: with ``c* = sup{c >= 0 : theta - c * a_form > 0}`` the exponent is
``c*/(1 + c*)``.  Because ``a_form = v v^*`` has rank one, ``c*`` has the
closed form ``1 / (v^* theta^{-1} v)``.

The sweep route tests plurisubharmonicity of ``-delta**eta`` directly, through
the rescaled Hessian

    G(eta) = Levi(-log delta) - eta * (d log delta)(d log delta)^*,

which is ``Levi(-delta**eta) / (eta * delta**eta)`` and so has the same sign
but no ``1/delta**2`` blow-up in ``eta``.  Samples are taken at normal offsets
from boundary points in a neighbourhood of ``p``.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import hyperdual as hd
from .complexdiff import (
    is_positive_definite,
    min_eigenvalue,
    positivity_margin,
    wirtinger,
)
from .domains import (
    Domain,
    FoliatedChart,
    chart_normal,
    gradient_normal,
    leaf_samples,
    t_samples,
)
from .levimetric import CurvatureData, curvature

__all__ = [
    "IndeterminateExponentError",
    "SweepGeometryError",
    "SweepConfig",
    "ExponentReport",
    "VerificationTable",
    "eta_formula",
    "c_star_bisection",
    "eta_from_c",
    "scaled_form",
    "SweepSample",
    "sweep_samples",
    "eta_sweep",
    "verify_theorem",
    "boundary_grid",
    "thread_count",
]

DEFAULT_OFFSETS = (1e-2, 3e-3, 1e-3, 3e-4, 1e-4)


class IndeterminateExponentError(ValueError):
    pass


class SweepGeometryError(ValueError):
    """A sweep sample left the collar or the domain."""


@dataclass(frozen=True)
class SweepConfig:
    offsets: tuple[float, ...] = DEFAULT_OFFSETS
    radius: float = 0.05
    eta_tol: float = 1e-3

    def __post_init__(self):
        offs = tuple(float(s) for s in self.offsets)
        object.__setattr__(self, "offsets", offs)
        if not offs or any(s <= 0 for s in offs) or any(a <= b for a, b in zip(offs, offs[1:])):
            raise ValueError(f"normal offsets must be positive and strictly decreasing, got {offs}")
        if not 1e-6 < self.eta_tol < 1e-1:
            raise ValueError(f"eta tolerance must lie in (1e-6, 1e-1), got {self.eta_tol}")
        if not self.radius > 0:
            raise ValueError(f"neighbourhood radius must be positive, got {self.radius}")

    def meta(self) -> dict:
        return {"eta_tol": self.eta_tol, "offsets": list(self.offsets), "radius": self.radius}


def eta_from_c(c: float) -> float:
    return 1.0 if math.isinf(c) else c / (1.0 + c)


def eta_formula(curv: CurvatureData) -> tuple[float, float]:
    """``(eta, c_star)`` from leafwise curvature data.

    ``theta`` clearly not positive gives ``(0, 0)``.  A smallest eigenvalue
    inside the positivity margin band is numerically undecidable; with a
    non-negligible ``v`` that is reported as indeterminate, with ``v`` at noise
    level (flat metrics) it counts as not positive.
    """
    theta = np.asarray(curv.theta, dtype=complex)
    v = np.asarray(curv.v, dtype=complex)
    lam = min_eigenvalue(theta)
    margin = positivity_margin(theta)
    if lam < -margin:
        return 0.0, 0.0
    if lam <= margin:
        if float(np.real(np.vdot(v, v))) <= margin:
            return 0.0, 0.0
        raise IndeterminateExponentError("indeterminate, refine grid: curvature form is numerically singular")
    if not np.any(v):
        return 1.0, math.inf
    q = float(np.real(np.vdot(v, np.linalg.solve(theta, v))))
    if q <= 0.0:
        return 1.0, math.inf
    return 1.0 / (1.0 + q), 1.0 / q


def c_star_bisection(theta, a_form, rel_tol: float = 1e-12, c_max: float = 1e15) -> float:
    """``sup{c >= 0 : theta - c * a_form > 0}`` by eigenvalue bisection.

    Independent of the rank-one closed form; returns 0 when ``theta`` itself
    is not positive and ``inf`` when no finite bound is found.
    """
    theta = np.asarray(theta, dtype=complex)
    a_form = np.asarray(a_form, dtype=complex)

    def ok(c):
        return min_eigenvalue(theta - c * a_form) > 0.0

    if not ok(0.0):
        return 0.0
    lo, hi = 0.0, 1.0
    while ok(hi):
        lo, hi = hi, 2.0 * hi
        if hi > c_max:
            return math.inf
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


def scaled_form(levi: np.ndarray, grad: np.ndarray, eta: float) -> np.ndarray | None:
    """Congruence-equilibrated ``G(eta)``, or ``None`` if a diagonal scale vanishes.

    ``D G D`` with ``D = diag(1/sqrt(|L_kk| + eta |g_k|^2))`` is positive
    definite iff ``G`` is; the scaling makes the relative positivity margin
    independent of how close the sample is to the boundary.
    """
    g = np.asarray(grad, dtype=complex)
    G = levi - eta * np.outer(g, g.conj())
    scale = np.abs(np.real(np.diag(levi))) + eta * np.abs(g) ** 2
    if np.any(scale <= 0.0):
        return None
    d = 1.0 / np.sqrt(scale)
    return (d[:, None] * G) * d[None, :]


@dataclass(frozen=True)
class SweepSample:
    point: np.ndarray
    delta: float
    levi: np.ndarray  # Levi(-log delta)
    grad: np.ndarray  # d log delta / dz


def _sample_at(domain: Domain, point: np.ndarray) -> SweepSample:
    j = domain.delta.jet(point)
    if not j.value > 0.0:
        raise SweepGeometryError(f"delta = {j.value:.3e} <= 0 at sweep sample {point.tolist()}; check the normal")
    if j.value > domain.collar:
        raise SweepGeometryError(f"sweep sample {point.tolist()} leaves the collar (delta = {j.value:.3e})")
    w = wirtinger(hd.log(j), domain.n)
    return SweepSample(point, j.value, -w.levi, w.dz)


def _project_to_boundary(domain: Domain, q: np.ndarray) -> np.ndarray:
    for _ in range(50):
        j = domain.delta.jet(q)
        g = j.grad[0::2] + 1j * j.grad[1::2]
        gg = float(np.real(np.vdot(g, g)))
        if gg == 0.0:
            raise SweepGeometryError(f"vanishing gradient while projecting {q.tolist()} to the boundary")
        q = q - j.value * g / gg
        if abs(j.value) < 1e-15:
            break
    return q


def _boundary_neighbourhood_chart(chart: FoliatedChart, p, radius: float) -> list[tuple[np.ndarray, float]]:
    zp0, t0 = p
    zp0 = np.asarray(zp0, dtype=complex).reshape(-1)
    pts = [(zp0, float(t0))]
    for j in range(zp0.shape[0]):
        for step in (radius, -radius, 1j * radius, -1j * radius):
            d = np.zeros_like(zp0)
            d[j] = step
            pts.append((zp0 + d, float(t0)))
    pts.append((zp0, float(t0) + radius))
    pts.append((zp0, float(t0) - radius))
    return pts


def _boundary_neighbourhood_free(domain: Domain, p, radius: float) -> list[np.ndarray]:
    p = np.asarray(p, dtype=complex).reshape(-1)
    j = domain.delta.jet(p)
    if abs(j.value) > 1e-8:
        raise SweepGeometryError(f"point {p.tolist()} is not on the boundary (delta = {j.value:.3e})")
    g = j.grad
    # orthonormal basis of the real tangent space {x : <grad, x> = 0}
    _, _, vh = np.linalg.svd(g.reshape(1, -1))
    pts = [p]
    for row in vh[1:]:
        dz = row[0::2] + 1j * row[1::2]
        for s in (radius, -radius):
            pts.append(_project_to_boundary(domain, p + s * dz))
    return pts


def sweep_samples(domain: Domain, chart: FoliatedChart | None, p, config: SweepConfig) -> list[SweepSample]:
    """Levi data at ``q + s * nu(q)`` for boundary ``q`` near ``p`` and ``s`` in the offsets.

    With a chart, ``p = (zprime, t)`` and the neighbourhood is a star of
    half-width ``radius`` in the chart parameters; without one, ``p`` is an
    ambient boundary point and the star lies in its real tangent space,
    projected back to the boundary.
    """
    if chart is not None:
        base = []
        for zp, t in _boundary_neighbourhood_chart(chart, p, config.radius):
            chart.check_range(zp, t)
            base.append((chart.embed(zp, t), chart_normal(domain, chart, zp, t)))
    else:
        base = [(q, gradient_normal(domain, q)) for q in _boundary_neighbourhood_free(domain, p, config.radius)]
    out = []
    for q, nu in base:
        nu = nu / np.linalg.norm(nu)
        for s in config.offsets:
            out.append(_sample_at(domain, q + s * nu))
    return out


def _passes(samples: Sequence[SweepSample], eta: float) -> bool:
    for smp in samples:
        G = scaled_form(smp.levi, smp.grad, eta)
        if G is None or not is_positive_definite(G):
            return False
    return True


def eta_sweep(domain: Domain, chart: FoliatedChart | None, p, config: SweepConfig | None = None) -> float:
    """Bisection supremum over ``(0, 1)`` of ``eta`` passing at every sample.

    Candidates whose worst eigenvalue sits inside the positivity margin count
    as failing, so the result is a conservative lower report.
    """
    config = config or SweepConfig()
    samples = sweep_samples(domain, chart, p, config)
    lo, hi = 0.0, 1.0
    while hi - lo > config.eta_tol:
        mid = 0.5 * (lo + hi)
        if _passes(samples, mid):
            lo = mid
        else:
            hi = mid
    return lo


@dataclass
class ExponentReport:
    zprime: np.ndarray
    t: float
    point: np.ndarray
    eta_formula: float
    c_star: float
    eta_sweep: float
    curvature: CurvatureData | None
    sweep_meta: dict = field(default_factory=dict)
    leaf_arg: float = 0.0
    error: str | None = None

    @property
    def discrepancy(self) -> float:
        if self.error is not None:
            return math.inf
        return abs(self.eta_formula - self.eta_sweep)


@dataclass
class VerificationTable:
    domain: str
    reports: list[ExponentReport]
    tolerance: float

    @property
    def max_discrepancy(self) -> float:
        return max((r.discrepancy for r in self.reports), default=0.0)

    @property
    def passed(self) -> bool:
        return bool(self.reports) and self.max_discrepancy < self.tolerance


def thread_count() -> int:
    """Worker cap from ``LEVIDF_THREADS`` (default 1)."""
    raw = os.environ.get("LEVIDF_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def boundary_grid(chart: FoliatedChart, grid: tuple[int, int], leaf_radius: float = 0.6) -> list[tuple[np.ndarray, float, float]]:
    """``(zprime, t, leaf_arg)`` over leaf spiral samples times ``t`` samples."""
    a, b = grid
    if a < 1 or b < 1:
        raise ValueError(f"grid sizes must be positive, got {grid}")
    return [(zp, float(t), arg) for zp, arg in leaf_samples(chart, a, leaf_radius) for t in t_samples(chart, b)]


def _ordered_map(fn, items: list) -> list:
    workers = min(thread_count(), max(1, len(items)))
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def verify_theorem(
    domain: Domain,
    chart: FoliatedChart | None = None,
    grid: tuple[int, int] = (10, 10),
    config: SweepConfig | None = None,
    *,
    leaf_radius: float = 0.6,
    tolerance: float = 5e-3,
    points: Sequence[tuple] | None = None,
    on_error: str = "raise",
) -> VerificationTable:
    """Formula and sweep exponents side by side over a boundary grid.

    With ``on_error="record"`` a failing grid point becomes a report carrying
    the error message (and an infinite discrepancy) instead of aborting.
    """
    if not domain.levi_flat:
        raise ValueError(f"domain {domain.name} is not Levi-flat; use sweep")
    chart = chart or domain.chart
    config = config or SweepConfig()
    items = list(points) if points is not None else boundary_grid(chart, grid, leaf_radius)

    def one(item) -> ExponentReport:
        zp, t = item[0], item[1]
        arg = item[2] if len(item) > 2 else 0.0
        try:
            curv = curvature(domain, chart, zp, t)
            eta_f, c = eta_formula(curv)
            eta_s = eta_sweep(domain, chart, (zp, t), config)
        except ValueError as exc:
            if on_error != "record":
                raise
            nan = math.nan
            return ExponentReport(np.asarray(zp), float(t), chart.embed(zp, t), nan, nan, nan, None,
                                  config.meta(), arg, str(exc))
        return ExponentReport(np.asarray(zp), float(t), chart.embed(zp, t), eta_f, c, eta_s, curv, config.meta(), arg)

    return VerificationTable(domain.name, _ordered_map(one, items), tolerance)
