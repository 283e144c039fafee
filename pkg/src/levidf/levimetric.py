"""The metric h_delta on the normal bundle of a Levi-flat boundary and its leafwise curvature.

``h_delta(z', t)`` is the derivative of delta along ``J phi_*(d/dt)``.  It is
computed as the epsilon-part of delta evaluated at
``phi(z', t) + eps * J d_t phi(z', t)``, with the leaf coordinates seeded as
second-order jets, so that ``z' -> h_delta(z', t)`` comes out as a
:class:`~levidf.hyperdual.Jet2` directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import hyperdual as hd
from .complexdiff import wirtinger
from .domains import Domain, FoliatedChart, locate, NotOnChartError
from .hyperdual import Cplx, Jet2, Tangent

__all__ = [
    "MetricDegeneracyError",
    "MetricSignError",
    "CurvatureData",
    "normal_derivative",
    "metric_jet",
    "metric_h",
    "curvature",
    "reparametrized",
    "transverse_derivative",
    "TransitionReport",
    "transition_check",
]

DEGENERACY_TOL = 1e-12


class MetricDegeneracyError(ValueError):
    """``d delta`` annihilates ``J phi_* d/dt``."""


class MetricSignError(ValueError):
    """``J phi_* d/dt`` points out of the domain (chart orientation mismatch)."""


def normal_derivative(domain: Domain, chart: FoliatedChart, leaf: Sequence[Cplx], t):
    """Signed ``(J phi_* d/dt) delta`` for leaf coordinates in any scalar algebra."""
    lift = [Cplx(Tangent(c.re), Tangent(c.imag())) for c in leaf]
    z = chart.zeta(lift, Tangent(t, 1.0))
    zr, zi = Tangent._lift(z.re), Tangent._lift(z.imag())
    # J multiplies the zeta-direction by i: (a + ib) -> (-b + ia)
    last = Cplx(Tangent(zr.a, -zi.b), Tangent(zi.a, zr.b))
    d = domain.delta(lift + [last])
    return Tangent._lift(d).b


def _leaf_seeds(zprime) -> tuple[np.ndarray, list[Cplx]]:
    zp = np.asarray(zprime, dtype=complex).reshape(-1)
    x = np.empty(2 * zp.shape[0])
    x[0::2] = zp.real
    x[1::2] = zp.imag
    return x, [Cplx(hd.seed(x, 2 * j), hd.seed(x, 2 * j + 1)) for j in range(zp.shape[0])]


def _check_sign(value: float, zprime, t) -> None:
    if abs(value) < DEGENERACY_TOL:
        raise MetricDegeneracyError(f"metric degeneracy: h = {value:.3e} at z'={np.asarray(zprime).tolist()}, t={t}")
    if value < 0.0:
        raise MetricSignError(
            f"J phi_* d/dt points outward at z'={np.asarray(zprime).tolist()}, t={t} "
            f"(signed derivative {value:.6g}); reverse the chart orientation"
        )


def metric_jet(domain: Domain, chart: FoliatedChart, zprime, t: float) -> Jet2:
    """Jet of ``z' -> h_delta(z', t)`` over the ``2(n-1)`` leaf reals."""
    chart.check_range(zprime, t)
    x, leaf = _leaf_seeds(zprime)
    h = normal_derivative(domain, chart, leaf, float(t))
    if not isinstance(h, Jet2):
        h = hd.constant(float(h), x.shape[0])
    _check_sign(h.value, zprime, t)
    return h


def metric_h(domain: Domain, chart: FoliatedChart, zprime, t: float) -> float:
    chart.check_range(zprime, t)
    leaf = [Cplx(float(w.real), float(w.imag)) for w in np.asarray(zprime, dtype=complex).reshape(-1)]
    h = float(normal_derivative(domain, chart, leaf, float(t)))
    _check_sign(h, zprime, t)
    return h


@dataclass(frozen=True)
class CurvatureData:
    """Leafwise curvature of ``h_delta`` at chart point ``(zprime, t)``.

    ``v[j] = d log h / dz'_j``; ``theta = -Levi(log h)``; ``a_form = v v^*``.
    """

    zprime: np.ndarray
    t: float
    h: float
    v: np.ndarray
    theta: np.ndarray
    a_form: np.ndarray

    @property
    def v_norm2(self) -> float:
        return float(np.real(np.vdot(self.v, self.v)))


def curvature(domain: Domain, chart: FoliatedChart, zprime, t: float) -> CurvatureData:
    hj = metric_jet(domain, chart, zprime, t)
    w = wirtinger(hd.log(hj), chart.n - 1)
    v = w.dz
    a = np.outer(v, v.conj())
    return CurvatureData(
        zprime=np.asarray(zprime, dtype=complex).reshape(-1),
        t=float(t),
        h=hj.value,
        v=v,
        theta=-w.levi,
        a_form=0.5 * (a + a.conj().T),
    )


def reparametrized(
    chart: FoliatedChart,
    f: Callable,
    *,
    t_range: tuple[float, float] | None = None,
    periodic: bool | None = None,
    name: str | None = None,
) -> FoliatedChart:
    """Chart ``(z', s) -> chart(z', f(s))``; ``f`` must accept tangents."""

    def zeta(leaf, s):
        return chart.zeta(leaf, f(s))

    base = chart.inner_normal

    def normal(zprime, s):
        return base(zprime, float(f(float(s))))

    return FoliatedChart(
        name=name or f"{chart.name}.reparam",
        n=chart.n,
        zeta=zeta,
        leaf_radius=chart.leaf_radius,
        t_range=t_range or chart.t_range,
        periodic=chart.periodic if periodic is None else periodic,
        inner_normal=normal if base is not None else None,
        source=None,
    )


def transverse_derivative(chart_a: FoliatedChart, chart_b: FoliatedChart, zprime, t_a: float) -> tuple[float, float]:
    """``(t_b, dt_b/dt_a)`` from the chart geometry alone."""
    za, dza = chart_a.zeta_value(zprime, t_a)
    p = np.concatenate([np.asarray(zprime, dtype=complex).reshape(-1), [za]])
    _, t_b = locate(chart_b, p)
    _, dzb = chart_b.zeta_value(zprime, t_b)
    # both tangent vectors are parallel; d phi_a/dt_a = (dt_b/dt_a) d phi_b/dt_b
    return t_b, float((np.conj(dzb) * dza).real / abs(dzb) ** 2)


@dataclass
class TransitionReport:
    rows: list[dict]
    max_rel_error: float
    tol: float = 1e-8

    @property
    def passed(self) -> bool:
        return bool(self.rows) and self.max_rel_error < self.tol


def transition_check(
    domain: Domain,
    chart_a: FoliatedChart,
    chart_b: FoliatedChart,
    samples: Sequence[tuple],
    tol: float = 1e-8,
) -> TransitionReport:
    """Check ``h_A = |dt_B/dt_A| * h_B`` on overlap samples ``(z', t_A)``."""
    rows = []
    worst = 0.0
    for zprime, t_a in samples:
        try:
            t_b, ratio = transverse_derivative(chart_a, chart_b, zprime, float(t_a))
        except NotOnChartError:
            continue
        ha = metric_h(domain, chart_a, zprime, t_a)
        hb = metric_h(domain, chart_b, zprime, t_b)
        err = abs(ha - abs(ratio) * hb) / abs(ha)
        worst = max(worst, err)
        rows.append({"zprime": np.asarray(zprime), "t_a": float(t_a), "t_b": t_b, "h_a": ha, "h_b": hb,
                     "dtb_dta": ratio, "rel_error": err})
    if not rows:
        raise NotOnChartError("charts do not overlap on any sample")
    return TransitionReport(rows, worst, tol)
