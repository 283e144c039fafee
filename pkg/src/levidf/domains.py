"""Model domains: boundary distance functions and foliated boundary charts.

A chart parametrises a piece of a Levi-flat boundary as
``phi(z', t) = (z', zeta(z', t))`` with ``zeta`` holomorphic in the leaf
coordinates ``z'`` and ``t`` a real transverse parameter.  Leaf coordinates
come first in the ambient ordering, ``zeta`` is the last coordinate.

Built-in catalog: ``ball_<n>``, ``product_bidisk`` and ``disk_bundle``.
User domains are registered from expression text and validated numerically.
"""

from __future__ import annotations

import math
import re
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import exprparse
from . import hyperdual as hd
from .complexdiff import wirtinger
from .hyperdual import Cplx, Jet2, Tangent

__all__ = [
    "ScalarField",
    "FoliatedChart",
    "Domain",
    "RegistrationError",
    "ChartRangeError",
    "NotOnChartError",
    "DistinguishedReport",
    "builtin",
    "get_domain",
    "catalog_names",
    "register_user_domain",
    "load_domain_file",
    "parse_domain_config",
    "validate_distinguished",
    "gradient_normal",
    "normal_cross_check",
    "leafwise_levi_norm",
    "leaf_samples",
    "t_samples",
    "locate",
    "BUILTIN_NAMES",
]

BOUNDARY_TOL = 1e-8
HOLOMORPHY_TOL = 1e-10
GRADIENT_TOL = 1e-8


class RegistrationError(ValueError):
    pass


class ChartRangeError(ValueError):
    pass


class NotOnChartError(ValueError):
    pass


@dataclass(frozen=True)
class ScalarField:
    """Real field of ``n`` complex variables, evaluable on any scalar algebra.

    ``fn`` takes a list of :class:`Cplx` coordinates and returns a real scalar.
    """

    n: int
    fn: Callable[[list], object]
    source: str | None = None

    def __call__(self, coords):
        out = self.fn(coords)
        return out.re if isinstance(out, Cplx) else out

    def value(self, point) -> float:
        pt = np.asarray(point, dtype=complex).reshape(-1)
        return float(self([Cplx(float(w.real), float(w.imag)) for w in pt]))

    def jet(self, point) -> Jet2:
        return hd.jet(self, point)

    @classmethod
    def from_expr(cls, source: str, n: int) -> "ScalarField":
        node = exprparse.parse(source, n)
        return cls(n, lambda zs, _node=node: exprparse.evaluate(_node, zs).re, source)


@dataclass(frozen=True)
class FoliatedChart:
    """``phi(z', t) = (z', zeta(z', t))`` on ``|z'_j| < leaf_radius`` and ``t`` in ``t_range``.

    ``zeta(leaf, t)`` receives leaf coordinates as :class:`Cplx` and a real
    scalar ``t``; it must be generic over floats, jets and tangents.
    ``inner_normal(zprime, t)`` returns a unit complex ``n``-vector, or the
    field is ``None`` and the normal is taken from the gradient of delta.
    """

    name: str
    n: int
    zeta: Callable[[list, object], Cplx]
    leaf_radius: float
    t_range: tuple[float, float]
    periodic: bool = False
    inner_normal: Callable[[np.ndarray, float], np.ndarray] | None = None
    source: str | None = None

    def check_range(self, zprime, t: float) -> None:
        zp = np.asarray(zprime, dtype=complex).reshape(-1)
        if zp.shape[0] != self.n - 1:
            raise ChartRangeError(f"chart {self.name} expects {self.n - 1} leaf coordinates, got {zp.shape[0]}")
        if np.any(np.abs(zp) >= self.leaf_radius):
            raise ChartRangeError(f"leaf point {zp.tolist()} outside chart {self.name} (|z'| < {self.leaf_radius})")
        if not self.periodic:
            a, b = self.t_range
            if not a <= t <= b:
                raise ChartRangeError(f"t = {t} outside chart range [{a}, {b}]")

    def zeta_value(self, zprime, t: float) -> tuple[complex, complex]:
        """``zeta`` and ``d zeta / dt`` at ``(z', t)``."""
        leaf = [Cplx(float(w.real), float(w.imag)) for w in np.asarray(zprime, dtype=complex).reshape(-1)]
        out = self.zeta(leaf, Tangent(float(t), 1.0))
        re = Tangent._lift(out.re)
        im = Tangent._lift(out.imag())
        return complex(float(re.a), float(im.a)), complex(float(re.b), float(im.b))

    def embed(self, zprime, t: float) -> np.ndarray:
        zp = np.asarray(zprime, dtype=complex).reshape(-1)
        z, _ = self.zeta_value(zp, t)
        return np.concatenate([zp, [z]])


@dataclass(frozen=True)
class Domain:
    name: str
    n: int
    delta: ScalarField
    charts: tuple[FoliatedChart, ...] = ()
    levi_flat: bool = False
    interior: tuple[complex, ...] = ()
    collar: float = 0.5

    @property
    def chart(self) -> FoliatedChart:
        if not self.charts:
            raise ValueError(f"domain {self.name} has no foliated chart")
        return self.charts[0]

    def scaled(self, c: float) -> "Domain":
        """Same domain with ``delta`` replaced by ``c * delta``."""
        base = self.delta
        fld = ScalarField(self.n, lambda zs: c * base(zs), None)
        return Domain(f"{self.name}*{c:g}", self.n, fld, self.charts, self.levi_flat, self.interior, self.collar * c)


# built-in catalog


def _circle(leaf, t) -> Cplx:
    return Cplx(hd.cos(t), hd.sin(t))


def _radial_normal(zprime, t):
    zp = np.asarray(zprime, dtype=complex).reshape(-1)
    return np.concatenate([np.zeros(zp.shape[0], dtype=complex), [-complex(math.cos(t), math.sin(t))]])


def _circle_chart(name: str) -> FoliatedChart:
    return FoliatedChart(
        name=name,
        n=2,
        zeta=_circle,
        leaf_radius=0.95,
        t_range=(0.0, 2 * math.pi),
        periodic=True,
        inner_normal=_radial_normal,
        source="exp(i*t)",
    )


def _disk_bundle_delta(zs):
    zp, w = zs[0], zs[1]
    return 1.0 - hd.abs2((w - zp) / (1.0 - zp.conj() * w))


def _bidisk_delta(zs):
    return 1.0 - hd.abs2(zs[1])


def _ball_delta(zs):
    out = 1.0
    for z in zs:
        out = out - hd.abs2(z)
    return out


BUILTIN_NAMES = ("ball_n", "product_bidisk", "disk_bundle")


def builtin(name: str) -> Domain:
    if name == "disk_bundle":
        delta = ScalarField(2, _disk_bundle_delta, "1 - abs2((z2 - z1)/(1 - conj(z1)*z2))")
        return Domain("disk_bundle", 2, delta, (_circle_chart("disk_bundle.circle"),), True, (0j, 0j))
    if name == "product_bidisk":
        delta = ScalarField(2, _bidisk_delta, "1 - abs2(z2)")
        return Domain("product_bidisk", 2, delta, (_circle_chart("product_bidisk.circle"),), True, (0j, 0j))
    m = re.fullmatch(r"ball_(\d)", name)
    if m and int(m.group(1)) >= 1:
        n = int(m.group(1))
        src = " - ".join(["1"] + [f"abs2(z{k})" for k in range(1, n + 1)])
        return Domain(name, n, ScalarField(n, _ball_delta, src), (), False, (0j,) * n)
    raise KeyError(f"unknown domain {name!r}; built-ins are ball_<n>, product_bidisk, disk_bundle")


_CATALOG: dict[str, Domain] = {}
_CATALOG_LOCK = threading.Lock()


def get_domain(name: str) -> Domain:
    with _CATALOG_LOCK:
        if name in _CATALOG:
            return _CATALOG[name]
    return builtin(name)


def catalog_names() -> list[str]:
    with _CATALOG_LOCK:
        return sorted(_CATALOG)


# sampling helpers


def leaf_samples(chart: FoliatedChart, count: int, radius: float) -> list[tuple[np.ndarray, float]]:
    """Deterministic leaf points on the spiral ``rho = radius * k/(count-1)``.

    Returns ``(zprime, arg)`` pairs; ``arg`` increases with ``k`` and labels the
    sample on heatmaps.
    """
    if radius >= chart.leaf_radius:
        raise ChartRangeError(f"sampling radius {radius} must be below chart leaf radius {chart.leaf_radius}")
    m = chart.n - 1
    out = []
    for k in range(count):
        rho = radius * k / (count - 1) if count > 1 else 0.0
        arg = 2 * math.pi * k / count
        zp = np.array([rho * np.exp(1j * (arg + 2 * math.pi * j / (m + 1))) for j in range(m)]) / math.sqrt(m)
        out.append((zp, arg))
    return out


def t_samples(chart: FoliatedChart, count: int) -> np.ndarray:
    a, b = chart.t_range
    return np.linspace(a, b, count, endpoint=not chart.periodic)


def _grad_complex(domain: Domain, point) -> np.ndarray:
    g = domain.delta.jet(point).grad
    return g[0::2] + 1j * g[1::2]


def gradient_normal(domain: Domain, point) -> np.ndarray:
    """Unit inner normal from the real gradient of delta (delta grows inward)."""
    g = _grad_complex(domain, point)
    norm = float(np.linalg.norm(g))
    if norm <= GRADIENT_TOL:
        raise RegistrationError(f"degenerate defining function: |grad delta| = {norm:.3e} at {np.asarray(point).tolist()}")
    return g / norm


def chart_normal(domain: Domain, chart: FoliatedChart, zprime, t: float) -> np.ndarray:
    if chart.inner_normal is not None:
        return np.asarray(chart.inner_normal(zprime, t), dtype=complex)
    return gradient_normal(domain, chart.embed(zprime, t))


def normal_cross_check(domain: Domain, chart: FoliatedChart, zprime, t: float) -> float:
    """Distance between the chart's analytic normal and the gradient normal."""
    analytic = chart_normal(domain, chart, zprime, t)
    analytic = analytic / np.linalg.norm(analytic)
    return float(np.linalg.norm(analytic - gradient_normal(domain, chart.embed(zprime, t))))


def leafwise_levi_norm(domain: Domain, point) -> float:
    """Norm of the Levi form of delta restricted to ``ker(d delta)`` in ``T^{1,0}``."""
    w = wirtinger(domain.delta.jet(point), domain.n)
    row = w.dz.reshape(1, -1)
    _, s, vh = np.linalg.svd(row)
    basis = vh[1:].conj().T  # columns span {X : sum dz_j X_j = 0}
    comp = basis.conj().T @ w.levi @ basis
    return float(np.linalg.norm(comp, 2)) if comp.size else 0.0


def locate(chart: FoliatedChart, point, tol: float = 1e-9, scan: int = 256) -> tuple[np.ndarray, float]:
    """Chart parameters ``(z', t)`` with ``phi(z', t) = point``."""
    p = np.asarray(point, dtype=complex).reshape(-1)
    if p.shape[0] != chart.n:
        raise NotOnChartError(f"point has {p.shape[0]} coordinates, chart {chart.name} lives in C^{chart.n}")
    zp, target = p[:-1], p[-1]
    if np.any(np.abs(zp) >= chart.leaf_radius):
        raise NotOnChartError(f"leaf coordinates {zp.tolist()} outside chart {chart.name}")
    a, b = chart.t_range
    ts = np.linspace(a, b, scan, endpoint=not chart.periodic)
    resid = [abs(chart.zeta_value(zp, t)[0] - target) for t in ts]
    t = float(ts[int(np.argmin(resid))])
    for _ in range(60):
        z, dz = chart.zeta_value(zp, t)
        F = z - target
        if abs(F) < 1e-15 or abs(dz) == 0.0:
            break
        t -= (np.conj(dz) * F).real / abs(dz) ** 2
    if abs(chart.zeta_value(zp, t)[0] - target) > tol:
        raise NotOnChartError(f"point {p.tolist()} is not on chart {chart.name}")
    return zp, t


@dataclass
class DistinguishedReport:
    zprime: np.ndarray
    t: float
    zeta_residual: float
    dt_residual: float
    tol: float = 1e-6

    @property
    def passed(self) -> bool:
        return self.zeta_residual < self.tol and self.dt_residual < self.tol


def validate_distinguished(
    chart: FoliatedChart,
    p,
    domain: Domain | None = None,
    radius: float = 0.05,
    points: int = 5,
) -> DistinguishedReport:
    """Residuals of the distinguished normalisation after a rigid recentering.

    ``p`` is an ambient boundary point on the chart.  The recentering moves
    ``p`` to the origin and rotates the ``zeta`` plane so that the inner normal
    at ``p`` becomes ``+i``; no rescaling is allowed.  The residuals are
    ``|zeta~(z', 0)|`` and ``|d zeta~/dt (z', 0) - 1|`` over a leaf grid of
    half-width ``radius`` around ``p``.
    """
    zp0, t0 = locate(chart, p)
    if chart.inner_normal is None and domain is None:
        raise ValueError("chart has no analytic normal; pass the domain")
    nu = chart_normal(domain, chart, zp0, t0) if domain is not None else np.asarray(chart.inner_normal(zp0, t0))
    u = nu[-1] / abs(nu[-1])
    rot = 1j * np.conj(u)
    zeta_p, _ = chart.zeta_value(zp0, t0)
    offs = np.linspace(-radius, radius, points)
    m = chart.n - 1
    grid = []
    for j in range(m):
        for a in offs:
            for b in offs:
                d = np.zeros(m, dtype=complex)
                d[j] = a + 1j * b
                grid.append(zp0 + d)
    if not grid:
        grid = [zp0]
    zr = dr = 0.0
    for zp in grid:
        z, dz = chart.zeta_value(zp, t0)
        zr = max(zr, abs((z - zeta_p) * rot))
        dr = max(dr, abs(dz * rot - 1.0))
    return DistinguishedReport(zp0, t0, zr, dr)


# user registration


def _chart_from_expr(source: str, n: int, leaf_radius: float, t_range, periodic: bool, name: str) -> FoliatedChart:
    node = exprparse.parse(source, n - 1, chart=True)

    def zeta(leaf, t, _node=node):
        return exprparse.evaluate(_node, leaf, t)

    return FoliatedChart(name, n, zeta, float(leaf_radius), (float(t_range[0]), float(t_range[1])), bool(periodic), None, source)


def _zeta_holomorphy_defect(chart: FoliatedChart, zprime, t: float) -> float:
    """``max_j |d zeta / d zbar'_j|`` from a leaf jet of ``zeta``."""
    m = chart.n - 1
    x = np.empty(2 * m)
    x[0::2] = np.real(zprime)
    x[1::2] = np.imag(zprime)
    leaf = [Cplx(hd.seed(x, 2 * j), hd.seed(x, 2 * j + 1)) for j in range(m)]
    out = chart.zeta(leaf, float(t))
    u, v = out.re, out.imag()
    if not isinstance(u, Jet2):
        u = hd.constant(float(u), 2 * m)
    if not isinstance(v, Jet2):
        v = hd.constant(float(v), 2 * m)
    ux, uy = u.grad[0::2], u.grad[1::2]
    vx, vy = v.grad[0::2], v.grad[1::2]
    dbar = 0.5 * ((ux - vy) + 1j * (uy + vx))
    return float(np.max(np.abs(dbar)))


def _validate(domain: Domain, samples: int = 5, t_count: int = 8) -> None:
    pt = np.asarray(domain.interior, dtype=complex)
    try:
        d0 = domain.delta.value(pt)
    except hd.DifferentiationDomainError as exc:
        raise RegistrationError(f"delta cannot be evaluated at the interior point: {exc}") from exc
    if not d0 > 0.0:
        raise RegistrationError(f"delta = {d0:.3e} is not positive at the interior point {pt.tolist()}")
    for chart in domain.charts:
        for zp, _ in leaf_samples(chart, samples, 0.9 * chart.leaf_radius):
            for t in t_samples(chart, t_count):
                q = chart.embed(zp, float(t))
                dv = domain.delta.value(q)
                if abs(dv) > BOUNDARY_TOL:
                    raise RegistrationError(
                        f"chart image does not lie on {{delta = 0}}: delta = {dv:.3e} at {q.tolist()}"
                    )
                g = _grad_complex(domain, q)
                if np.linalg.norm(g) <= GRADIENT_TOL:
                    raise RegistrationError(f"degenerate defining function: d delta = 0 at {q.tolist()}")
                defect = _zeta_holomorphy_defect(chart, zp, float(t))
                if defect > HOLOMORPHY_TOL:
                    raise RegistrationError(f"zeta is not holomorphic in z': |d zeta/d zbar'| = {defect:.3e}")


def register_user_domain(
    delta_source: str,
    chart_spec: str | None,
    n: int,
    *,
    name: str | None = None,
    leaf_radius: float = 0.95,
    t_range: Sequence[float] = (0.0, 2 * math.pi),
    periodic: bool = True,
    interior: Sequence[complex] | None = None,
    collar: float = 0.5,
    validate: bool = True,
) -> Domain:
    """Parse, validate and add a user domain to the session catalog.

    ``chart_spec`` is the ``zeta`` expression in ``z1..z{n-1}``, ``t`` and
    ``i``; ``None`` registers a sweep-only domain.  ``validate=False`` skips the
    numeric checks and exists only for negative controls.
    """
    delta = ScalarField.from_expr(delta_source, n)
    name = name or f"user_{len(catalog_names()) + 1}"
    charts: tuple[FoliatedChart, ...] = ()
    if chart_spec is not None:
        if n < 2:
            raise RegistrationError("a foliated chart needs dimension >= 2")
        charts = (_chart_from_expr(chart_spec, n, leaf_radius, t_range, periodic, f"{name}.chart"),)
    interior = tuple(complex(w) for w in (interior if interior is not None else [0j] * n))
    if len(interior) != n:
        raise RegistrationError(f"interior point has {len(interior)} coordinates, expected {n}")
    domain = Domain(name, n, delta, charts, bool(charts), interior, float(collar))
    if validate:
        _validate(domain)
    with _CATALOG_LOCK:
        _CATALOG[name] = domain
    return domain


def _parse_interior(raw, n: int):
    if raw is None:
        return None
    out = []
    for w in raw:
        if isinstance(w, (list, tuple)) and len(w) == 2:
            out.append(complex(float(w[0]), float(w[1])))
        else:
            out.append(complex(float(w)))
    return out


def parse_domain_config(text: str, *, validate: bool = True) -> Domain:
    """Register a domain from TOML text.

    Keys: ``name``, ``dimension``, ``delta``, optional ``interior`` (list of
    ``[re, im]``), ``collar``, ``chart.zeta`` and
    ``chart.range = {t = [a, b], leaf_radius = r, periodic = bool}``.
    """
    import tomli

    try:
        cfg = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise RegistrationError(f"malformed domain file: {exc}") from exc
    for key in ("name", "dimension", "delta"):
        if key not in cfg:
            raise RegistrationError(f"domain file is missing key {key!r}")
    n = int(cfg["dimension"])
    chart = cfg.get("chart", {}) or {}
    rng = chart.get("range", {}) or {}
    return register_user_domain(
        str(cfg["delta"]),
        chart.get("zeta"),
        n,
        name=str(cfg["name"]),
        leaf_radius=float(rng.get("leaf_radius", 0.95)),
        t_range=tuple(rng.get("t", (0.0, 2 * math.pi))),
        periodic=bool(rng.get("periodic", True)),
        interior=_parse_interior(cfg.get("interior"), n),
        collar=float(cfg.get("collar", 0.5)),
        validate=validate,
    )


def load_domain_file(path: str | Path, *, validate: bool = True) -> Domain:
    return parse_domain_config(Path(path).read_text(encoding="utf-8"), validate=validate)
