"""Command-line front end.

Examples::

    levidf exponent --domain disk_bundle --grid 10x10 --format csv
    levidf verify --domain disk_bundle --heatmap eta.svg
    levidf harmonic --domain disk_bundle --eta 0.5
    levidf schur --matrix id2.json
    levidf curvature --domain disk_bundle --grid 5x5
    levidf sweep --domain ball_2 --point 1,0,0,0

Exit codes: 0 success, 1 verification FAIL, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .complexdiff import max_asymmetry, min_eigenvalue, schur_positive
from .dfexp import DEFAULT_OFFSETS, SweepConfig, boundary_grid, eta_formula, eta_sweep, verify_theorem
from .domains import Domain, get_domain, load_domain_file
from .exprparse import ParseError
from .harmonic import alpha_from_eta, example_density_match, harmonicity_residual
from .levimetric import curvature, metric_h
from .report import heatmap_svg, to_csv, to_json

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    domain: str | None
    register: str | None
    grid: tuple[int, int]
    offsets: tuple[float, ...]
    eta_tol: float
    radius: float
    leaf_radius: float
    fmt: str
    output: str | None
    heatmap: str | None

    def __post_init__(self):
        if min(self.grid) < 2:
            raise ConfigError(f"grid sizes must be >= 2, got {self.grid[0]}x{self.grid[1]}")
        # SweepConfig enforces offsets and tolerance invariants
        self.sweep()

    def sweep(self) -> SweepConfig:
        return SweepConfig(self.offsets, self.radius, self.eta_tol)

    def as_dict(self) -> dict:
        return {
            "domain": self.domain,
            "grid": f"{self.grid[0]}x{self.grid[1]}",
            "offsets": list(self.offsets),
            "eta_tol": self.eta_tol,
            "radius": self.radius,
            "leaf_radius": self.leaf_radius,
        }


def _grid(text: str) -> tuple[int, int]:
    try:
        a, b = text.lower().split("x")
        return int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like 10x10, got {text!r}") from None


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(s) for s in text.split(",") if s.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _add_common(p: argparse.ArgumentParser, grid: str = "10x10") -> None:
    p.add_argument("--domain", help="built-in or registered domain name")
    p.add_argument("--register", metavar="FILE", help="domain registration file (TOML)")
    p.add_argument("--unchecked", action="store_true", help="skip registration validation (negative controls only)")
    p.add_argument("--grid", type=_grid, default=_grid(grid), help="leaf samples x transverse samples")
    p.add_argument("--leaf-radius", type=float, default=0.6, help="radius of the leaf sampling spiral")
    p.add_argument("--offsets", type=_floats, default=DEFAULT_OFFSETS, help="normal offsets for the sweep")
    p.add_argument("--eta-tol", type=float, default=1e-3)
    p.add_argument("--radius", type=float, default=0.05, help="sweep neighbourhood radius")
    p.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
    p.add_argument("--output", help="report path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="levidf", description="Diederich-Fornaess exponents of Levi-flat boundaries")
    ap.add_argument("--version", action="version", version=f"levidf {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("exponent", help="curvature-formula exponent over a boundary grid")
    _add_common(p)
    p.add_argument("--heatmap", help="write an SVG heatmap of eta")

    p = sub.add_parser("verify", help="formula vs definitional sweep")
    _add_common(p)
    p.add_argument("--heatmap", help="write an SVG heatmap of eta_formula")
    p.add_argument("--tolerance", type=float, default=5e-3)

    p = sub.add_parser("curvature", help="h, v, theta, a_form over a boundary grid")
    _add_common(p, "5x5")

    p = sub.add_parser("harmonic", help="harmonicity of h^alpha and the Poisson-kernel fit")
    _add_common(p, "15x15")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--eta", type=float)
    g.add_argument("--alpha", type=float)
    p.add_argument("--tolerance", type=float, default=1e-8)

    p = sub.add_parser("sweep", help="definitional sweep only (any domain)")
    _add_common(p, "5x5")
    p.add_argument("--point", type=_floats, help="ambient boundary point as x1,y1,...,xn,yn")

    p = sub.add_parser("schur", help="Schur-complement vs eigenvalue positivity of a matrix file")
    p.add_argument("--matrix", required=True, help="JSON array of [re, im] pairs, row-major")
    p.add_argument("--format", dest="fmt", choices=("csv", "json"), default=None)
    p.add_argument("--output")
    return ap


def _run_config(args) -> RunConfig:
    return RunConfig(
        command=args.command,
        domain=args.domain,
        register=args.register,
        grid=args.grid,
        offsets=tuple(args.offsets),
        eta_tol=args.eta_tol,
        radius=args.radius,
        leaf_radius=args.leaf_radius,
        fmt=args.fmt,
        output=args.output,
        heatmap=getattr(args, "heatmap", None),
    )


def _resolve_domain(args) -> Domain:
    if args.register:
        dom = load_domain_file(args.register, validate=not args.unchecked)
        if args.domain and args.domain != dom.name:
            return get_domain(args.domain)
        return dom
    if not args.domain:
        raise ConfigError("one of --domain or --register is required")
    return get_domain(args.domain)


def _require_levi_flat(dom: Domain) -> None:
    if not dom.levi_flat or not dom.charts:
        raise ConfigError(f"domain {dom.name} is not Levi-flat; use sweep")


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _zp_columns(n_leaf: int) -> list[str]:
    return [c for j in range(1, n_leaf + 1) for c in (f"z{j}_re", f"z{j}_im")]


def _zp_values(zp) -> dict:
    out = {}
    for j, w in enumerate(np.asarray(zp, dtype=complex).reshape(-1), start=1):
        out[f"z{j}_re"] = float(w.real)
        out[f"z{j}_im"] = float(w.imag)
    return out


def _write_table(cfg: RunConfig, dom: Domain, columns: list[str], rows: list[dict], summary: dict) -> None:
    if cfg.fmt == "json":
        payload = {"command": cfg.command, "domain": dom.name, "config": cfg.as_dict(), "columns": columns,
                   "rows": [{c: r.get(c) for c in columns} for r in rows], "summary": summary}
        _emit(to_json(payload), cfg.output)
    else:
        _emit(to_csv(columns, rows), cfg.output)


def _heatmap(cfg: RunConfig, chart, values: list[float], title: str) -> None:
    a, b = cfg.grid
    pts = boundary_grid(chart, cfg.grid, cfg.leaf_radius)
    xs = [pts[i * b][2] for i in range(a)]
    ys = [pts[j][1] for j in range(b)]
    cols = [[values[i * b + j] for j in range(b)] for i in range(a)]
    Path(cfg.heatmap).write_text(heatmap_svg(cols, xs, ys, title), encoding="utf-8")


def cmd_exponent(args) -> int:
    cfg = _run_config(args)
    dom = _resolve_domain(args)
    _require_levi_flat(dom)
    chart = dom.chart
    rows = []
    for i, (zp, t, _) in enumerate(boundary_grid(chart, cfg.grid, cfg.leaf_radius)):
        curv = curvature(dom, chart, zp, t)
        eta, c = eta_formula(curv)
        rows.append({"leaf_index": i // cfg.grid[1], "t_index": i % cfg.grid[1], **_zp_values(zp), "t": t,
                     "h": curv.h, "theta_min_eig": min_eigenvalue(curv.theta), "v_norm2": curv.v_norm2,
                     "eta_formula": eta, "c_star": c})
    cols = ["leaf_index", "t_index", *_zp_columns(dom.n - 1), "t", "h", "theta_min_eig", "v_norm2", "eta_formula", "c_star"]
    etas = [r["eta_formula"] for r in rows]
    _write_table(cfg, dom, cols, rows, {"eta_min": min(etas), "eta_max": max(etas)})
    if cfg.heatmap:
        _heatmap(cfg, chart, etas, f"eta_formula on {dom.name}")
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = _run_config(args)
    dom = _resolve_domain(args)
    _require_levi_flat(dom)
    table = verify_theorem(dom, dom.chart, cfg.grid, cfg.sweep(), leaf_radius=cfg.leaf_radius,
                           tolerance=args.tolerance, on_error="record")
    rows = []
    for i, r in enumerate(table.reports):
        rows.append({"leaf_index": i // cfg.grid[1], "t_index": i % cfg.grid[1], **_zp_values(r.zprime), "t": r.t,
                     "eta_formula": r.eta_formula, "eta_sweep": r.eta_sweep, "discrepancy": r.discrepancy,
                     "status": "ok" if r.error is None else f"error: {r.error}"})
    cols = ["leaf_index", "t_index", *_zp_columns(dom.n - 1), "t", "eta_formula", "eta_sweep", "discrepancy", "status"]
    d = table.max_discrepancy
    verdict = "PASS" if table.passed else "FAIL"
    _write_table(cfg, dom, cols, rows, {"max_discrepancy": d, "tolerance": args.tolerance, "verdict": verdict})
    if cfg.heatmap:
        _heatmap(cfg, dom.chart, [r.eta_formula for r in table.reports], f"eta_formula on {dom.name}")
    rel = "<" if table.passed else ">="
    print(f"{verdict} max_discrepancy={d:.3g} {rel} {args.tolerance:g}", file=sys.stderr)
    return EXIT_OK if table.passed else EXIT_FAIL


def cmd_curvature(args) -> int:
    cfg = _run_config(args)
    dom = _resolve_domain(args)
    _require_levi_flat(dom)
    chart = dom.chart
    m = dom.n - 1
    rows = []
    for i, (zp, t, _) in enumerate(boundary_grid(chart, cfg.grid, cfg.leaf_radius)):
        cd = curvature(dom, chart, zp, t)
        row = {"leaf_index": i // cfg.grid[1], "t_index": i % cfg.grid[1], **_zp_values(zp), "t": t, "h": cd.h}
        for j in range(m):
            row[f"v{j + 1}_re"] = float(cd.v[j].real)
            row[f"v{j + 1}_im"] = float(cd.v[j].imag)
        for j in range(m):
            for k in range(m):
                row[f"theta{j + 1}{k + 1}_re"] = float(cd.theta[j, k].real)
                row[f"theta{j + 1}{k + 1}_im"] = float(cd.theta[j, k].imag)
                row[f"a{j + 1}{k + 1}_re"] = float(cd.a_form[j, k].real)
                row[f"a{j + 1}{k + 1}_im"] = float(cd.a_form[j, k].imag)
        try:
            ratio = float(np.real(np.vdot(cd.v, np.linalg.solve(cd.theta, cd.v))))
        except np.linalg.LinAlgError:
            ratio = math.nan
        row["a_theta_ratio"] = ratio
        rows.append(row)
    cols = ["leaf_index", "t_index", *_zp_columns(m), "t", "h"]
    cols += [f"v{j + 1}_{p}" for j in range(m) for p in ("re", "im")]
    cols += [f"theta{j + 1}{k + 1}_{p}" for j in range(m) for k in range(m) for p in ("re", "im")]
    cols += [f"a{j + 1}{k + 1}_{p}" for j in range(m) for k in range(m) for p in ("re", "im")]
    cols += ["a_theta_ratio"]
    _write_table(cfg, dom, cols, rows, {})
    return EXIT_OK


def cmd_harmonic(args) -> int:
    cfg = _run_config(args)
    dom = _resolve_domain(args)
    _require_levi_flat(dom)
    chart = dom.chart
    alpha = args.alpha if args.alpha is not None else alpha_from_eta(args.eta)
    if not alpha > 0:
        raise ConfigError(f"alpha must be positive, got {alpha}")
    pts = boundary_grid(chart, cfg.grid, cfg.leaf_radius)
    rows = []
    for i, (zp, t, _) in enumerate(pts):
        rows.append({"leaf_index": i // cfg.grid[1], "t_index": i % cfg.grid[1], **_zp_values(zp), "t": t,
                     "density": metric_h(dom, chart, zp, t) ** alpha,
                     "residual": harmonicity_residual(dom, chart, alpha, zp, t)})
    max_res = max(r["residual"] for r in rows)
    summary = {"alpha": alpha, "max_residual": max_res, "tolerance": args.tolerance}
    ok = max_res < args.tolerance
    if dom.name == "disk_bundle":
        fit = example_density_match([(zp, t) for zp, t, _ in pts], alpha, dom)
        summary.update({"kappa": fit.kappa, "fit_residual": fit.max_rel_residual})
        ok = ok and fit.passed
    cols = ["leaf_index", "t_index", *_zp_columns(dom.n - 1), "t", "density", "residual"]
    _write_table(cfg, dom, cols, rows, summary)
    line = f"alpha={alpha:g} max_residual={max_res:.3g}"
    if "kappa" in summary:
        line += f" kappa={summary['kappa']:.12g} fit_residual={summary['fit_residual']:.3g}"
    print(("PASS " if ok else "FAIL ") + line, file=sys.stderr)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_sweep(args) -> int:
    cfg = _run_config(args)
    dom = _resolve_domain(args)
    rows = []
    if args.point is not None:
        x = np.asarray(args.point, dtype=float)
        if x.shape[0] != 2 * dom.n:
            raise ConfigError(f"--point needs {2 * dom.n} reals for {dom.name}")
        p = x[0::2] + 1j * x[1::2]
        eta = eta_sweep(dom, None, p, cfg.sweep())
        rows.append({**{f"x{k + 1}": float(v) for k, v in enumerate(x)}, "eta_sweep": eta})
        cols = [f"x{k + 1}" for k in range(x.shape[0])] + ["eta_sweep"]
    else:
        if not dom.charts:
            raise ConfigError(f"domain {dom.name} has no chart; pass --point")
        chart = dom.chart
        for i, (zp, t, _) in enumerate(boundary_grid(chart, cfg.grid, cfg.leaf_radius)):
            rows.append({"leaf_index": i // cfg.grid[1], "t_index": i % cfg.grid[1], **_zp_values(zp), "t": t,
                         "eta_sweep": eta_sweep(dom, chart, (zp, t), cfg.sweep())})
        cols = ["leaf_index", "t_index", *_zp_columns(dom.n - 1), "t", "eta_sweep"]
    etas = [r["eta_sweep"] for r in rows]
    _write_table(cfg, dom, cols, rows, {"eta_min": min(etas), "eta_max": max(etas)})
    return EXIT_OK


def read_matrix(path: str) -> np.ndarray:
    """Matrix from JSON: nested rows of ``[re, im]`` pairs, or a flat row-major list."""
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"malformed matrix file {path}: {exc}") from exc
    try:
        arr = np.asarray(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"malformed matrix file {path}: entries must be [re, im] pairs") from exc
    if arr.ndim == 2 and arr.shape[1] == 2:
        k = int(round(math.sqrt(arr.shape[0])))
        if k * k != arr.shape[0]:
            raise ConfigError(f"malformed matrix file {path}: {arr.shape[0]} entries is not a square count")
        arr = arr.reshape(k, k, 2)
    if arr.ndim != 3 or arr.shape[0] != arr.shape[1] or arr.shape[2] != 2 or arr.shape[0] < 2:
        raise ConfigError(f"malformed matrix file {path}: expected a k x k array of [re, im] pairs with k >= 2")
    return arr[..., 0] + 1j * arr[..., 1]


def cmd_schur(args) -> int:
    m = read_matrix(args.matrix)
    asym = max_asymmetry(m)
    if asym > 1e-12 * (1.0 + float(np.max(np.abs(m)))):
        raise ConfigError(f"matrix is not Hermitian (max asymmetry {asym:.3e})")
    m = 0.5 * (m + m.conj().T)
    schur = schur_positive(m)
    lam = min_eigenvalue(m)
    eig = lam > 0.0
    agree = schur == eig
    line = (f"Schur: {'positive' if schur else 'not positive'}; "
            f"Eigen: {'positive' if eig else 'not positive'}; {'AGREE' if agree else 'DISAGREE'}")
    if args.fmt == "json":
        _emit(to_json({"command": "schur", "dimension": m.shape[0], "schur_positive": schur,
                       "min_eigenvalue": lam, "eigen_positive": eig, "agree": agree}), args.output)
    elif args.fmt == "csv":
        _emit(to_csv(["dimension", "schur_positive", "min_eigenvalue", "eigen_positive", "agree"],
                     [{"dimension": m.shape[0], "schur_positive": schur, "min_eigenvalue": lam,
                       "eigen_positive": eig, "agree": agree}]), args.output)
    else:
        _emit(line + "\n", args.output)
    return EXIT_OK if agree else EXIT_FAIL


COMMANDS = {
    "exponent": cmd_exponent,
    "verify": cmd_verify,
    "curvature": cmd_curvature,
    "harmonic": cmd_harmonic,
    "sweep": cmd_sweep,
    "schur": cmd_schur,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ValueError, KeyError, OSError, ParseError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else str(exc)
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
