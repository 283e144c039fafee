"""Deterministic CSV/JSON tables and the SVG exponent heatmap."""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Sequence

__all__ = ["fmt_float", "to_csv", "to_json", "heatmap_svg"]


def fmt_float(x: float) -> str:
    """Shortest round-trip decimal of ``x`` rounded to 12 significant digits."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x == 0.0:
        return "0.0"
    return repr(float(f"{x:.12g}"))


def _json_value(v):
    if isinstance(v, bool) or v is None or isinstance(v, str):
        return v
    if isinstance(v, int):
        return v
    if isinstance(v, float):
        if math.isnan(v) or math.isinf(v):
            return fmt_float(v)
        return float(fmt_float(v))
    if isinstance(v, dict):
        return {k: _json_value(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    try:
        return _json_value(float(v))
    except (TypeError, ValueError):
        return str(v)


def to_json(payload: dict) -> str:
    return json.dumps(_json_value(payload), indent=2) + "\n"


def to_csv(columns: Sequence[str], rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        out = []
        for c in columns:
            v = row.get(c, "")
            if isinstance(v, float):
                v = fmt_float(v)
            out.append(v)
        w.writerow(out)
    return buf.getvalue()


def _color(u: float) -> str:
    # linear blue -> white -> red ramp
    u = min(1.0, max(0.0, u))
    if u < 0.5:
        k = u / 0.5
        r, g, b = 59 + (255 - 59) * k, 76 + (255 - 76) * k, 192 + (255 - 192) * k
    else:
        k = (u - 0.5) / 0.5
        r, g, b = 255 - (255 - 180) * k, 255 - 255 * k, 255 - (255 - 38) * k
    return f"#{int(round(r)):02x}{int(round(g)):02x}{int(round(b)):02x}"


def heatmap_svg(
    values: Sequence[Sequence[float]],
    x_labels: Sequence[float],
    y_labels: Sequence[float],
    title: str,
    x_name: str = "arg z'",
    y_name: str = "t",
) -> str:
    """Heatmap with ``values[i][j]`` at column ``x_labels[i]`` and row ``y_labels[j]``."""
    nx, ny = len(x_labels), len(y_labels)
    finite = [v for col in values for v in col if math.isfinite(v)]
    vmin = min(finite) if finite else 0.0
    vmax = max(finite) if finite else 1.0
    if vmax - vmin < 1e-12:
        vmin, vmax = vmin - 0.5, vmax + 0.5
    cell = 24
    left, top = 70, 40
    width = left + nx * cell + 120
    height = top + ny * cell + 60
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="10">',
        f'<text x="{left}" y="20" font-size="13">{title}</text>',
    ]
    for i in range(nx):
        for j in range(ny):
            v = values[i][j]
            fill = _color((v - vmin) / (vmax - vmin)) if math.isfinite(v) else "#808080"
            parts.append(
                f'<rect x="{left + i * cell}" y="{top + (ny - 1 - j) * cell}" width="{cell}" height="{cell}" '
                f'fill="{fill}"><title>{fmt_float(v)}</title></rect>'
            )
    for i, xl in enumerate(x_labels):
        parts.append(f'<text x="{left + i * cell + cell / 2}" y="{top + ny * cell + 14}" text-anchor="middle">{xl:.2f}</text>')
    for j, yl in enumerate(y_labels):
        parts.append(f'<text x="{left - 6}" y="{top + (ny - 1 - j) * cell + cell / 2 + 3}" text-anchor="end">{yl:.2f}</text>')
    parts.append(f'<text x="{left + nx * cell / 2}" y="{top + ny * cell + 32}" text-anchor="middle">{x_name}</text>')
    parts.append(f'<text x="16" y="{top + ny * cell / 2}" transform="rotate(-90 16 {top + ny * cell / 2})" text-anchor="middle">{y_name}</text>')
    lx = left + nx * cell + 30
    parts.append('<defs><linearGradient id="legend" x1="0" y1="1" x2="0" y2="0">')
    for k in range(11):
        parts.append(f'<stop offset="{k / 10:.1f}" stop-color="{_color(k / 10)}"/>')
    parts.append("</linearGradient></defs>")
    parts.append(f'<rect x="{lx}" y="{top}" width="16" height="{ny * cell}" fill="url(#legend)" stroke="black" stroke-width="0.5"/>')
    parts.append(f'<text x="{lx + 22}" y="{top + 8}">{fmt_float(vmax)}</text>')
    parts.append(f'<text x="{lx + 22}" y="{top + ny * cell}">{fmt_float(vmin)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
