"""Deterministic SVG overlays of 2D trajectories with a legend and a metre scale bar."""
from __future__ import annotations

import math
from pathlib import Path
from typing import Mapping
from xml.sax.saxutils import escape, quoteattr

import numpy as np

from .errors import InputError

WIDTH, HEIGHT, MARGIN = 800, 800, 40
STYLES = (
    ("#000000", ""),
    ("#d62728", "8 4"),
    ("#1f77b4", "2 3"),
    ("#2ca02c", "12 4 2 4"),
    ("#9467bd", "6 2"),
    ("#ff7f0e", "1 5"),
)


def _nice_length(span: float) -> float:
    """A 1/2/5 x 10^k length close to a fifth of ``span``."""
    if span <= 0:
        return 1.0
    target = span / 5.0
    base = 10.0 ** math.floor(math.log10(target))
    for factor in (5.0, 2.0, 1.0):
        if base * factor <= target:
            return base * factor
    return base


def render_svg(trajectories: Mapping[str, np.ndarray]) -> str:
    """SVG text with one polyline per named ``(N, 2)`` trajectory in metres."""
    if not trajectories:
        raise InputError("nothing to plot")
    arrays = {}
    for name, points in trajectories.items():
        points = np.asarray(points, dtype=float)
        if points.ndim != 2 or points.shape[1] != 2 or len(points) == 0:
            raise InputError(f"trajectory {name!r} must be a nonempty (N, 2) array")
        arrays[name] = points
    stacked = np.vstack(list(arrays.values()))
    lo, hi = stacked.min(axis=0), stacked.max(axis=0)
    span = float(max(hi[0] - lo[0], hi[1] - lo[1], 1e-9))
    scale = (WIDTH - 2 * MARGIN) / span

    def project(p: np.ndarray) -> np.ndarray:
        x = MARGIN + (p[:, 0] - lo[0]) * scale
        y = HEIGHT - MARGIN - (p[:, 1] - lo[1]) * scale  # north up
        return np.column_stack([x, y])

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
    ]
    for k, (name, points) in enumerate(arrays.items()):
        colour, dash = STYLES[k % len(STYLES)]
        coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in project(points))
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        parts.append(
            f'<polyline data-label={quoteattr(name)} points="{coords}" fill="none" '
            f'stroke="{colour}" stroke-width="1.5"{dash_attr}/>'
        )
        y = 20 + 18 * k
        parts.append(f'<line x1="{WIDTH - 190}" y1="{y}" x2="{WIDTH - 160}" y2="{y}" stroke="{colour}" stroke-width="2"{dash_attr}/>')
        parts.append(f'<text x="{WIDTH - 150}" y="{y + 4}" font-family="sans-serif" font-size="12">{escape(name)}</text>')

    bar = _nice_length(span)
    bar_px = bar * scale
    y = HEIGHT - 15
    parts.append(f'<line x1="{MARGIN}" y1="{y}" x2="{MARGIN + bar_px:.2f}" y2="{y}" stroke="#000000" stroke-width="3"/>')
    parts.append(f'<text x="{MARGIN + bar_px + 6:.2f}" y="{y + 4}" font-family="sans-serif" font-size="12">{bar:g} m</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_plot(trajectories: Mapping[str, np.ndarray], path) -> Path:
    path = Path(path)
    path.write_text(render_svg(trajectories), encoding="utf-8")
    return path
