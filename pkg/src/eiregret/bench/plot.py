"""Standalone SVG regret plots: one mean line and one CI band per curve."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

PAD = 0.05
WIDTH, HEIGHT = 720, 440
MARGIN = dict(left=70, right=130, top=30, bottom=55)
COLORS = {"BPMI": "#1f77b4", "BSPMI": "#d62728", "BOI": "#2ca02c"}
_FALLBACK = ["#9467bd", "#8c564b", "#e377c2", "#7f7f7f"]


def padded_range(lo: float, hi: float, pad: float = PAD) -> tuple[float, float]:
    """Extend ``[lo, hi]`` by ``pad`` of its span on each side."""
    span = hi - lo
    if span <= 0:
        span = abs(lo) if lo != 0 else 1.0
    return lo - pad * span, hi + pad * span


def plot_extent(curves: Sequence) -> tuple[tuple[float, float], tuple[float, float]]:
    """Padded ``(x_range, y_range)`` covering every mean and CI bound."""
    t = np.concatenate([np.asarray(c.t, dtype=float) for c in curves])
    ys = np.concatenate([np.concatenate([c.mean, c.ci_low, c.ci_high]) for c in curves])
    return padded_range(t.min(), t.max()), padded_range(float(ys.min()), float(ys.max()))


def _ticks(lo: float, hi: float, n: int = 5) -> np.ndarray:
    return np.linspace(lo, hi, n)


def emit_plot_svg(curves: Sequence, path, title: str | None = None) -> Path:
    """Write an SVG of ``R_t/t`` curves.

    ``curves`` are objects exposing ``label``, ``t``, ``mean``, ``ci_low`` and
    ``ci_high`` (experiment summaries or curves read back from CSV).
    """
    curves = list(curves)
    if not curves:
        raise ValueError("need at least one summary to plot")
    (x0, x1), (y0, y1) = plot_extent(curves)
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def sx(v):
        return MARGIN["left"] + (np.asarray(v, dtype=float) - x0) / (x1 - x0) * pw

    def sy(v):
        return MARGIN["top"] + (y1 - np.asarray(v, dtype=float)) / (y1 - y0) * ph

    def pts(xs, ys):
        return " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(sx(xs), sy(ys)))

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" data-xrange="{x0!r} {x1!r}" data-yrange="{y0!r} {y1!r}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{MARGIN["left"]}" y="{MARGIN["top"]}" width="{pw}" height="{ph}" '
        'fill="none" stroke="black" stroke-width="1"/>',
    ]
    for v in _ticks(x0, x1):
        x = float(sx(v))
        out.append(f'<text x="{x:.2f}" y="{HEIGHT - MARGIN["bottom"] + 18}" font-size="11" '
                   f'text-anchor="middle">{v:.4g}</text>')
    for v in _ticks(y0, y1):
        y = float(sy(v))
        out.append(f'<text x="{MARGIN["left"] - 6}" y="{y + 4:.2f}" font-size="11" '
                   f'text-anchor="end">{v:.3g}</text>')
    out.append(f'<text class="xlabel" x="{MARGIN["left"] + pw / 2:.1f}" y="{HEIGHT - 12}" '
               'font-size="14" text-anchor="middle">t</text>')
    out.append(f'<text class="ylabel" x="18" y="{MARGIN["top"] + ph / 2:.1f}" font-size="14" '
               f'text-anchor="middle" transform="rotate(-90 18 {MARGIN["top"] + ph / 2:.1f})">R_t/t</text>')
    if title:
        out.append(f'<text x="{WIDTH / 2:.1f}" y="18" font-size="14" text-anchor="middle">{escape(title)}</text>')

    for k, c in enumerate(curves):
        color = COLORS.get(c.label.upper(), _FALLBACK[k % len(_FALLBACK)])
        band = pts(c.t, c.ci_high) + " " + pts(c.t[::-1], c.ci_low[::-1])
        out.append(f'<polygon class="ci" points="{band}" fill="{color}" fill-opacity="0.2" stroke="none"/>')
        out.append(f'<polyline class="mean" points="{pts(c.t, c.mean)}" fill="none" '
                   f'stroke="{color}" stroke-width="1.8"/>')
        ly = MARGIN["top"] + 16 + 20 * k
        lx = WIDTH - MARGIN["right"] + 12
        out.append(f'<g class="legend"><line x1="{lx}" y1="{ly}" x2="{lx + 22}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="2"/><text x="{lx + 28}" y="{ly + 4}" '
                   f'font-size="12">{escape(c.label)}</text></g>')
    out.append("</svg>")

    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("\n".join(out) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path
