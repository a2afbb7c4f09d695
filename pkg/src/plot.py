"""Standalone SVG line charts of robustness curves."""

from pathlib import Path
from typing import List, Optional, Sequence, Union
from xml.sax.saxutils import escape

import numpy as np

from .dataset import read_curve_csv
from .errors import DatasetError

WIDTH, HEIGHT = 640, 400
MARGIN = 48
TRUE_COLOR = "#1f77b4"
PRED_COLOR = "#d62728"


def _points(values: np.ndarray) -> str:
    n = len(values)
    xs = np.arange(n) / (n - 1) if n > 1 else np.zeros(1)
    inner_w, inner_h = WIDTH - 2 * MARGIN, HEIGHT - 2 * MARGIN
    px = MARGIN + xs * inner_w
    # the vertical axis is always [0, 1]
    py = MARGIN + (1.0 - np.clip(values, 0.0, 1.0)) * inner_h
    return " ".join(f"{x:.3f},{y:.3f}" for x, y in zip(px, py))


def render_svg(
    r_true: Optional[Sequence[float]], r_pred: Optional[Sequence[float]] = None, title: str = ""
) -> str:
    """SVG document with whichever of the true and predicted curves are given."""
    curves = [np.asarray(c, dtype=np.float64) if c is not None else None for c in (r_true, r_pred)]
    if all(c is None or c.size == 0 for c in curves):
        raise DatasetError("cannot plot an empty curve")
    r_true, r_pred = curves
    left, right = MARGIN, WIDTH - MARGIN
    top, bottom = MARGIN, HEIGHT - MARGIN

    parts: List[str] = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{bottom}" stroke="black"/>',
    ]
    for tick in (0.0, 0.5, 1.0):
        y = bottom - tick * (bottom - top)
        x = left + tick * (right - left)
        parts.append(f'<text x="{left - 6}" y="{y + 4:.1f}" font-size="11" text-anchor="end">{tick:g}</text>')
        parts.append(f'<text x="{x:.1f}" y="{bottom + 16}" font-size="11" text-anchor="middle">{tick:g}</text>')
    parts.append(f'<text x="{(left + right) / 2:.1f}" y="{HEIGHT - 8}" font-size="12" text-anchor="middle">i/(N-1)</text>')
    parts.append(f'<text x="12" y="{(top + bottom) / 2:.1f}" font-size="12" transform="rotate(-90 12 {(top + bottom) / 2:.1f})" text-anchor="middle">r(i)</text>')
    if title:
        parts.append(f'<text x="{(left + right) / 2:.1f}" y="24" font-size="14" text-anchor="middle">{escape(title)}</text>')

    if r_true is not None:
        parts.append(f'<polyline class="true" fill="none" stroke="{TRUE_COLOR}" stroke-width="1.5" points="{_points(r_true)}"/>')
    if r_pred is not None:
        parts.append(f'<polyline class="pred" fill="none" stroke="{PRED_COLOR}" stroke-width="1.5" points="{_points(r_pred)}"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_plot(csv_path: Union[str, Path], svg_path: Union[str, Path], title: str = "") -> Path:
    """
    Render a curve CSV as an SVG line chart.

    Raises:
        DatasetError: the CSV is empty or carries neither curve
    """
    r_true, r_pred = read_curve_csv(csv_path)
    svg_path = Path(svg_path)
    svg_path.write_text(render_svg(r_true, r_pred, title), encoding="utf-8")
    return svg_path
