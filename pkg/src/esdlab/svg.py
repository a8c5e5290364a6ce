"""Minimal deterministic SVG 1.1 scatter plots of eigenvalue clouds.

Geometry: a ``SIZE x SIZE`` canvas whose inner ``PLOT x PLOT`` square
(offset ``MARGIN``) shows the window ``[-1.5, 1.5]^2``; a point ``w`` maps to
``x = MARGIN + (Re w + 1.5) * PLOT/3`` and ``y = MARGIN + (1.5 - Im w) * PLOT/3``
(SVG's y axis points down). Atoms outside the window are not drawn.
Coordinates are printed with 3 decimals so output is byte-stable.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

__all__ = ["render_scatter", "scatter_svg"]

SIZE = 440
MARGIN = 20
PLOT = SIZE - 2 * MARGIN
WINDOW = 1.5
MARKER_R = 1.5


def _px(v: float) -> str:
    return f"{v:.3f}"


def _to_canvas(w: np.ndarray):
    s = PLOT / (2 * WINDOW)
    return MARGIN + (w.real + WINDOW) * s, MARGIN + (WINDOW - w.imag) * s


def scatter_svg(atoms, overlay_unit_circle: bool = True, title: str | None = None) -> str:
    w = np.asarray(getattr(atoms, "atoms", atoms), dtype=np.complex128).ravel()
    inside = (np.abs(w.real) <= WINDOW) & (np.abs(w.imag) <= WINDOW)
    xs, ys = _to_canvas(w[inside])
    cx, cy = _to_canvas(np.array([0j]))
    scale = PLOT / (2 * WINDOW)
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SIZE}" height="{SIZE}" '
        f'viewBox="0 0 {SIZE} {SIZE}">',
    ]
    if title:
        esc = title.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
        out.append(f"<title>{esc}</title>")
    out += [
        f'<rect x="{MARGIN}" y="{MARGIN}" width="{PLOT}" height="{PLOT}" fill="white" stroke="black"/>',
        f'<line x1="{MARGIN}" y1="{_px(cy[0])}" x2="{MARGIN + PLOT}" y2="{_px(cy[0])}" stroke="#999"/>',
        f'<line x1="{_px(cx[0])}" y1="{MARGIN}" x2="{_px(cx[0])}" y2="{MARGIN + PLOT}" stroke="#999"/>',
    ]
    if overlay_unit_circle:
        out.append(f'<circle cx="{_px(cx[0])}" cy="{_px(cy[0])}" r="{_px(scale)}" '
                   'fill="none" stroke="red"/>')
    out.append('<g fill="blue">')
    out += [f'<circle cx="{_px(x)}" cy="{_px(y)}" r="{MARKER_R}"/>' for x, y in zip(xs, ys)]
    out += ["</g>", "</svg>"]
    return "\n".join(out) + "\n"


def render_scatter(atoms, path, overlay_unit_circle: bool = True, title: str | None = None) -> Path:
    """Write :func:`scatter_svg` output to ``path``; raises ``OSError`` if unwritable."""
    p = Path(path)
    p.write_text(scatter_svg(atoms, overlay_unit_circle, title), encoding="utf-8")
    return p
