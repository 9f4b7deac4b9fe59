"""Minimal deterministic SVG line plots (no rendering dependency)."""

from __future__ import annotations

import numpy as np

_COLORS = ("#222222", "#cc3311", "#0077bb", "#009988")


def polyline_plot(path, curves, title: str = "", width: int = 800,
                  height: int = 320, x_label: str = "", y_label: str = "") -> None:
    """Write an SVG overlay of the given curves.

    curves: list of (label, 1-D array) drawn over a shared sample axis.
    Output bytes depend only on the inputs (fixed float formatting).
    """
    margin = 45
    plot_w = width - 2 * margin
    plot_h = height - 2 * margin
    ys = [np.asarray(y, dtype=np.float64) for _, y in curves]
    n = max(y.size for y in ys)
    lo = min(float(y.min()) for y in ys)
    hi = max(float(y.max()) for y in ys)
    if hi <= lo:
        hi = lo + 1.0
    pad = 0.05 * (hi - lo)
    lo -= pad
    hi += pad

    def sx(i):
        return margin + plot_w * (i / max(n - 1, 1))

    def sy(v):
        return margin + plot_h * (1.0 - (v - lo) / (hi - lo))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{margin}" y="{margin}" width="{plot_w}" height="{plot_h}" '
        'fill="none" stroke="#999999" stroke-width="1"/>',
    ]
    if title:
        parts.append(f'<text x="{width / 2:.1f}" y="{margin - 12}" text-anchor="middle" '
                     f'font-family="sans-serif" font-size="14">{title}</text>')
    if x_label:
        parts.append(f'<text x="{width / 2:.1f}" y="{height - 8}" text-anchor="middle" '
                     f'font-family="sans-serif" font-size="12">{x_label}</text>')
    if y_label:
        parts.append(f'<text x="14" y="{height / 2:.1f}" text-anchor="middle" '
                     f'font-family="sans-serif" font-size="12" '
                     f'transform="rotate(-90 14 {height / 2:.1f})">{y_label}</text>')
    for ci, (label, y) in enumerate(curves):
        color = _COLORS[ci % len(_COLORS)]
        pts = " ".join(f"{sx(i):.2f},{sy(v):.2f}" for i, v in enumerate(np.asarray(y)))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                     'stroke-width="1.5"/>')
        parts.append(f'<text x="{margin + 8 + 130 * ci}" y="{margin + 16}" '
                     f'font-family="sans-serif" font-size="12" fill="{color}">{label}</text>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts))
        fh.write("\n")
