"""Tiny deterministic SVG writers for scatter, heatmap, and line plots.

Byte-for-byte stable output matters more here than styling, which rules
out plotting libraries with embedded timestamps or version strings.
Coordinates are formatted to fixed precision; input order decides
drawing order.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

PALETTE = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
]


def _fmt(x: float) -> str:
    return f"{x:.3f}"


def _write(path: Path | str, body: list[str], width: int, height: int) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">'
    )
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write("\n".join([head, *body, "</svg>"]) + "\n")
    return path


def _scale(values: np.ndarray, lo_px: float, hi_px: float):
    vmin, vmax = float(values.min()), float(values.max())
    span = vmax - vmin
    if span <= 0:
        span = 1.0
    def to_px(v):
        return lo_px + (v - vmin) / span * (hi_px - lo_px)
    return to_px


def svg_scatter(path, xy: np.ndarray, labels: list[str], title: str = "",
                size: int = 640) -> Path:
    """Scatter of n points colored by label string."""
    xy = np.asarray(xy, dtype=float)
    margin = 60
    sx = _scale(xy[:, 0], margin, size - margin)
    sy = _scale(xy[:, 1], size - margin, margin)  # flip y for screen coords
    names = sorted(set(labels))
    color = {n: PALETTE[i % len(PALETTE)] for i, n in enumerate(names)}
    body = [f'<rect width="{size}" height="{size}" fill="white"/>']
    if title:
        body.append(f'<text x="{size // 2}" y="24" text-anchor="middle" '
                    f'font-size="16">{title}</text>')
    for (x, y), lab in zip(xy, labels):
        body.append(f'<circle cx="{_fmt(sx(x))}" cy="{_fmt(sy(y))}" r="4" '
                    f'fill="{color[lab]}" fill-opacity="0.7"/>')
    for i, n in enumerate(names):
        ly = margin + 18 * i
        body.append(f'<rect x="{size - margin + 8}" y="{ly - 9}" width="10" '
                    f'height="10" fill="{color[n]}"/>')
        body.append(f'<text x="{size - margin + 22}" y="{ly}" '
                    f'font-size="11">{n}</text>')
    return _write(path, body, size + 80, size)


def svg_heatmap(path, matrix: np.ndarray, row_labels: list[str],
                col_labels: list[str], title: str = "", cell: int = 48) -> Path:
    """Heatmap with per-cell counts; rows = true labels, cols = predicted."""
    m = np.asarray(matrix, dtype=float)
    rows, cols = m.shape
    left, top = 110, 90
    width = left + cols * cell + 20
    height = top + rows * cell + 20
    peak = m.max() if m.max() > 0 else 1.0
    body = [f'<rect width="{width}" height="{height}" fill="white"/>']
    if title:
        body.append(f'<text x="{width // 2}" y="22" text-anchor="middle" '
                    f'font-size="15">{title}</text>')
    for j, cl in enumerate(col_labels):
        x = left + j * cell + cell // 2
        body.append(f'<text x="{x}" y="{top - 8}" text-anchor="middle" '
                    f'font-size="10" transform="rotate(-45 {x} {top - 8})">{cl}</text>')
    for i, rl in enumerate(row_labels):
        y = top + i * cell + cell // 2 + 4
        body.append(f'<text x="{left - 6}" y="{y}" text-anchor="end" '
                    f'font-size="10">{rl}</text>')
    for i in range(rows):
        for j in range(cols):
            frac = m[i, j] / peak
            # white -> blue ramp
            r = int(round(255 * (1 - frac)))
            g = int(round(255 * (1 - 0.6 * frac)))
            fill = f"rgb({r},{g},255)"
            x, y = left + j * cell, top + i * cell
            body.append(f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" '
                        f'fill="{fill}" stroke="#ccc"/>')
            text_fill = "#000" if frac < 0.6 else "#fff"
            body.append(f'<text x="{x + cell // 2}" y="{y + cell // 2 + 4}" '
                        f'text-anchor="middle" font-size="11" '
                        f'fill="{text_fill}">{int(m[i, j])}</text>')
    return _write(path, body, width, height)


def svg_line(path, series: dict[str, tuple[np.ndarray, np.ndarray]],
             title: str = "", xlabel: str = "", ylabel: str = "",
             width: int = 720, height: int = 440) -> Path:
    """One polyline per named series."""
    margin = 64
    all_x = np.concatenate([np.asarray(x, dtype=float) for x, _ in series.values()])
    all_y = np.concatenate([np.asarray(y, dtype=float) for _, y in series.values()])
    sx = _scale(all_x, margin, width - margin)
    sy = _scale(all_y, height - margin, margin)
    body = [f'<rect width="{width}" height="{height}" fill="white"/>']
    if title:
        body.append(f'<text x="{width // 2}" y="24" text-anchor="middle" '
                    f'font-size="15">{title}</text>')
    if xlabel:
        body.append(f'<text x="{width // 2}" y="{height - 16}" '
                    f'text-anchor="middle" font-size="12">{xlabel}</text>')
    if ylabel:
        body.append(f'<text x="20" y="{height // 2}" text-anchor="middle" '
                    f'font-size="12" transform="rotate(-90 20 {height // 2})">{ylabel}</text>')
    # axis frame
    body.append(f'<rect x="{margin}" y="{margin}" width="{width - 2 * margin}" '
                f'height="{height - 2 * margin}" fill="none" stroke="#888"/>')
    for i, (name, (x, y)) in enumerate(series.items()):
        pts = " ".join(f"{_fmt(sx(a))},{_fmt(sy(b))}" for a, b in zip(x, y))
        col = PALETTE[i % len(PALETTE)]
        body.append(f'<polyline points="{pts}" fill="none" stroke="{col}" '
                    f'stroke-width="1.5"/>')
        body.append(f'<text x="{width - margin + 6}" y="{margin + 16 * i + 10}" '
                    f'font-size="11" fill="{col}">{name}</text>')
    return _write(path, body, width, height)
