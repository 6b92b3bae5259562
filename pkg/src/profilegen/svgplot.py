"""Tiny dependency-free SVG chart writer for the figure-analogue exports."""

from __future__ import annotations

from pathlib import Path

import numpy as np

WIDTH, HEIGHT = 640, 400
MARGIN = 50
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


def _scale(values, lo, hi, out_lo, out_hi):
    span = hi - lo if hi > lo else 1.0
    return out_lo + (np.asarray(values, dtype=float) - lo) * (out_hi - out_lo) / span


def _header(title: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="20" text-anchor="middle" font-size="14" '
        f'font-family="sans-serif">{title}</text>',
    ]


def _axes(x_lo, x_hi, y_lo, y_hi) -> list[str]:
    parts = [
        f'<line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN}" '
        f'y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
    ]
    for frac in (0.0, 0.5, 1.0):
        xv = x_lo + frac * (x_hi - x_lo)
        yv = y_lo + frac * (y_hi - y_lo)
        xpix = MARGIN + frac * (WIDTH - 2 * MARGIN)
        ypix = HEIGHT - MARGIN - frac * (HEIGHT - 2 * MARGIN)
        parts.append(
            f'<text x="{xpix:.1f}" y="{HEIGHT - MARGIN + 16}" text-anchor="middle" '
            f'font-size="10" font-family="sans-serif">{xv:.3g}</text>'
        )
        parts.append(
            f'<text x="{MARGIN - 6}" y="{ypix:.1f}" text-anchor="end" font-size="10" '
            f'font-family="sans-serif">{yv:.3g}</text>'
        )
    return parts


def line_chart(series: list[tuple[str, np.ndarray, np.ndarray]], title: str, path: Path) -> None:
    """Polyline chart; series is a list of (label, x, y)."""
    xs = np.concatenate([np.asarray(s[1], dtype=float) for s in series])
    ys = np.concatenate([np.asarray(s[2], dtype=float) for s in series])
    x_lo, x_hi = float(xs.min()), float(xs.max())
    y_lo, y_hi = float(min(ys.min(), 0.0)), float(ys.max())
    parts = _header(title) + _axes(x_lo, x_hi, y_lo, y_hi)
    for i, (label, x, y) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        px = _scale(x, x_lo, x_hi, MARGIN, WIDTH - MARGIN)
        py = _scale(y, y_lo, y_hi, HEIGHT - MARGIN, MARGIN)
        points = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))
        parts.append(f'<polyline points="{points}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        parts.append(
            f'<text x="{WIDTH - MARGIN + 4}" y="{MARGIN + 14 * i}" font-size="10" '
            f'font-family="sans-serif" fill="{color}">{label}</text>'
        )
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")


def bar_chart(labels: list[str], groups: dict[str, list[float]], title: str, path: Path) -> None:
    """Grouped bars; groups maps a series name to one value per label."""
    values = np.array(list(groups.values()), dtype=float)
    y_hi = float(values.max()) if values.size else 1.0
    parts = _header(title) + _axes(0, len(labels), 0.0, y_hi)
    n_groups = len(groups)
    slot = (WIDTH - 2 * MARGIN) / max(1, len(labels))
    bar_w = slot * 0.8 / max(1, n_groups)
    for gi, (name, vals) in enumerate(groups.items()):
        color = PALETTE[gi % len(PALETTE)]
        for li, value in enumerate(vals):
            x = MARGIN + li * slot + slot * 0.1 + gi * bar_w
            h = (value / y_hi) * (HEIGHT - 2 * MARGIN) if y_hi > 0 else 0.0
            y = HEIGHT - MARGIN - h
            parts.append(
                f'<rect x="{x:.2f}" y="{y:.2f}" width="{bar_w:.2f}" height="{h:.2f}" fill="{color}"/>'
            )
        parts.append(
            f'<text x="{WIDTH - MARGIN + 4}" y="{MARGIN + 14 * gi}" font-size="10" '
            f'font-family="sans-serif" fill="{color}">{name}</text>'
        )
    for li, label in enumerate(labels):
        x = MARGIN + (li + 0.5) * slot
        parts.append(
            f'<text x="{x:.2f}" y="{HEIGHT - MARGIN + 16}" text-anchor="middle" font-size="10" '
            f'font-family="sans-serif">{label}</text>'
        )
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")


def heatmap(matrix: np.ndarray, title: str, path: Path) -> None:
    """Grayscale-to-blue intensity map, row 0 at the top."""
    grid = np.asarray(matrix, dtype=float)
    peak = grid.max() if grid.max() > 0 else 1.0
    rows, cols = grid.shape
    cell_w = (WIDTH - 2 * MARGIN) / cols
    cell_h = (HEIGHT - 2 * MARGIN) / rows
    parts = _header(title)
    for r in range(rows):
        for c in range(cols):
            intensity = grid[r, c] / peak
            shade = int(255 * (1.0 - intensity))
            x = MARGIN + c * cell_w
            y = MARGIN + r * cell_h
            parts.append(
                f'<rect x="{x:.2f}" y="{y:.2f}" width="{cell_w:.2f}" height="{cell_h:.2f}" '
                f'fill="rgb({shade},{shade},255)"/>'
            )
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")
