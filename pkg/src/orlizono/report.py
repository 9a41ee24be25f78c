"""CSV and SVG emission. Everything here is byte-deterministic."""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if x != x:
            return "nan"
        return format(x, ".12g")
    return str(x)


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(x) for x in row])
    return buf.getvalue()


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(csv_text(header, rows), encoding="utf-8")
    return path


_COLORS = ("#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd")


def svg_line_plot(path, title: str, xs, series: dict, markers: Sequence[tuple[float, float]] = (),
                  xlabel: str = "t", width: int = 800, height: int = 600) -> Path:
    """Line plot of one or more series; ``markers`` are drawn as red rings."""
    xs = np.asarray(xs, dtype=float)
    left, right, top, bottom = 80, 30, 50, 60
    ys_all = np.concatenate([np.asarray(v, dtype=float) for v in series.values()] +
                            [np.array([m[1] for m in markers])] if markers else
                            [np.asarray(v, dtype=float) for v in series.values()])
    ymin, ymax = float(ys_all.min()), float(ys_all.max())
    if ymax - ymin < 1e-12 * max(1.0, abs(ymax)):
        pad = 0.5 * max(abs(ymax), 1e-12)
        ymin, ymax = ymin - pad, ymax + pad
    xmin, xmax = float(xs.min()), float(xs.max())
    if xmax == xmin:
        xmax = xmin + 1.0

    def px(x):
        return left + (x - xmin) / (xmax - xmin) * (width - left - right)

    def py(y):
        return height - bottom - (y - ymin) / (ymax - ymin) * (height - top - bottom)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="28" text-anchor="middle" font-family="sans-serif" '
        f'font-size="18">{_esc(title)}</text>',
        f'<line x1="{left}" y1="{height - bottom}" x2="{width - right}" y2="{height - bottom}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{height - bottom}" stroke="black"/>',
        f'<text x="{width / 2:.1f}" y="{height - 15}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="14">{_esc(xlabel)}</text>',
    ]
    for k in range(5):
        yv = ymin + k * (ymax - ymin) / 4
        out.append(f'<text x="{left - 8}" y="{py(yv) + 4:.1f}" text-anchor="end" font-family="sans-serif" '
                   f'font-size="11">{fmt(float(f"{yv:.6g}"))}</text>')
        xv = xmin + k * (xmax - xmin) / 4
        out.append(f'<text x="{px(xv):.1f}" y="{height - bottom + 18}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="11">{fmt(float(f"{xv:.4g}"))}</text>')
    for j, (name, ys) in enumerate(series.items()):
        color = _COLORS[j % len(_COLORS)]
        pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{pts}"/>')
        for x, y in zip(xs, ys):
            out.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="3" fill="{color}"/>')
        out.append(f'<text x="{width - right - 5}" y="{top + 16 * (j + 1)}" text-anchor="end" '
                   f'font-family="sans-serif" font-size="12" fill="{color}">{_esc(name)}</text>')
    for x, y in markers:
        out.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="8" fill="none" stroke="red" stroke-width="2"/>')
    out.append("</svg>")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(out) + "\n", encoding="utf-8")
    return path


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
