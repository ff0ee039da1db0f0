"""Minimal SVG line charts (no plotting dependency)."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 640, 420
MARGIN = dict(left=70, right=20, top=40, bottom=55)
COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def _fmt(v: float) -> str:
    return f"{v:.3g}"


def _ticks(lo, hi, log):
    if log:
        a, b = math.floor(lo), math.ceil(hi)
        step = max(1, (b - a) // 6)
        return [(t, "1e%d" % t) for t in range(a, b + 1, step)]
    if hi == lo:
        return [(lo, _fmt(lo))]
    raw = (hi - lo) / 5
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    start = math.ceil(lo / step) * step
    out, t = [], start
    while t <= hi + 1e-12 * abs(hi):
        out.append((t, _fmt(t)))
        t += step
    return out


def line_chart(series: dict, *, title="", xlabel="", ylabel="", logx=False, logy=False) -> str:
    """SVG text for ``{label: (xs, ys)}``; nonpositive values are skipped on log axes."""
    pts = {}
    for label, (xs, ys) in series.items():
        keep = [
            (math.log10(x) if logx else x, math.log10(y) if logy else y)
            for x, y in zip(xs, ys)
            if math.isfinite(x) and math.isfinite(y) and (not logx or x > 0) and (not logy or y > 0)
        ]
        pts[label] = keep
    allp = [p for v in pts.values() for p in v]
    if allp:
        x0, x1 = min(p[0] for p in allp), max(p[0] for p in allp)
        y0, y1 = min(p[1] for p in allp), max(p[1] for p in allp)
    else:
        x0, x1, y0, y1 = 0.0, 1.0, 0.0, 1.0
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def sx(x):
        return MARGIN["left"] + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return MARGIN["top"] + (1 - (y - y0) / (y1 - y0)) * ph

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="22" text-anchor="middle" font-family="sans-serif" font-size="15">{escape(title)}</text>',
        f'<rect x="{MARGIN["left"]}" y="{MARGIN["top"]}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>',
    ]
    for t, lab in _ticks(x0, x1, logx):
        X = sx(t)
        parts.append(f'<line x1="{X:.1f}" y1="{MARGIN["top"] + ph}" x2="{X:.1f}" y2="{MARGIN["top"] + ph + 5}" stroke="#444"/>')
        parts.append(f'<text x="{X:.1f}" y="{MARGIN["top"] + ph + 18}" text-anchor="middle" font-family="sans-serif" font-size="11">{lab}</text>')
    for t, lab in _ticks(y0, y1, logy):
        Y = sy(t)
        parts.append(f'<line x1="{MARGIN["left"] - 5}" y1="{Y:.1f}" x2="{MARGIN["left"]}" y2="{Y:.1f}" stroke="#444"/>')
        parts.append(f'<text x="{MARGIN["left"] - 8}" y="{Y + 4:.1f}" text-anchor="end" font-family="sans-serif" font-size="11">{lab}</text>')
    parts.append(f'<text x="{WIDTH / 2}" y="{HEIGHT - 12}" text-anchor="middle" font-family="sans-serif" font-size="12">{escape(xlabel)}{" (log)" if logx else ""}</text>')
    parts.append(
        f'<text x="16" y="{HEIGHT / 2}" text-anchor="middle" font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 16 {HEIGHT / 2})">{escape(ylabel)}{" (log)" if logy else ""}</text>'
    )
    for i, (label, p) in enumerate(pts.items()):
        color = COLORS[i % len(COLORS)]
        if len(p) > 1:
            path = " ".join(f"{sx(x):.1f},{sy(y):.1f}" for x, y in p)
            parts.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        for x, y in p:
            parts.append(f'<circle cx="{sx(x):.1f}" cy="{sy(y):.1f}" r="2.5" fill="{color}"/>')
        ly = MARGIN["top"] + 14 + 16 * i
        parts.append(f'<text x="{MARGIN["left"] + pw - 8}" y="{ly}" text-anchor="end" font-family="sans-serif" font-size="11" fill="{color}">{escape(label)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
