"""Minimal standalone SVG line plots on log-log axes."""
from __future__ import annotations

import math
from typing import Sequence

W, H = 640, 420
LEFT, RIGHT, TOP, BOTTOM = 80, 20, 40, 60


def _fmt(v: float) -> str:
    return f"{v:.3g}"


def loglog_svg(xs: Sequence[float], ys: Sequence[float], xlabel: str, ylabel: str,
               title: str = "") -> str:
    pts = [(x, y) for x, y in zip(xs, ys) if x > 0 and y > 0]
    if not pts:
        raise ValueError("log-log plot needs at least one positive point")
    lx = [math.log10(x) for x, _ in pts]
    ly = [math.log10(y) for _, y in pts]
    x0, x1 = min(lx), max(lx)
    y0, y1 = min(ly), max(ly)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pw, ph = W - LEFT - RIGHT, H - TOP - BOTTOM
    sx = lambda v: LEFT + (v - x0) / (x1 - x0) * pw  # noqa: E731
    sy = lambda v: TOP + (y1 - v) / (y1 - y0) * ph  # noqa: E731

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
           f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">',
           f'<rect width="{W}" height="{H}" fill="white"/>',
           f'<line x1="{LEFT}" y1="{TOP + ph}" x2="{LEFT + pw}" y2="{TOP + ph}" stroke="black"/>',
           f'<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{TOP + ph}" stroke="black"/>']
    for v, (x, y) in zip(lx, pts):
        out.append(f'<line x1="{sx(v):.2f}" y1="{TOP + ph}" x2="{sx(v):.2f}" y2="{TOP + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{sx(v):.2f}" y="{TOP + ph + 18}" text-anchor="middle">{_fmt(x)}</text>')
    for v, (x, y) in zip(ly, pts):
        out.append(f'<line x1="{LEFT - 5}" y1="{sy(v):.2f}" x2="{LEFT}" y2="{sy(v):.2f}" stroke="black"/>')
        out.append(f'<text x="{LEFT - 8}" y="{sy(v) + 4:.2f}" text-anchor="end">{_fmt(y)}</text>')
    poly = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(lx, ly))
    out.append(f'<polyline points="{poly}" fill="none" stroke="steelblue" stroke-width="2"/>')
    for a, b in zip(lx, ly):
        out.append(f'<circle cx="{sx(a):.2f}" cy="{sy(b):.2f}" r="3" fill="steelblue"/>')
    out.append(f'<text x="{LEFT + pw / 2}" y="{H - 15}" text-anchor="middle">{xlabel}</text>')
    out.append(f'<text x="18" y="{TOP + ph / 2}" text-anchor="middle" '
               f'transform="rotate(-90 18 {TOP + ph / 2})">{ylabel}</text>')
    if title:
        out.append(f'<text x="{W / 2}" y="22" text-anchor="middle" font-size="14">{title}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
