"""A tiny dependency-free SVG line chart for phase-transition curves.

One panel per algorithm, success rate against sparsity, one polyline per
channel count.  Output is a deterministic function of the input numbers.
"""

from __future__ import annotations

from typing import Sequence
from xml.sax.saxutils import escape

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")
_W, _H = 320, 240
_ML, _MR, _MT, _MB = 48, 12, 28, 40


def _f(x: float) -> str:
    return f"{x:.2f}"


def _panel(title: str, k_grid: Sequence[int], series: dict, x0: float) -> list[str]:
    pw, ph = _W - _ML - _MR, _H - _MT - _MB
    kmin, kmax = min(k_grid), max(k_grid)
    span = (kmax - kmin) or 1

    def px(k):
        return x0 + _ML + (k - kmin) / span * pw

    def py(r):
        return _MT + (1.0 - r) * ph

    out = [f'<text x="{_f(x0 + _ML + pw / 2)}" y="16" text-anchor="middle" '
           f'font-size="13">{escape(title)}</text>',
           f'<rect x="{_f(x0 + _ML)}" y="{_MT}" width="{pw}" height="{ph}" '
           f'fill="none" stroke="#000"/>']
    for r in (0.0, 0.25, 0.5, 0.75, 1.0):
        out.append(f'<text x="{_f(x0 + _ML - 4)}" y="{_f(py(r) + 4)}" text-anchor="end" '
                   f'font-size="10">{r:.2f}</text>')
    for k in k_grid:
        out.append(f'<text x="{_f(px(k))}" y="{_f(_MT + ph + 14)}" text-anchor="middle" '
                   f'font-size="10">{k}</text>')
    out.append(f'<text x="{_f(x0 + _ML + pw / 2)}" y="{_H - 6}" text-anchor="middle" '
               f'font-size="11">k</text>')
    for i, (label, rates) in enumerate(series.items()):
        color = _PALETTE[i % len(_PALETTE)]
        pts = " ".join(f"{_f(px(k))},{_f(py(r))}" for k, r in zip(k_grid, rates))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        ly = _MT + 12 + 14 * i
        lx = x0 + _ML + pw - 60
        out.append(f'<line x1="{_f(lx)}" y1="{ly - 4}" x2="{_f(lx + 14)}" y2="{ly - 4}" '
                   f'stroke="{color}" stroke-width="1.5"/>')
        out.append(f'<text x="{_f(lx + 18)}" y="{ly}" font-size="10">{escape(label)}</text>')
    return out


def phase_curve_svg(curve) -> str:
    """Render a :class:`~jointsparse.montecarlo.PhaseCurve` as an SVG document."""
    cfg = curve.config
    algs = list(cfg.algorithms)
    body = []
    for i, alg in enumerate(algs):
        series = {f"L={L}": curve.rates(alg, L) for L in cfg.L_grid}
        title = f"{alg} ({cfg.ensemble} {cfg.n}x{cfg.n_columns}, {cfg.model})"
        body.extend(_panel(title, list(cfg.k_grid), series, i * _W))
    width = _W * len(algs)
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{_H}" '
            f'viewBox="0 0 {width} {_H}" font-family="sans-serif">')
    return "\n".join([head, f'<rect width="{width}" height="{_H}" fill="#fff"/>', *body, "</svg>"]) + "\n"
