"""Deterministic SVG pictures of the planar coloring.

The three planar color classes nest: squares of half-width delta_0 at
the lattice points, strips of half-width delta_1 along the lattice
lines minus those squares, and the leftover interior.  Painting in the
reverse order (interior rectangle, then full strips, then full squares)
reproduces the set differences without computing any, because later
fills cover earlier ones exactly where the definitions subtract.

Output is plain SVG 1.1 with coordinates formatted from exact rationals
at fixed precision, so the same window renders to identical bytes on
every run and platform.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .errors import DomainError
from .num import to_fraction
from .partition import PartitionSpec

PALETTE = ("#3b6aa0", "#e0a458", "#eceae4")

Window = tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]]

DEFAULT_WINDOW: Window = (
    (Fraction(-1, 2), Fraction(5, 2)),
    (Fraction(-1, 2), Fraction(5, 2)),
)


def _fmt(v: Fraction) -> str:
    """Fixed six-decimal formatting via integer arithmetic only."""
    scaled = v * 10 ** 6
    n = scaled.numerator // scaled.denominator
    if 2 * (scaled - n) >= 1:
        n += 1
    sign = "-" if n < 0 else ""
    n = abs(n)
    whole, frac = divmod(n, 10 ** 6)
    out = f"{sign}{whole}.{frac:06d}".rstrip("0").rstrip(".")
    return out if out not in ("", "-") else "0"


def _rect(x: Fraction, y: Fraction, w: Fraction, h: Fraction) -> str:
    return (f'<rect x="{_fmt(x)}" y="{_fmt(y)}" '
            f'width="{_fmt(w)}" height="{_fmt(h)}"/>')


def _clip(lo: Fraction, hi: Fraction, a: Fraction, b: Fraction):
    """Intersection of [lo, hi] with [a, b], or None."""
    s, e = max(lo, a), min(hi, b)
    return (s, e) if s < e else None


def render_svg(spec: PartitionSpec, window: Window = DEFAULT_WINDOW,
               px_per_unit: int = 200,
               palette: tuple[str, str, str] = PALETTE) -> str:
    """Render the coloring of the plane over a rectangular window.

    Coordinates are in partition units (the unit lattice); only m = 2 is
    drawable.  Colors 1, 2, 3 map to palette entries 0, 1, 2.  Layers
    that do not intersect the window are omitted entirely, so a window
    avoiding the lattice shows fewer than three fills.
    """
    if spec.m != 2:
        raise DomainError("only the planar coloring can be rendered")
    if px_per_unit < 1:
        raise DomainError("px_per_unit must be at least 1")
    (x0, x1), (y0, y1) = (
        (to_fraction(a), to_fraction(b)) for a, b in window
    )
    if not (x0 < x1 and y0 < y1):
        raise DomainError("window must have positive extent")
    d0, d1 = spec.delta[0], spec.delta[1]
    s = Fraction(px_per_unit)

    def X(v: Fraction) -> Fraction:
        return (v - x0) * s

    def Y(v: Fraction) -> Fraction:
        # svg y grows downward; flip so the figure reads y-up
        return (y1 - v) * s

    def box(ax, ay, bx, by) -> str:
        return _rect(X(ax), Y(by), (bx - ax) * s, (by - ay) * s)

    width, height = (x1 - x0) * s, (y1 - y0) * s

    strips: list[str] = []
    for n in range(math.ceil(x0 - d1), math.floor(x1 + d1) + 1):
        seg = _clip(n - d1, n + d1, x0, x1)
        if seg:
            strips.append(box(seg[0], y0, seg[1], y1))
    for n in range(math.ceil(y0 - d1), math.floor(y1 + d1) + 1):
        seg = _clip(n - d1, n + d1, y0, y1)
        if seg:
            strips.append(box(x0, seg[0], x1, seg[1]))

    squares: list[str] = []
    for nx in range(math.ceil(x0 - d0), math.floor(x1 + d0) + 1):
        sx = _clip(nx - d0, nx + d0, x0, x1)
        if not sx:
            continue
        for ny in range(math.ceil(y0 - d0), math.floor(y1 + d0) + 1):
            sy = _clip(ny - d0, ny + d0, y0, y1)
            if sy:
                squares.append(box(sx[0], sy[0], sx[1], sy[1]))

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_fmt(width)}" height="{_fmt(height)}" '
        f'viewBox="0 0 {_fmt(width)} {_fmt(height)}">',
        f'<rect x="0" y="0" width="{_fmt(width)}" height="{_fmt(height)}" '
        f'fill="{palette[2]}"/>',
    ]
    if strips:
        lines.append(f'<g fill="{palette[1]}">')
        lines.extend(strips)
        lines.append("</g>")
    if squares:
        lines.append(f'<g fill="{palette[0]}">')
        lines.extend(squares)
        lines.append("</g>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def fills_used(svg: str) -> list[str]:
    """Distinct fill values in document order; a convenience for tests
    and the CLI to count colors without an XML dependency."""
    out: list[str] = []
    for chunk in svg.split('fill="')[1:]:
        val = chunk.split('"', 1)[0]
        if val not in out:
            out.append(val)
    return out


def color_at(spec: PartitionSpec, x: Fraction, y: Fraction) -> int:
    """Color of a point under the painter stack used by render_svg.

    Mirrors the layering rather than the partition code, so tests can
    compare the two routes independently.
    """
    d0, d1 = spec.delta[0], spec.delta[1]

    def near(v: Fraction, r: Fraction) -> bool:
        n = math.floor(v)
        return v - n <= r or (n + 1) - v <= r

    if near(x, d0) and near(y, d0):
        return 1
    if near(x, d1) or near(y, d1):
        return 2
    return 3
