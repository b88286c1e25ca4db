"""Plain SVG drawings of configurations, partitions and movements.

Row 1 is drawn on top, so pictures read like the label matrices.
"""

from __future__ import annotations

from typing import Iterable, Sequence
from xml.sax.saxutils import escape

from .automorphism import PiecewiseTranslation, StageIndex, column_levels
from .configuration import Configuration, Movement, apply_movement
from .dyadic import DyadicSquare

__all__ = ["configuration_svg", "movement_svg", "partition_svg", "column_svg"]

_PALETTE = ["#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3", "#fdb462",
            "#b3de69", "#fccde5", "#d9d9d9", "#bc80bd", "#ccebc5", "#ffed6f"]


def _doc(width: float, height: float, body: Iterable[str]) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:g}" height="{height:g}" '
            f'viewBox="0 0 {width:g} {height:g}">')
    return "\n".join([head, *body, "</svg>"]) + "\n"


def _grid_panel(gamma: Configuration, x: float, y: float, size: float,
                highlight: set[tuple[int, int]] = frozenset(), title: str | None = None) -> list[str]:
    n = gamma.size
    c = size / n
    out = []
    if title:
        out.append(f'<text x="{x + size / 2:g}" y="{y - 6:g}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="14">{escape(title)}</text>')
    font = max(6.0, min(18.0, c * 0.45))
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            cx, cy = x + (j - 1) * c, y + (i - 1) * c
            fill = "#fdd49e" if (i, j) in highlight else "white"
            out.append(f'<rect x="{cx:g}" y="{cy:g}" width="{c:g}" height="{c:g}" '
                       f'fill="{fill}" stroke="black" stroke-width="1"/>')
            out.append(f'<text x="{cx + c / 2:g}" y="{cy + c / 2 + font / 3:g}" text-anchor="middle" '
                       f'font-family="sans-serif" font-size="{font:g}">{gamma.at(i, j)}</text>')
    return out


def configuration_svg(gamma: Configuration, size: float = 320.0) -> str:
    """The label matrix as a grid of numbered squares."""
    pad = 10.0
    return _doc(size + 2 * pad, size + 2 * pad, _grid_panel(gamma, pad, pad, size))


def movement_svg(gamma: Configuration, m: Movement, size: float = 260.0) -> str:
    """Before and after panels for a single movement; moved cells are shaded."""
    after = apply_movement(gamma, m)
    moved = set(m.cell_map(gamma.size))
    pad, gap, top = 10.0, 40.0, 30.0
    body = _grid_panel(gamma, pad, top, size, moved, "before")
    body += [f'<text x="{pad + size + gap / 2:g}" y="{top + size / 2:g}" text-anchor="middle" '
             f'font-family="sans-serif" font-size="14">{escape(str(m))}</text>']
    body += _grid_panel(after, pad + size + gap, top, size, moved, "after")
    return _doc(2 * size + gap + 2 * pad, size + top + pad, body)


def _square_rect(sq: DyadicSquare, size: float, pad: float, fill: str, label: str | None) -> list[str]:
    s = size / (1 << sq.level)
    x = pad + sq.ix * s
    y = pad + ((1 << sq.level) - 1 - sq.iy) * s
    out = [f'<rect x="{x:g}" y="{y:g}" width="{s:g}" height="{s:g}" fill="{fill}" '
           f'stroke="black" stroke-width="0.5"/>']
    if label is not None:
        font = max(4.0, min(14.0, s * 0.35))
        out.append(f'<text x="{x + s / 2:g}" y="{y + s / 2 + font / 3:g}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="{font:g}">{escape(label)}</text>')
    return out


def partition_svg(f: PiecewiseTranslation, size: float = 480.0, labels: bool = True) -> str:
    """The domains of a piecewise translation, coloured by level and numbered in list order."""
    pad = 10.0
    body = [f'<rect x="{pad:g}" y="{pad:g}" width="{size:g}" height="{size:g}" fill="white" stroke="black"/>']
    for idx, p in enumerate(f.pieces, 1):
        fill = _PALETTE[p.square.level % len(_PALETTE)]
        body += _square_rect(p.square, size, pad, fill, str(idx) if labels else None)
    return _doc(size + 2 * pad, size + 2 * pad, body)


def column_svg(n: int, size: float = 480.0) -> str:
    """The levels Q_{n,1..h_n} of the n-th column, numbered by height, plus the remainder square."""
    pad = 10.0
    body = [f'<rect x="{pad:g}" y="{pad:g}" width="{size:g}" height="{size:g}" fill="white" stroke="black"/>']
    levels: Sequence[DyadicSquare] = column_levels(n)
    for i, sq in enumerate(levels, 1):
        body += _square_rect(sq, size, pad, "#c6dbef", str(i))
    if n >= 1:
        body += _square_rect(StageIndex(n).remainder(), size, pad, "#d9d9d9", "R")
    return _doc(size + 2 * pad, size + 2 * pad, body)
