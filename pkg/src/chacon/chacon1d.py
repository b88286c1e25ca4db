"""Chacon's one-dimensional cutting-and-stacking map, in exact rationals.

Endpoints have denominators that are powers of three, so this module uses
:class:`fractions.Fraction` rather than the dyadic type.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

__all__ = [
    "Interval",
    "ColumnTower1D",
    "IntervalMap",
    "chacon_1d_build",
    "chacon_1d_column",
    "chacon_1d_map",
    "literal_agreement_region",
]


@dataclass(frozen=True, order=True)
class Interval:
    """The half-open interval ``[a, b)``."""

    a: Fraction
    b: Fraction

    def __post_init__(self):
        object.__setattr__(self, "a", Fraction(self.a))
        object.__setattr__(self, "b", Fraction(self.b))
        if self.b <= self.a:
            raise ValueError("empty interval")

    @property
    def length(self) -> Fraction:
        return self.b - self.a

    def thirds(self) -> tuple["Interval", "Interval", "Interval"]:
        d = self.length / 3
        return (
            Interval(self.a, self.a + d),
            Interval(self.a + d, self.a + 2 * d),
            Interval(self.a + 2 * d, self.b),
        )

    def __str__(self) -> str:
        return f"[{self.a}, {self.b})"


@dataclass(frozen=True)
class ColumnTower1D:
    """Levels of the column C_n listed bottom to top, plus the spacer reserve R_n = [r, 1]."""

    n: int
    levels: tuple[Interval, ...]
    remainder_start: Fraction

    @property
    def height(self) -> int:
        return len(self.levels)

    @property
    def spacer(self) -> Interval:
        """S_n, the part of R_n used when cutting C_n."""
        return Interval(self.remainder_start, self.remainder_start + self.levels[0].length / 3)


class IntervalMap:
    """A piecewise translation of ``[0, 1]``: each source interval moves by its offset."""

    def __init__(self, pieces: Iterable[tuple[Interval, Fraction]] = ()):
        self.pieces = sorted((iv, Fraction(off)) for iv, off in pieces)
        for (p, _), (q, _) in zip(self.pieces, self.pieces[1:]):
            if q.a < p.b:
                raise ValueError("source intervals overlap")

    @classmethod
    def from_assignment(cls, pairs: Iterable[tuple[Interval, Interval]]) -> "IntervalMap":
        out = []
        for src, dst in pairs:
            if src.length != dst.length:
                raise ValueError("a piece must map onto an interval of equal length")
            if dst.a != src.a:
                out.append((src, dst.a - src.a))
        return cls(out)

    def offset_at(self, x: Fraction) -> Fraction:
        for iv, off in self.pieces:
            if iv.a <= x < iv.b:
                return off
        return Fraction(0)

    def __call__(self, x) -> Fraction:
        x = Fraction(x)
        return x + self.offset_at(x)

    def breakpoints(self) -> set[Fraction]:
        pts = set()
        for iv, _ in self.pieces:
            pts.add(iv.a)
            pts.add(iv.b)
        return pts

    def disagreement(self, other: "IntervalMap", region: Iterable[Interval] | None = None) -> list[Interval]:
        """Maximal pieces of ``region`` (default ``[0, 1)``) where the two maps differ."""
        region = list(region) if region is not None else [Interval(0, 1)]
        out: list[Interval] = []
        cuts = self.breakpoints() | other.breakpoints()
        for r in region:
            pts = sorted({r.a, r.b} | {c for c in cuts if r.a < c < r.b})
            for a, b in zip(pts, pts[1:]):
                if self.offset_at(a) != other.offset_at(a):
                    if out and out[-1].b == a:
                        out[-1] = Interval(out[-1].a, b)
                    else:
                        out.append(Interval(a, b))
        return out


def _complement(parts: Iterable[Interval]) -> list[Interval]:
    out, x = [], Fraction(0)
    for iv in sorted(parts):
        if iv.a > x:
            out.append(Interval(x, iv.a))
        x = max(x, iv.b)
    if x < 1:
        out.append(Interval(x, 1))
    return out


def chacon_1d_column(n: int) -> ColumnTower1D:
    if n < 0:
        raise ValueError("n must be nonnegative")
    levels = (Interval(0, Fraction(2, 3)),)
    r = Fraction(2, 3)
    for step in range(n):
        thirds = [lv.thirds() for lv in levels]
        spacer = Interval(r, r + levels[0].length / 3)
        levels = (
            tuple(t[0] for t in thirds)
            + tuple(t[1] for t in thirds)
            + (spacer,)
            + tuple(t[2] for t in thirds)
        )
        r = spacer.b
    return ColumnTower1D(n, levels, r)


def chacon_1d_build(n: int) -> tuple[ColumnTower1D, IntervalMap]:
    """The column C_n and the map T_{n+1} built from it."""
    col = chacon_1d_column(n)
    lv = col.levels
    h = len(lv)
    parts = [x.thirds() for x in lv]
    spacer = col.spacer
    pairs = []
    for j in range(h - 1):
        for i in range(3):
            pairs.append((parts[j][i], parts[j + 1][i]))
    top = parts[h - 1]
    pairs += [
        (top[0], parts[0][1]),
        (top[1], spacer),
        (top[2], parts[0][0]),
        (spacer, parts[0][2]),
    ]
    return col, IntervalMap.from_assignment(pairs)


def chacon_1d_map(n: int) -> IntervalMap:
    """T_n; ``T_0`` is the identity."""
    if n == 0:
        return IntervalMap()
    return chacon_1d_build(n - 1)[1]


def literal_agreement_region(n: int) -> list[Interval]:
    """The complement of the lower ``h_n - 1`` levels of C_n."""
    col = chacon_1d_column(n)
    return _complement(col.levels[:-1])
