"""Exact dyadic rationals and the torus geometry built on them.

A :class:`Dyadic` is ``num / 2**exp`` kept in canonical form (``exp == 0``
or ``num`` odd).  Points of the unit torus, grid cells and dyadic squares
are small immutable values on top of it.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from fractions import Fraction
from numbers import Integral, Rational

__all__ = [
    "Dyadic",
    "TorusPoint",
    "GridCell",
    "DyadicSquare",
    "Containment",
    "PointOutsideCell",
    "NotDyadicError",
    "translate_mod1",
    "cell_to_unit",
    "unit_to_cell",
    "cell_contains",
    "as_dyadic",
    "log2_exact",
]


class NotDyadicError(ValueError):
    """A value whose denominator is not a power of two."""


class PointOutsideCell(ValueError):
    """The point does not lie in the closed cell."""


def log2_exact(k: int) -> int:
    """Return ``e`` with ``2**e == k``; raise for anything else."""
    if k <= 0 or k & (k - 1):
        raise NotDyadicError(f"{k} is not a power of two")
    return k.bit_length() - 1


class Dyadic:
    """The exact rational ``num / 2**exp``.

    Integers and fractions whose denominator is a power of two are accepted
    wherever a Dyadic is expected.
    """

    __slots__ = ("_num", "_exp")

    _num: int
    _exp: int

    def __init__(self, num: int = 0, exp: int = 0):
        if not isinstance(num, Integral) or not isinstance(exp, Integral):
            raise TypeError("Dyadic(num, exp) takes integers")
        num = int(num)
        exp = int(exp)
        if exp < 0:
            num <<= -exp
            exp = 0
        if num == 0:
            exp = 0
        elif exp:
            tz = (num & -num).bit_length() - 1
            if tz:
                shift = min(tz, exp)
                num >>= shift
                exp -= shift
        self._num = num
        self._exp = exp

    @property
    def num(self) -> int:
        return self._num

    @property
    def exp(self) -> int:
        return self._exp

    # construction -----------------------------------------------------

    @classmethod
    def from_fraction(cls, q) -> "Dyadic":
        q = Fraction(q)
        return cls(q.numerator, log2_exact(q.denominator))

    @classmethod
    def parse(cls, text: str) -> "Dyadic":
        """Parse ``"p"``, ``"p/q"`` or ``"p/2^e"``."""
        text = text.strip()
        m = re.fullmatch(r"([+-]?\d+)\s*/\s*2\^(\d+)", text)
        if m:
            return cls(int(m.group(1)), int(m.group(2)))
        try:
            return cls.from_fraction(Fraction(text))
        except ValueError as exc:
            if isinstance(exc, NotDyadicError):
                raise
            raise ValueError(f"cannot parse dyadic value {text!r}") from None

    # conversion -------------------------------------------------------

    def as_fraction(self) -> Fraction:
        return Fraction(self._num, 1 << self._exp)

    def __float__(self) -> float:
        return self._num / (1 << self._exp) if self._exp < 1000 else float(self.as_fraction())

    def __repr__(self) -> str:
        return f"Dyadic({self._num}, {self._exp})"

    def __str__(self) -> str:
        if self._exp == 0:
            return str(self._num)
        return f"{self._num}/2^{self._exp}"

    def __hash__(self) -> int:
        return hash(self.as_fraction())

    def __bool__(self) -> bool:
        return self._num != 0

    # arithmetic -------------------------------------------------------

    def _align(self, other: "Dyadic"):
        e = max(self._exp, other._exp)
        return self._num << (e - self._exp), other._num << (e - other._exp), e

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        a, b, e = self._align(other)
        return Dyadic(a + b, e)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        a, b, e = self._align(other)
        return Dyadic(a - b, e)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return Dyadic(self._num * other._num, self._exp + other._exp)

    __rmul__ = __mul__

    def __neg__(self) -> "Dyadic":
        return Dyadic(-self._num, self._exp)

    def __pos__(self) -> "Dyadic":
        return self

    def __abs__(self) -> "Dyadic":
        return Dyadic(abs(self._num), self._exp)

    def shift(self, k: int) -> "Dyadic":
        """Multiply by ``2**k`` (``k`` may be negative)."""
        return Dyadic(self._num, self._exp - k)

    def half(self) -> "Dyadic":
        return self.shift(-1)

    def floor(self) -> int:
        return self._num >> self._exp

    def frac(self) -> "Dyadic":
        """The representative of ``self mod 1`` in ``[0, 1)``."""
        return Dyadic(self._num & ((1 << self._exp) - 1), self._exp)

    def __floor__(self) -> int:
        return self.floor()

    def __mod__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if not other:
            raise ZeroDivisionError("Dyadic modulo zero")
        a, b, e = self._align(other)
        return Dyadic(a % b, e)

    # comparison -------------------------------------------------------

    def _cmp(self, other) -> int | None:
        other = _coerce(other)
        if other is NotImplemented:
            if isinstance(other, Rational):
                f = self.as_fraction()
                return (f > other) - (f < other)
            return None
        a, b, _ = self._align(other)
        return (a > b) - (a < b)

    def __eq__(self, other):
        if isinstance(other, (Dyadic, Integral)):
            return self._cmp(other) == 0
        if isinstance(other, Rational):
            return self.as_fraction() == other
        if isinstance(other, float):
            return float(self) == other
        return NotImplemented

    def __lt__(self, other):
        c = self._cmp_any(other)
        return c if c is NotImplemented else c < 0

    def __le__(self, other):
        c = self._cmp_any(other)
        return c if c is NotImplemented else c <= 0

    def __gt__(self, other):
        c = self._cmp_any(other)
        return c if c is NotImplemented else c > 0

    def __ge__(self, other):
        c = self._cmp_any(other)
        return c if c is NotImplemented else c >= 0

    def _cmp_any(self, other):
        if isinstance(other, (Dyadic, Integral)):
            return self._cmp(other)
        if isinstance(other, Rational):
            f = self.as_fraction()
            return (f > other) - (f < other)
        if isinstance(other, float):
            f = float(self)
            return (f > other) - (f < other)
        return NotImplemented


def _coerce(value):
    if isinstance(value, Dyadic):
        return value
    if isinstance(value, Integral):
        return Dyadic(int(value))
    if isinstance(value, Fraction):
        d = value.denominator
        if d & (d - 1) == 0:
            return Dyadic(value.numerator, d.bit_length() - 1)
    return NotImplemented


def as_dyadic(value) -> Dyadic:
    """Coerce ints, power-of-two fractions and strings to :class:`Dyadic`."""
    if isinstance(value, str):
        return Dyadic.parse(value)
    if isinstance(value, Dyadic):
        return value
    if isinstance(value, Integral):
        return Dyadic(int(value))
    if isinstance(value, Rational):
        return Dyadic.from_fraction(value)
    raise TypeError(f"cannot convert {type(value).__name__} to Dyadic")


ZERO = Dyadic(0)
ONE = Dyadic(1)
HALF = Dyadic(1, 1)


@dataclass(frozen=True)
class TorusPoint:
    """A point of the unit square with exact coordinates.

    Coordinates are kept as given so that closed-cell boundary points such
    as ``y = 1`` stay expressible; :meth:`wrapped` reduces them mod 1.
    """

    x: Dyadic
    y: Dyadic

    def __post_init__(self):
        object.__setattr__(self, "x", as_dyadic(self.x))
        object.__setattr__(self, "y", as_dyadic(self.y))

    @classmethod
    def of(cls, x, y) -> "TorusPoint":
        return cls(as_dyadic(x), as_dyadic(y))

    def wrapped(self) -> "TorusPoint":
        return TorusPoint(self.x.frac(), self.y.frac())

    def as_tuple(self) -> tuple[Dyadic, Dyadic]:
        return (self.x, self.y)

    def __iter__(self):
        yield self.x
        yield self.y

    def __str__(self) -> str:
        return f"({self.x}, {self.y})"


def translate_mod1(p: TorusPoint, offset) -> TorusPoint:
    dx, dy = offset
    return TorusPoint((p.x + as_dyadic(dx)).frac(), (p.y + as_dyadic(dy)).frac())


class Containment(enum.Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


@dataclass(frozen=True)
class GridCell:
    """Cell ``(row, col)`` of the ``k``-by-``k`` grid; row 1 is the top stripe."""

    resolution: int
    row: int
    col: int

    def __post_init__(self):
        k = self.resolution
        log2_exact(k)
        if not (1 <= self.row <= k and 1 <= self.col <= k):
            raise IndexError(f"cell ({self.row}, {self.col}) outside a {k}x{k} grid")

    @property
    def side(self) -> Dyadic:
        return Dyadic(1, log2_exact(self.resolution))

    @property
    def x0(self) -> Dyadic:
        return self.side * (self.col - 1)

    @property
    def y0(self) -> Dyadic:
        return self.side * (self.resolution - self.row)

    @property
    def index(self) -> int:
        """Row-major index starting at the top-left cell."""
        return (self.row - 1) * self.resolution + (self.col - 1)

    @classmethod
    def from_index(cls, resolution: int, index: int) -> "GridCell":
        r, c = divmod(index, resolution)
        return cls(resolution, r + 1, c + 1)

    def center(self) -> TorusPoint:
        h = self.side.half()
        return TorusPoint(self.x0 + h, self.y0 + h)

    def square(self) -> "DyadicSquare":
        e = log2_exact(self.resolution)
        return DyadicSquare(e, self.col - 1, self.resolution - self.row)


def cell_contains(c: GridCell, p: TorusPoint) -> Containment:
    x0, y0, s = c.x0, c.y0, c.side
    x1, y1 = x0 + s, y0 + s
    if p.x < x0 or p.x > x1 or p.y < y0 or p.y > y1:
        return Containment.OUTSIDE
    if p.x == x0 or p.x == x1 or p.y == y0 or p.y == y1:
        return Containment.BOUNDARY
    return Containment.INTERIOR


def cell_to_unit(c: GridCell, p: TorusPoint) -> TorusPoint:
    """The affine map sending the closed cell onto ``[0, 1]^2``."""
    if cell_contains(c, p) is Containment.OUTSIDE:
        raise PointOutsideCell(f"{p} is not in {c}")
    k = c.resolution
    return TorusPoint((p.x - c.x0) * k, (p.y - c.y0) * k)


def unit_to_cell(c: GridCell, p: TorusPoint) -> TorusPoint:
    if not (0 <= p.x <= 1 and 0 <= p.y <= 1):
        raise PointOutsideCell(f"{p} is not in the unit square")
    s = c.side
    return TorusPoint(c.x0 + p.x * s, c.y0 + p.y * s)


@dataclass(frozen=True, order=True)
class DyadicSquare:
    """The half-open square ``[ix, ix+1) x [iy, iy+1)`` scaled by ``2**-level``.

    ``iy`` counts from the bottom, as in ordinary coordinates.
    """

    level: int
    ix: int
    iy: int

    @property
    def side(self) -> Dyadic:
        return Dyadic(1, self.level)

    @property
    def x0(self) -> Dyadic:
        return Dyadic(self.ix, self.level)

    @property
    def y0(self) -> Dyadic:
        return Dyadic(self.iy, self.level)

    def contains(self, p: TorusPoint) -> bool:
        n = 1 << self.level
        return (p.x * n).floor() == self.ix and (p.y * n).floor() == self.iy

    def children(self) -> list["DyadicSquare"]:
        """The four quarters, ordered top-left, top-right, bottom-left, bottom-right."""
        e, x, y = self.level + 1, 2 * self.ix, 2 * self.iy
        return [
            DyadicSquare(e, x, y + 1),
            DyadicSquare(e, x + 1, y + 1),
            DyadicSquare(e, x, y),
            DyadicSquare(e, x + 1, y),
        ]

    def ancestor(self, level: int) -> "DyadicSquare":
        d = self.level - level
        if d < 0:
            raise ValueError("ancestor level must not exceed the square's level")
        return DyadicSquare(level, self.ix >> d, self.iy >> d)

    def contains_square(self, other: "DyadicSquare") -> bool:
        return other.level >= self.level and other.ancestor(self.level) == self

    def cell(self) -> GridCell:
        k = 1 << self.level
        return GridCell(k, k - self.iy, self.ix + 1)

    def translated(self, offset) -> "DyadicSquare":
        """Image under a translation mod 1; the offset must be aligned to the level."""
        n = 1 << self.level
        dx, dy = as_dyadic(offset[0]) * n, as_dyadic(offset[1]) * n
        if dx.exp or dy.exp:
            raise NotDyadicError("offset is not a multiple of the square side")
        return DyadicSquare(self.level, (self.ix + dx.num) % n, (self.iy + dy.num) % n)

    def cell_indices(self, m: int):
        """Row-major indices of the resolution-``2**m`` cells inside this square."""
        d = m - self.level
        if d < 0:
            raise ValueError("resolution coarser than the square")
        n = 1 << m
        w = 1 << d
        x0, y0 = self.ix << d, self.iy << d
        return [(n - 1 - (y0 + j)) * n + (x0 + i) for j in range(w) for i in range(w)]
