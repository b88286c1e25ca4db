"""Label matrices on the n-by-n grid and the movements that permute them.

A movement acts on a :class:`Configuration` by pushing every label along a
cell permutation: the label sitting in cell ``c`` ends up in ``pi(c)``.
Indices are 1-based and row 1 is the top row.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

from .dyadic import Dyadic, log2_exact

__all__ = [
    "Configuration",
    "InvalidMovement",
    "SimpleExchange",
    "SortColumns",
    "SortRows",
    "Shift",
    "ShiftCol",
    "RotateCCW",
    "RotateCW",
    "Movement",
    "MovementSequence",
    "apply_movement",
    "apply_sequence",
    "movement_to_cell_permutation",
    "movement_displacements",
    "inverse_movement",
    "inverse_sequence",
    "chacon_v_sequence",
    "sequence_to_cell_permutation",
    "parse_movement",
]


class InvalidMovement(ValueError):
    """Movement indices out of range or cells not adjacent."""


Cell = tuple[int, int]


@dataclass(frozen=True)
class Configuration:
    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(int(v) for v in row) for row in self.entries)
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise ValueError("a configuration is a non-empty square matrix")
        if sorted(v for r in rows for v in r) != list(range(1, n * n + 1)):
            raise ValueError("entries must be a bijection onto 1..n^2")
        object.__setattr__(self, "entries", rows)

    @property
    def size(self) -> int:
        return len(self.entries)

    @classmethod
    def identity(cls, n: int) -> "Configuration":
        return cls(tuple(tuple(range(r * n + 1, r * n + n + 1)) for r in range(n)))

    @classmethod
    def from_json(cls, text: str) -> "Configuration":
        return cls(json.loads(text))

    def to_json(self) -> str:
        return json.dumps([list(r) for r in self.entries])

    def to_list(self) -> list[list[int]]:
        return [list(r) for r in self.entries]

    def at(self, i: int, j: int) -> int:
        return self.entries[i - 1][j - 1]

    def position(self, label: int) -> Cell:
        for i, row in enumerate(self.entries, 1):
            for j, v in enumerate(row, 1):
                if v == label:
                    return (i, j)
        raise KeyError(label)

    def permuted(self, pi: Sequence[int]) -> "Configuration":
        """Move the label of cell index ``c`` to cell index ``pi[c]``."""
        n = self.size
        flat = [v for r in self.entries for v in r]
        out = [0] * (n * n)
        for c, v in enumerate(flat):
            out[pi[c]] = v
        return Configuration(tuple(tuple(out[r * n:(r + 1) * n]) for r in range(n)))

    def __str__(self) -> str:
        w = len(str(self.size ** 2))
        return "\n".join(" ".join(f"{v:>{w}}" for v in r) for r in self.entries)


def _check(n: int, *cells: Cell) -> None:
    for i, j in cells:
        if not (1 <= i <= n and 1 <= j <= n):
            raise InvalidMovement(f"cell ({i}, {j}) outside a {n}x{n} grid")


@dataclass(frozen=True)
class SimpleExchange:
    """Swap two adjacent cells (adjacency is taken on the flat grid)."""

    i: int
    j: int
    i2: int
    j2: int

    def cell_map(self, n: int) -> dict[Cell, Cell]:
        _check(n, (self.i, self.j), (self.i2, self.j2))
        if abs(self.i - self.i2) + abs(self.j - self.j2) != 1:
            raise InvalidMovement("simple exchange needs two adjacent cells")
        a, b = (self.i, self.j), (self.i2, self.j2)
        return {a: b, b: a}

    def displacement(self, cell: Cell, n: int) -> tuple[int, int]:
        a, b = (self.i, self.j), (self.i2, self.j2)
        other = b if cell == a else a
        return (other[1] - cell[1], cell[0] - other[0])

    def __str__(self) -> str:
        return f"E_s({self.i},{self.j};{self.i2},{self.j2})"


@dataclass(frozen=True)
class SortColumns:
    """Within row ``i``, move cell ``j2`` to ``j`` and cells ``j..j2-1`` one step right."""

    i: int
    j: int
    j2: int

    def cell_map(self, n: int) -> dict[Cell, Cell]:
        _check(n, (self.i, self.j), (self.i, self.j2))
        if not self.j < self.j2:
            raise InvalidMovement("sort on columns needs j < j'")
        m = {(self.i, c): (self.i, c + 1) for c in range(self.j, self.j2)}
        m[(self.i, self.j2)] = (self.i, self.j)
        return m

    def displacement(self, cell: Cell, n: int) -> tuple[int, int]:
        if cell[1] == self.j2:
            return (self.j - self.j2, 0)
        return (1, 0)

    def __str__(self) -> str:
        return f"S_c({self.i};{self.j},{self.j2})"


@dataclass(frozen=True)
class SortRows:
    """Within column ``j``, move cell ``i2`` to ``i`` and cells ``i..i2-1`` one step down."""

    i: int
    i2: int
    j: int

    def cell_map(self, n: int) -> dict[Cell, Cell]:
        _check(n, (self.i, self.j), (self.i2, self.j))
        if not self.i < self.i2:
            raise InvalidMovement("sort on rows needs i < i'")
        m = {(r, self.j): (r + 1, self.j) for r in range(self.i, self.i2)}
        m[(self.i2, self.j)] = (self.i, self.j)
        return m

    def displacement(self, cell: Cell, n: int) -> tuple[int, int]:
        if cell[0] == self.i2:
            return (0, self.i2 - self.i)
        return (0, -1)

    def __str__(self) -> str:
        return f"S_r({self.i},{self.i2};{self.j})"


@dataclass(frozen=True)
class Shift:
    """Move every cell of row ``i`` one column to the right, wrapping around."""

    i: int

    def cell_map(self, n: int) -> dict[Cell, Cell]:
        _check(n, (self.i, 1))
        return {(self.i, c): (self.i, c % n + 1) for c in range(1, n + 1)}

    def displacement(self, cell: Cell, n: int) -> tuple[int, int]:
        return (1, 0)

    def __str__(self) -> str:
        return f"Shift({self.i})"


@dataclass(frozen=True)
class ShiftCol:
    """Move every cell of column ``j`` one row down, wrapping around."""

    j: int

    def cell_map(self, n: int) -> dict[Cell, Cell]:
        _check(n, (1, self.j))
        return {(r, self.j): (r % n + 1, self.j) for r in range(1, n + 1)}

    def displacement(self, cell: Cell, n: int) -> tuple[int, int]:
        return (0, -1)

    def __str__(self) -> str:
        return f"ShiftCol({self.j})"


def _block(i: int, j: int, n: int):
    if i < 2 or j >= n:
        raise InvalidMovement("rotation needs i >= 2 and j < n")
    _check(n, (i - 1, j), (i, j + 1))
    return (i - 1, j), (i - 1, j + 1), (i, j), (i, j + 1)


@dataclass(frozen=True)
class RotateCCW:
    """Counter-clockwise quarter turn of the 2x2 block with rows ``i-1, i`` and columns ``j, j+1``."""

    i: int
    j: int

    def cell_map(self, n: int) -> dict[Cell, Cell]:
        tl, tr, bl, br = _block(self.i, self.j, n)
        return {tl: bl, bl: br, br: tr, tr: tl}

    def displacement(self, cell: Cell, n: int) -> tuple[int, int]:
        dest = self.cell_map(n)[cell]
        return (dest[1] - cell[1], cell[0] - dest[0])

    def __str__(self) -> str:
        return f"R-({self.i},{self.j})"


@dataclass(frozen=True)
class RotateCW:
    """Clockwise quarter turn of the same 2x2 block as :class:`RotateCCW`."""

    i: int
    j: int

    def cell_map(self, n: int) -> dict[Cell, Cell]:
        tl, tr, bl, br = _block(self.i, self.j, n)
        return {tl: tr, tr: br, br: bl, bl: tl}

    def displacement(self, cell: Cell, n: int) -> tuple[int, int]:
        dest = self.cell_map(n)[cell]
        return (dest[1] - cell[1], cell[0] - dest[0])

    def __str__(self) -> str:
        return f"R+({self.i},{self.j})"


Movement = Union[SimpleExchange, SortColumns, SortRows, Shift, ShiftCol, RotateCCW, RotateCW]
MovementSequence = list


def movement_to_cell_permutation(m: Movement, n: int) -> tuple[int, ...]:
    """Row-major cell permutation ``pi`` with labels moving from ``c`` to ``pi[c]``."""
    pi = list(range(n * n))
    for (r, c), (r2, c2) in m.cell_map(n).items():
        pi[(r - 1) * n + (c - 1)] = (r2 - 1) * n + (c2 - 1)
    return tuple(pi)


def sequence_to_cell_permutation(seq: Iterable[Movement], n: int) -> tuple[int, ...]:
    """The cell permutation of a whole sequence, applied first to last."""
    pi = list(range(n * n))
    for m in seq:
        step = movement_to_cell_permutation(m, n)
        pi = [step[p] for p in pi]
    return tuple(pi)


def movement_displacements(m: Movement, n: int) -> dict[Cell, tuple[Dyadic, Dyadic]]:
    """Rigid translation carried by each moved cell, in torus units.

    ``n`` must be a power of two so that offsets stay dyadic.
    """
    e = log2_exact(n)
    out = {}
    for cell in m.cell_map(n):
        dx, dy = m.displacement(cell, n)
        out[cell] = (Dyadic(dx, e), Dyadic(dy, e))
    return out


def apply_movement(gamma: Configuration, m: Movement) -> Configuration:
    return gamma.permuted(movement_to_cell_permutation(m, gamma.size))


def apply_sequence(gamma: Configuration, seq: Iterable[Movement]) -> Configuration:
    for m in seq:
        gamma = apply_movement(gamma, m)
    return gamma


def inverse_movement(m: Movement, n: int) -> list[Movement]:
    """Movements that undo ``m``, in application order."""
    if isinstance(m, SimpleExchange):
        return [m]
    if isinstance(m, SortColumns):
        return [m] * (m.j2 - m.j)
    if isinstance(m, SortRows):
        return [m] * (m.i2 - m.i)
    if isinstance(m, (Shift, ShiftCol)):
        return [m] * (n - 1)
    if isinstance(m, RotateCCW):
        return [RotateCW(m.i, m.j)]
    if isinstance(m, RotateCW):
        return [RotateCCW(m.i, m.j)]
    raise TypeError(f"unknown movement {m!r}")


def inverse_sequence(seq: Sequence[Movement], n: int) -> list[Movement]:
    out: list[Movement] = []
    for m in reversed(seq):
        out.extend(inverse_movement(m, n))
    return out


def chacon_v_sequence(n: int) -> list[Movement]:
    """The seven movements whose composite is V_n, in application order (grid 2**n)."""
    if n < 2:
        raise ValueError("V_n is defined for n >= 2")
    k = 2 ** n
    return [
        SortColumns(k, k - 3, k - 1),
        RotateCCW(k, k - 3),
        SortColumns(k - 1, k - 3, k),
        SortColumns(k - 1, k - 3, k),
        RotateCW(k, k - 3),
        RotateCW(k, k - 3),
        SimpleExchange(k, k - 3, k, k - 2),
    ]


_PATTERNS = [
    (re.compile(r"E_s\((\d+),(\d+);(\d+),(\d+)\)"), SimpleExchange),
    (re.compile(r"S_c\((\d+);(\d+),(\d+)\)"), SortColumns),
    (re.compile(r"S_r\((\d+),(\d+);(\d+)\)"), SortRows),
    (re.compile(r"ShiftCol\((\d+)\)"), ShiftCol),
    (re.compile(r"Shift\((\d+)\)"), Shift),
    (re.compile(r"R-\((\d+),(\d+)\)"), RotateCCW),
    (re.compile(r"R\+\((\d+),(\d+)\)"), RotateCW),
]


def parse_movement(text: str) -> Movement:
    """Inverse of ``str(movement)``, e.g. ``"S_c(4;1,3)"`` or ``"R-(4,1)"``."""
    t = re.sub(r"\s+", "", text)
    for pat, kind in _PATTERNS:
        m = pat.fullmatch(t)
        if m:
            return kind(*(int(g) for g in m.groups()))
    raise InvalidMovement(f"cannot parse movement {text!r}")
