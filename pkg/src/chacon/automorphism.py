"""The maps U_n as piecewise translations and as permutations of grid cells.

Pieces are half-open dyadic squares, so every map here is an honest
bijection of the torus.  A :class:`GridPermutation` is the exact shadow of a
map at resolution ``2**m`` and carries its cycle decomposition for fast
powers.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .configuration import (
    Configuration,
    Movement,
    chacon_v_sequence,
    movement_displacements,
)
from .dyadic import Dyadic, DyadicSquare, GridCell, NotDyadicError, TorusPoint, as_dyadic

__all__ = [
    "ResolutionTooCoarse",
    "StageIndex",
    "Piece",
    "PiecewiseTranslation",
    "GridPermutation",
    "build_U1",
    "build_Un_direct",
    "build_Un_recursive",
    "sequence_translation",
    "to_grid_permutation",
    "permutation_power_apply",
    "column_levels",
    "grid_permutation_of",
    "nesting_difference",
]


class ResolutionTooCoarse(ValueError):
    """A piece is finer than the requested grid, or its offset is off-grid."""


@dataclass(frozen=True)
class StageIndex:
    """Height and side length of the n-th two-dimensional column."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("stages start at n = 1")

    @property
    def height(self) -> int:
        return 4 ** (self.n - 1) - 1

    @property
    def side(self) -> Dyadic:
        return Dyadic(1, self.n - 1)

    def top_square(self) -> DyadicSquare:
        """Q_{n,h_n}, the level just left of R_{n-1} on the bottom row."""
        n = self.n
        return DyadicSquare(n - 1, (1 << (n - 1)) - 2, 0)

    def remainder(self) -> DyadicSquare:
        """R_{n-1}, the bottom-right square of side ``l_n``."""
        n = self.n
        return DyadicSquare(n - 1, (1 << (n - 1)) - 1, 0)

    def first_square(self) -> DyadicSquare:
        """Q_{n,1}, the top-left square of side ``l_n``."""
        n = self.n
        return DyadicSquare(n - 1, 0, (1 << (n - 1)) - 1)


Offset = tuple[Dyadic, Dyadic]


@dataclass(frozen=True)
class Piece:
    square: DyadicSquare
    offset: Offset

    def image(self) -> DyadicSquare:
        return self.square.translated(self.offset)

    def to_json(self) -> list[int]:
        c = self.square.cell()
        ox, oy = self.offset
        return [c.row, c.col, self.square.level, ox.num, ox.exp, oy.num, oy.exp]

    @classmethod
    def from_json(cls, row) -> "Piece":
        r, c, level, nx, ex, ny, ey = (int(v) for v in row)
        sq = GridCell(1 << level, r, c).square()
        return cls(sq, (Dyadic(nx, ex), Dyadic(ny, ey)))


def _reduce(offset: Offset) -> Offset:
    return (offset[0].frac(), offset[1].frac())


class PiecewiseTranslation:
    """A map that translates each listed square by its offset, mod 1.

    Points outside every piece are fixed.  Domains must not overlap; this is
    checked on construction.
    """

    def __init__(self, pieces: Iterable[Piece] = ()):
        self.pieces: list[Piece] = []
        self._index: dict[int, dict[tuple[int, int], Offset]] = {}
        self._covered: dict[int, set[tuple[int, int]]] = {}
        for p in pieces:
            self._add(p)

    def _add(self, piece: Piece) -> None:
        sq = piece.square
        if self.locate(sq) != "identity":
            raise ValueError(f"piece domain {sq} overlaps an existing piece")
        off = (as_dyadic(piece.offset[0]), as_dyadic(piece.offset[1]))
        piece = Piece(sq, off)
        self.pieces.append(piece)
        self._index.setdefault(sq.level, {})[(sq.ix, sq.iy)] = off
        for e in range(sq.level):
            a = sq.ancestor(e)
            self._covered.setdefault(e, set()).add((a.ix, a.iy))

    def __len__(self) -> int:
        return len(self.pieces)

    @property
    def max_level(self) -> int:
        return max(self._index, default=0)

    def levels(self) -> list[int]:
        return sorted(self._index)

    def offset_containing(self, sq: DyadicSquare) -> Offset | None:
        """Offset of the piece that contains ``sq``, if any."""
        for e, table in self._index.items():
            if e <= sq.level:
                a = sq.ancestor(e)
                off = table.get((a.ix, a.iy))
                if off is not None:
                    return off
        return None

    def locate(self, sq: DyadicSquare):
        """``"identity"``, ``"split"`` or the offset applying on all of ``sq``."""
        off = self.offset_containing(sq)
        if off is not None:
            return off
        if (sq.ix, sq.iy) in self._covered.get(sq.level, ()):
            return "split"
        return "identity"

    def __call__(self, p: TorusPoint) -> TorusPoint:
        return self.evaluate(p)

    def evaluate(self, p: TorusPoint) -> TorusPoint:
        p = p.wrapped()
        for e in sorted(self._index):
            n = 1 << e
            key = ((p.x * n).floor(), (p.y * n).floor())
            off = self._index[e].get(key)
            if off is not None:
                return TorusPoint((p.x + off[0]).frac(), (p.y + off[1]).frac())
        return p

    def compose(self, inner: "PiecewiseTranslation", max_level: int = 64) -> "PiecewiseTranslation":
        """The map ``self o inner`` (``inner`` acts first)."""
        out: list[Piece] = []

        def push_inner(sq: DyadicSquare, off: Offset):
            try:
                img = sq.translated(off)
            except NotDyadicError:
                img = None
            where = "split" if img is None else self.locate(img)
            if where == "split":
                if sq.level >= max_level:
                    raise ResolutionTooCoarse("composition does not resolve")
                for ch in sq.children():
                    push_inner(ch, off)
                return
            total = off if where == "identity" else (off[0] + where[0], off[1] + where[1])
            total = _reduce(total)
            if total[0] or total[1]:
                out.append(Piece(sq, total))

        def push_outer(sq: DyadicSquare, off: Offset):
            where = inner.locate(sq)
            if where == "identity":
                out.append(Piece(sq, _reduce(off)))
            elif where == "split":
                if sq.level >= max_level:
                    raise ResolutionTooCoarse("composition does not resolve")
                for ch in sq.children():
                    push_outer(ch, off)

        for p in inner.pieces:
            push_inner(p.square, p.offset)
        for p in self.pieces:
            push_outer(p.square, p.offset)
        return PiecewiseTranslation(out)

    def to_json(self) -> str:
        return json.dumps({"pieces": [p.to_json() for p in self.pieces]})

    @classmethod
    def from_json(cls, text: str) -> "PiecewiseTranslation":
        data = json.loads(text)
        rows = data["pieces"] if isinstance(data, dict) else data
        return cls(Piece.from_json(r) for r in rows)


def build_U1() -> PiecewiseTranslation:
    h = Dyadic(1, 1)
    return PiecewiseTranslation([
        Piece(DyadicSquare(1, 0, 1), (h, Dyadic(0))),
        Piece(DyadicSquare(1, 1, 1), (-h, -h)),
        Piece(DyadicSquare(1, 0, 0), (Dyadic(0), h)),
    ])


def _new_pieces(n: int) -> list[Piece]:
    """The seven pieces of U_n on the quarters of Q_{n,h_n} and R_{n-1}."""
    s = Dyadic(1, n)
    one = Dyadic(1)
    top, rem = StageIndex(n).top_square(), StageIndex(n).remainder()
    q1, q2, q3, q4 = top.children()
    r1, r2, r3, _ = rem.children()
    return [
        Piece(q1, (5 * s - one, one - 2 * s)),
        Piece(q2, (s, Dyadic(0))),
        Piece(q3, (3 * s, s)),
        Piece(q4, (s, Dyadic(0))),
        Piece(r1, (2 * s - one, one - 3 * s)),
        Piece(r2, (2 * s - one, one - 3 * s)),
        Piece(r3, (2 * s - one, one - s)),
    ]


@lru_cache(maxsize=None)
def build_Un_direct(n: int) -> PiecewiseTranslation:
    """U_n from the explicit recursive piece formula, as a flat piece list.

    U_{n-1} has exactly one piece on Q_{n,h_n}; U_n keeps all the others and
    adds the seven new pieces.  The list therefore has ``6n - 3`` entries.
    """
    if n < 1:
        raise ValueError("U_n is defined for n >= 1")
    if n == 1:
        return build_U1()
    prev = build_Un_direct(n - 1)
    top = StageIndex(n).top_square()
    kept = [p for p in prev.pieces if p.square != top]
    if len(kept) != len(prev.pieces) - 1:
        raise AssertionError("Q_{n,h_n} is not a single piece of U_{n-1}")
    return PiecewiseTranslation(kept + _new_pieces(n))


def sequence_translation(seq: Sequence[Movement], n: int) -> PiecewiseTranslation:
    """Rigid realization of a movement sequence on the ``n``-by-``n`` grid.

    Each cell is followed through the sequence and its displacements are
    summed; ``n`` must be a power of two.
    """
    where: dict[tuple[int, int], tuple[int, int]] = {}
    total: dict[tuple[int, int], tuple[Dyadic, Dyadic]] = {}
    for m in seq:
        disp = movement_displacements(m, n)
        moves = m.cell_map(n)
        at = {here: src for src, here in where.items()}
        for here, dest in moves.items():
            src = at.get(here, here)
            dx, dy = total.get(src, (Dyadic(0), Dyadic(0)))
            total[src] = (dx + disp[here][0], dy + disp[here][1])
            where[src] = dest
    pieces = []
    for (r, c), off in sorted(total.items()):
        off = _reduce(off)
        if off[0] or off[1]:
            pieces.append(Piece(GridCell(n, r, c).square(), off))
    return PiecewiseTranslation(pieces)


@lru_cache(maxsize=None)
def build_Un_recursive(n: int) -> PiecewiseTranslation:
    """U_n as U_{n-1} composed with the rigid realization of V_n."""
    if n < 2:
        raise ValueError("the decomposition starts at n = 2")
    prev = build_U1() if n == 2 else build_Un_recursive(n - 1)
    v = sequence_translation(chacon_v_sequence(n), 2 ** n)
    return prev.compose(v)


class GridPermutation:
    """A permutation of the ``4**m`` cells of the ``2**m`` grid.

    Cells are indexed row-major from the top-left.  ``forward[c]`` is the
    cell that ``c`` is sent to.
    """

    def __init__(self, resolution: int, forward):
        fwd = np.asarray(forward, dtype=np.int64)
        size = 4 ** resolution
        if fwd.shape != (size,):
            raise ValueError(f"expected {size} entries, got {fwd.shape}")
        if fwd.min(initial=0) < 0 or fwd.max(initial=0) >= size:
            raise ValueError("cell index out of range")
        if not np.all(np.bincount(fwd, minlength=size) == 1):
            raise ValueError("forward map is not a bijection")
        fwd.setflags(write=False)
        self.resolution = resolution
        self.forward = fwd
        self._cycles = None

    @property
    def size(self) -> int:
        return self.forward.shape[0]

    @property
    def side(self) -> int:
        return 1 << self.resolution

    @classmethod
    def identity(cls, resolution: int) -> "GridPermutation":
        return cls(resolution, np.arange(4 ** resolution, dtype=np.int64))

    def __eq__(self, other):
        if not isinstance(other, GridPermutation):
            return NotImplemented
        return self.resolution == other.resolution and np.array_equal(self.forward, other.forward)

    def __call__(self, cell: int) -> int:
        return int(self.forward[cell])

    def inverse(self) -> "GridPermutation":
        inv = np.empty_like(self.forward)
        inv[self.forward] = np.arange(self.size, dtype=np.int64)
        return GridPermutation(self.resolution, inv)

    def then(self, other: "GridPermutation") -> "GridPermutation":
        """Apply ``self`` first and then ``other``."""
        return GridPermutation(self.resolution, other.forward[self.forward])

    def first_difference(self, other: "GridPermutation") -> int | None:
        diff = np.nonzero(self.forward != other.forward)[0]
        return int(diff[0]) if diff.size else None

    # cycles -----------------------------------------------------------

    def _decompose(self):
        if self._cycles is not None:
            return self._cycles
        fwd = self.forward.tolist()
        n = len(fwd)
        cycle_id = [-1] * n
        position = [0] * n
        flat: list[int] = []
        starts: list[int] = []
        lengths: list[int] = []
        for s in range(n):
            if cycle_id[s] >= 0:
                continue
            cid = len(starts)
            starts.append(len(flat))
            c, pos = s, 0
            while cycle_id[c] < 0:
                cycle_id[c] = cid
                position[c] = pos
                flat.append(c)
                pos += 1
                c = fwd[c]
            lengths.append(pos)
        self._cycles = (
            np.array(cycle_id, dtype=np.int64),
            np.array(position, dtype=np.int64),
            np.array(flat, dtype=np.int64),
            np.array(starts, dtype=np.int64),
            np.array(lengths, dtype=np.int64),
        )
        return self._cycles

    def cycle_lengths(self) -> np.ndarray:
        return self._decompose()[4]

    def cycle_type(self) -> dict[int, int]:
        lengths, counts = np.unique(self.cycle_lengths(), return_counts=True)
        return {int(l): int(c) for l, c in zip(lengths, counts)}

    def cycles(self) -> list[list[int]]:
        _, _, flat, starts, lengths = self._decompose()
        return [flat[s:s + l].tolist() for s, l in zip(starts, lengths)]

    def order(self) -> int:
        return math.lcm(*self.cycle_type().keys())

    def power_array(self, k: int, cells) -> np.ndarray:
        """Images of ``cells`` under the ``k``-th power (``k`` may be negative or huge)."""
        cells = np.asarray(cells, dtype=np.int64)
        if cells.size == 0:
            return cells.copy()
        cycle_id, position, flat, starts, lengths = self._decompose()
        cid = cycle_id[cells]
        L = lengths[cid]
        uniq, inv = np.unique(L, return_inverse=True)
        step = np.array([k % int(u) for u in uniq], dtype=np.int64)[inv]
        return flat[starts[cid] + (position[cells] + step) % L]

    def power(self, k: int) -> "GridPermutation":
        return GridPermutation(self.resolution, self.power_array(k, np.arange(self.size)))

    # configurations and serialization ---------------------------------

    def apply_to_configuration(self, gamma: Configuration) -> Configuration:
        if gamma.size != self.side:
            raise ValueError("configuration size does not match the resolution")
        return gamma.permuted(self.forward.tolist())

    def restrict_to_blocks(self, m: int) -> "GridPermutation":
        """The induced permutation of ``2**m`` blocks; raises if blocks are not moved rigidly."""
        d = self.resolution - m
        if d < 0:
            raise ValueError("cannot refine a permutation")
        n = self.side
        idx = np.arange(self.size)
        r, c = idx // n, idx % n
        block = (r >> d) * (1 << m) + (c >> d)
        img = self.forward
        img_block = (img // n >> d) * (1 << m) + ((img % n) >> d)
        out = np.full(4 ** m, -1, dtype=np.int64)
        out[block] = img_block
        if not np.array_equal(out[block], img_block):
            raise ResolutionTooCoarse("blocks are not moved rigidly")
        return GridPermutation(m, out)

    def to_bytes(self) -> bytes:
        return struct.pack("<Q", self.resolution) + self.forward.astype("<i8").tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "GridPermutation":
        if len(data) < 8:
            raise ValueError("truncated permutation file")
        (m,) = struct.unpack("<Q", data[:8])
        body = np.frombuffer(data[8:], dtype="<i8")
        if body.size != 4 ** m:
            raise ValueError("permutation file length does not match its header")
        return cls(int(m), body.astype(np.int64))

    def to_json(self) -> str:
        return json.dumps({"resolution": self.resolution, "forward": self.forward.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "GridPermutation":
        data = json.loads(text)
        return cls(int(data["resolution"]), data["forward"])


def to_grid_permutation(f: PiecewiseTranslation, m: int) -> GridPermutation:
    n = 1 << m
    fwd = np.arange(n * n, dtype=np.int64)
    by_level: dict[int, list[tuple[int, int, int, int]]] = {}
    for p in f.pieces:
        sq = p.square
        if sq.level > m:
            raise ResolutionTooCoarse(f"piece at level {sq.level} is finer than 2^{m}")
        ox, oy = p.offset[0] * n, p.offset[1] * n
        if ox.exp or oy.exp:
            raise ResolutionTooCoarse(f"offset {p.offset} is not a multiple of 2^-{m}")
        by_level.setdefault(sq.level, []).append((sq.ix, sq.iy, ox.num, oy.num))
    for level, rows in by_level.items():
        d = m - level
        w = 1 << d
        arr = np.array(rows, dtype=np.int64)
        sub = np.arange(w, dtype=np.int64)
        # (piece, j, i) grids of cell coordinates
        ix = (arr[:, 0, None, None] << d) + sub[None, None, :]
        iy = (arr[:, 1, None, None] << d) + sub[None, :, None]
        ix, iy = np.broadcast_arrays(ix, iy)
        jx = (ix + arr[:, 2, None, None]) % n
        jy = (iy + arr[:, 3, None, None]) % n
        src = (n - 1 - iy) * n + ix
        dst = (n - 1 - jy) * n + jx
        fwd[src.ravel()] = dst.ravel()
    return GridPermutation(m, fwd)


@lru_cache(maxsize=64)
def grid_permutation_of(n: int, m: int) -> GridPermutation:
    """Cached permutation of U_n at resolution ``2**m``."""
    return to_grid_permutation(build_Un_direct(n), m)


def permutation_power_apply(pi: GridPermutation, k: int, cells: Iterable[int]) -> set[int]:
    cells = list(cells)
    return set(pi.power_array(k, cells).tolist())


@lru_cache(maxsize=None)
def column_levels(n: int) -> tuple[DyadicSquare, ...]:
    """Q_{n,1}, ..., Q_{n,h_n} in order, following U_{n-1} from the top-left square."""
    if n < 1:
        raise ValueError("columns start at n = 1")
    if n == 1:
        return ()
    stage = StageIndex(n)
    e = n - 1
    side = 1 << e
    pi = grid_permutation_of(n - 1, e) if n > 1 else None
    first = stage.first_square()
    c = (side - 1 - first.iy) * side + first.ix
    out = []
    for _ in range(stage.height):
        r, col = divmod(c, side)
        out.append(DyadicSquare(e, col, side - 1 - r))
        c = int(pi.forward[c])
    return tuple(out)


def nesting_difference(n: int) -> int | None:
    """First cell (at resolution ``n``) of the lower ``h_n - 1`` levels where U_n and U_{n-1} differ."""
    if n < 2:
        raise ValueError("nesting compares U_n with U_{n-1} for n >= 2")
    new, old = grid_permutation_of(n, n), grid_permutation_of(n - 1, n)
    for sq in column_levels(n)[:-1]:
        cells = np.array(sq.cell_indices(n), dtype=np.int64)
        bad = cells[new.forward[cells] != old.forward[cells]]
        if bad.size:
            return int(bad[0])
    return None
