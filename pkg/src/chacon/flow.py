"""Exact kinematics of the primitive flows and of the global schedule.

Every primitive is a list of phases.  During a phase a few disjoint
rectangles rotate rigidly along their square contours (or a stripe slides
along the torus) while everything else stays put.  Positions are dyadic;
times are :class:`fractions.Fraction` because segment boundaries carry a
factor of seven.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .configuration import (
    Movement,
    RotateCCW,
    RotateCW,
    Shift,
    ShiftCol,
    SimpleExchange,
    SortColumns,
    SortRows,
    chacon_v_sequence,
)
from .dyadic import Dyadic, GridCell, NotDyadicError, TorusPoint, as_dyadic, log2_exact

__all__ = [
    "Rect",
    "DiscontinuityError",
    "TimeOutOfRange",
    "RegionError",
    "Rotating",
    "Translating",
    "Phase",
    "Flow",
    "rotation_flow",
    "transposition",
    "cell_rect",
    "movement_flow",
    "chain",
    "building_block",
    "stage_one_flow",
    "FlowSchedule",
    "chacon_schedule",
    "evaluate_flow",
    "velocity_sample",
    "square_rotation_flow",
    "transposition_flow",
    "sort_flow",
    "shift_flow",
    "rotate2x2_flow",
    "building_block_flow",
    "contour_advance",
    "endpoint_cells",
]


class DiscontinuityError(ValueError):
    """The velocity is requested on an interface where the field jumps."""


class TimeOutOfRange(ValueError):
    pass


class RegionError(ValueError):
    """Point outside the region, or squares that are not adjacent."""


@dataclass(frozen=True)
class Rect:
    """The rectangle ``[x0, x0 + w] x [y0, y0 + h]`` with dyadic corners."""

    x0: Dyadic
    y0: Dyadic
    w: Dyadic
    h: Dyadic

    def __post_init__(self):
        for name in ("x0", "y0", "w", "h"):
            object.__setattr__(self, name, as_dyadic(getattr(self, name)))
        if self.w <= 0 or self.h <= 0:
            raise ValueError("rectangle sides must be positive")

    @property
    def x1(self) -> Dyadic:
        return self.x0 + self.w

    @property
    def y1(self) -> Dyadic:
        return self.y0 + self.h

    def interior(self, p: TorusPoint) -> bool:
        return self.x0 < p.x < self.x1 and self.y0 < p.y < self.y1

    def closed(self, p: TorusPoint) -> bool:
        return self.x0 <= p.x <= self.x1 and self.y0 <= p.y <= self.y1

    def union(self, other: "Rect") -> "Rect":
        """Union of two equal adjacent squares as one rectangle."""
        if (self.w, self.h) != (other.w, other.h):
            raise RegionError("squares must have equal size")
        if self.y0 == other.y0 and abs(self.x0 - other.x0) == self.w:
            return Rect(min(self.x0, other.x0), self.y0, self.w * 2, self.h)
        if self.x0 == other.x0 and abs(self.y0 - other.y0) == self.h:
            return Rect(self.x0, min(self.y0, other.y0), self.w, self.h * 2)
        raise RegionError("squares are not adjacent")

    def to_json(self) -> list[str]:
        return [str(self.x0), str(self.y0), str(self.w), str(self.h)]

    def bounds(self) -> tuple[float, float, float, float]:
        return (float(self.x0), float(self.y0), float(self.x1), float(self.y1))


def cell_rect(k: int, row: int, col: int) -> Rect:
    e = log2_exact(k)
    s = Dyadic(1, e)
    return Rect(s * (col - 1), s * (k - row), s, s)


def _dyadic_time(q: Fraction) -> Dyadic:
    try:
        return Dyadic.from_fraction(q)
    except NotDyadicError:
        raise NotDyadicError(f"normalized time {q} is not dyadic; evaluate at dyadic times") from None


def contour_advance(xi: Dyadic, eta: Dyadic, tau: Dyadic) -> tuple[Dyadic, Dyadic]:
    """Move ``(xi, eta)`` of the unit square along its contour for time ``tau``.

    The contour is the square shell of radius ``r = max(|xi-1/2|, |eta-1/2|)``
    and the speed is ``2r``; positive ``tau`` runs counter-clockwise.
    """
    half = Dyadic(1, 1)
    dx, dy = xi - half, eta - half
    r = max(abs(dx), abs(dy))
    if not r:
        return xi, eta
    if dx == r and dy < r:
        s = dy + r
    elif dy == r:
        s = 3 * r - dx
    elif dx == -r:
        s = 5 * r - dy
    else:
        s = 7 * r + dx
    per = 8 * r
    s = (s + 2 * r * tau) % per
    if s < 2 * r:
        dx, dy = r, s - r
    elif s < 4 * r:
        dx, dy = 3 * r - s, r
    elif s < 6 * r:
        dx, dy = -r, 5 * r - s
    else:
        dx, dy = s - 7 * r, -r
    return dx + half, dy + half


def _normalized_velocity(xi: Dyadic, eta: Dyadic) -> tuple[Dyadic, Dyadic]:
    half = Dyadic(1, 1)
    dx, dy = xi - half, eta - half
    if abs(dx) > abs(dy):
        return Dyadic(0), 2 * dx
    if abs(dy) > abs(dx):
        return -2 * dy, Dyadic(0)
    if not dx:
        return Dyadic(0), Dyadic(0)
    raise DiscontinuityError("point on a diagonal of the rotating square")


@dataclass(frozen=True)
class Rotating:
    """``rect`` turns along its contours; ``rate`` is normalized time per unit local time."""

    rect: Rect
    rate: Fraction

    def contains(self, p: TorusPoint) -> bool:
        return self.rect.interior(p)

    def on_boundary(self, p: TorusPoint) -> bool:
        return self.rect.closed(p) and not self.rect.interior(p)

    def move(self, p: TorusPoint, dt: Fraction) -> TorusPoint:
        R = self.rect
        xi, eta = (p.x - R.x0) * _inv(R.w), (p.y - R.y0) * _inv(R.h)
        xi, eta = contour_advance(xi, eta, _dyadic_time(self.rate * dt))
        return TorusPoint(R.x0 + xi * R.w, R.y0 + eta * R.h)

    def velocity(self, p: TorusPoint) -> tuple[Dyadic, Dyadic]:
        R = self.rect
        xi, eta = (p.x - R.x0) * _inv(R.w), (p.y - R.y0) * _inv(R.h)
        vx, vy = _normalized_velocity(xi, eta)
        rate = as_dyadic(self.rate)
        return vx * R.w * rate, vy * R.h * rate

    def velocity_arrays(self, X: np.ndarray, Y: np.ndarray, VX: np.ndarray, VY: np.ndarray) -> None:
        x0, y0, x1, y1 = self.rect.bounds()
        w, h = x1 - x0, y1 - y0
        xi = (X - x0) / w
        eta = (Y - y0) / h
        inside = (xi > 0) & (xi < 1) & (eta > 0) & (eta < 1)
        dx, dy = xi - 0.5, eta - 0.5
        horiz = np.abs(dx) >= np.abs(dy)
        rate = float(self.rate)
        VY += np.where(inside & horiz, 2 * dx * h * rate, 0.0)
        VX += np.where(inside & ~horiz, -2 * dy * w * rate, 0.0)

    def describe(self) -> dict:
        return {"type": "rotate", "rect": self.rect.to_json(), "rate": str(self.rate)}


@dataclass(frozen=True)
class Translating:
    """A stripe sliding around the torus: a row (``axis=0``) or a column (``axis=1``)."""

    axis: int
    lo: Dyadic
    hi: Dyadic
    speed: Fraction

    def contains(self, p: TorusPoint) -> bool:
        c = p.y if self.axis == 0 else p.x
        return self.lo < c < self.hi

    def on_boundary(self, p: TorusPoint) -> bool:
        c = p.y if self.axis == 0 else p.x
        return c == self.lo or c == self.hi or (self.hi == 1 and c == 0)

    def move(self, p: TorusPoint, dt: Fraction) -> TorusPoint:
        d = _dyadic_time(self.speed * dt)
        if self.axis == 0:
            return TorusPoint((p.x + d).frac(), p.y)
        return TorusPoint(p.x, (p.y + d).frac())

    def velocity(self, p: TorusPoint) -> tuple[Dyadic, Dyadic]:
        v = as_dyadic(self.speed)
        return (v, Dyadic(0)) if self.axis == 0 else (Dyadic(0), v)

    def velocity_arrays(self, X, Y, VX, VY) -> None:
        c = Y if self.axis == 0 else X
        inside = (c > float(self.lo)) & (c < float(self.hi))
        target = VX if self.axis == 0 else VY
        target += np.where(inside, float(self.speed), 0.0)

    def describe(self) -> dict:
        return {"type": "translate", "axis": "x" if self.axis == 0 else "y",
                "stripe": [str(self.lo), str(self.hi)], "speed": str(self.speed)}


def _inv(d: Dyadic) -> Dyadic:
    if d.num != 1:
        # sides are powers of two in this construction; general widths
        # would leave the dyadic world
        raise NotDyadicError("rectangle sides must be powers of two")
    return Dyadic(1, -d.exp) if d.exp else Dyadic(1)


@dataclass(frozen=True)
class Phase:
    start: Fraction
    end: Fraction
    regions: tuple

    def region_of(self, p: TorusPoint):
        for reg in self.regions:
            if reg.contains(p):
                return reg
        return None

    def scaled(self, a: Fraction, span: Fraction) -> "Phase":
        """Map local time ``[0, 1]`` onto ``[a, a + span]``."""
        regs = []
        for reg in self.regions:
            if isinstance(reg, Rotating):
                regs.append(Rotating(reg.rect, reg.rate / span))
            else:
                regs.append(Translating(reg.axis, reg.lo, reg.hi, reg.speed / span))
        return Phase(a + self.start * span, a + self.end * span, tuple(regs))


@dataclass(frozen=True)
class Flow:
    """A primitive or composite flow on local time ``[0, 1]``."""

    kind: str
    phases: tuple[Phase, ...]
    params: dict = field(default_factory=dict, compare=False)

    def advance(self, p: TorusPoint, u0, u1) -> TorusPoint:
        """Transport ``p`` from local time ``u0`` to ``u1`` (either order)."""
        u0, u1 = Fraction(u0), Fraction(u1)
        if not (0 <= u0 <= 1 and 0 <= u1 <= 1):
            raise TimeOutOfRange("local time must lie in [0, 1]")
        if u0 == u1:
            return p
        lo, hi = min(u0, u1), max(u0, u1)
        sign = 1 if u1 > u0 else -1
        phases = self.phases if sign > 0 else tuple(reversed(self.phases))
        for ph in phases:
            a, b = max(lo, ph.start), min(hi, ph.end)
            if a >= b:
                continue
            reg = ph.region_of(p)
            if reg is not None:
                p = reg.move(p, sign * (b - a))
        return p

    def endpoint(self, p: TorusPoint) -> TorusPoint:
        return self.advance(p, 0, 1)

    def _phases_at(self, u: Fraction) -> list[Phase]:
        return [ph for ph in self.phases if ph.start <= u <= ph.end]

    def velocity(self, u, p: TorusPoint) -> tuple[Dyadic, Dyadic]:
        """Exact velocity at local time ``u``; raises on interfaces."""
        u = Fraction(u)
        if not 0 <= u <= 1:
            raise TimeOutOfRange("local time must lie in [0, 1]")
        values = []
        for ph in self._phases_at(u) or [None]:
            if ph is None:
                values.append((Dyadic(0), Dyadic(0)))
                continue
            reg = ph.region_of(p)
            if reg is None:
                if any(r.on_boundary(p) for r in ph.regions):
                    raise DiscontinuityError(f"{p} lies on the boundary of an active region")
                values.append((Dyadic(0), Dyadic(0)))
            else:
                values.append(reg.velocity(p))
        if any(v != values[0] for v in values[1:]):
            raise DiscontinuityError(f"velocity jumps at local time {u}")
        return values[0]

    def phase_at(self, u) -> Phase | None:
        """The phase active just after ``u`` (just before, at ``u = 1``)."""
        u = Fraction(u)
        for ph in self.phases:
            if ph.start <= u < ph.end:
                return ph
        for ph in reversed(self.phases):
            if ph.start < u <= ph.end:
                return ph
        return None

    def velocity_arrays(self, u, X: np.ndarray, Y: np.ndarray, scale: float = 1.0):
        """Float velocity on arrays of points; ties on interfaces are broken consistently."""
        VX = np.zeros(np.shape(X))
        VY = np.zeros(np.shape(X))
        ph = self.phase_at(u)
        if ph is not None:
            for reg in ph.regions:
                reg.velocity_arrays(X, Y, VX, VY)
        if scale != 1.0:
            VX *= scale
            VY *= scale
        return VX, VY

    def support(self, u) -> list[tuple[float, float, float, float]]:
        """Bounding boxes of the regions active at ``u``; stripes span the torus."""
        ph = self.phase_at(u)
        out = []
        for reg in ph.regions if ph else ():
            if isinstance(reg, Rotating):
                out.append(reg.rect.bounds())
            elif reg.axis == 0:
                out.append((0.0, float(reg.lo), 1.0, float(reg.hi)))
            else:
                out.append((float(reg.lo), 0.0, float(reg.hi), 1.0))
        return out

    def breakpoints(self) -> list[Fraction]:
        pts = {Fraction(0), Fraction(1)}
        for ph in self.phases:
            pts.add(ph.start)
            pts.add(ph.end)
        return sorted(pts)

    def describe(self) -> list[dict]:
        return [
            {"start": str(ph.start), "end": str(ph.end), "regions": [r.describe() for r in ph.regions]}
            for ph in self.phases
        ]


def rotation_flow(rect: Rect, rate=1) -> Flow:
    return Flow("rotate", (Phase(Fraction(0), Fraction(1), (Rotating(rect, Fraction(rate)),)),))


def transposition(a: Rect, b: Rect) -> Flow:
    """Swap two adjacent equal squares in unit time."""
    u = a.union(b)
    half = Fraction(1, 2)
    return Flow(
        "transposition",
        (
            Phase(Fraction(0), half, (Rotating(u, Fraction(4)),)),
            Phase(half, Fraction(1), (Rotating(a, Fraction(4)), Rotating(b, Fraction(4)))),
        ),
        {"a": a.to_json(), "b": b.to_json()},
    )


def chain(flows: Sequence[Flow], kind: str = "chain", params: dict | None = None) -> Flow:
    """Run the flows one after another, each for an equal share of unit time."""
    m = len(flows)
    span = Fraction(1, m)
    phases = []
    for idx, f in enumerate(flows):
        phases.extend(ph.scaled(idx * span, span) for ph in f.phases)
    return Flow(kind, tuple(phases), params or {})


def _rotate_block(k: int, i: int, j: int, sign: int) -> Flow:
    if i < 2 or j >= k or i > k or j < 1:
        raise IndexError("rotation needs 2 <= i <= k and 1 <= j < k")
    cells = [cell_rect(k, i - 1, j), cell_rect(k, i - 1, j + 1), cell_rect(k, i, j), cell_rect(k, i, j + 1)]
    s = Dyadic(1, log2_exact(k))
    block = Rect(cells[2].x0, cells[2].y0, s * 2, s * 2)
    half = Fraction(1, 2)
    return Flow(
        "rotate2x2",
        (
            Phase(Fraction(0), half, (Rotating(block, Fraction(2 * sign)),)),
            Phase(half, Fraction(1), tuple(Rotating(c, Fraction(-2 * sign)) for c in cells)),
        ),
        {"k": k, "i": i, "j": j, "sense": "ccw" if sign > 0 else "cw"},
    )


def _check_cell(k: int, r: int, c: int) -> None:
    if not (1 <= r <= k and 1 <= c <= k):
        raise IndexError(f"cell ({r}, {c}) outside a {k}x{k} grid")


def movement_flow(m: Movement, k: int) -> Flow:
    """The flow whose time-one map realizes ``m`` rigidly on the ``k``-grid."""
    m.cell_map(k)  # validates indices
    if isinstance(m, SimpleExchange):
        f = transposition(cell_rect(k, m.i, m.j), cell_rect(k, m.i2, m.j2))
        return Flow("exchange", f.phases, {"movement": str(m)})
    if isinstance(m, SortColumns):
        steps = [
            transposition(cell_rect(k, m.i, m.j2 - 1 - t), cell_rect(k, m.i, m.j2 - t))
            for t in range(m.j2 - m.j)
        ]
        return chain(steps, "sort", {"movement": str(m)})
    if isinstance(m, SortRows):
        steps = [
            transposition(cell_rect(k, m.i2 - 1 - t, m.j), cell_rect(k, m.i2 - t, m.j))
            for t in range(m.i2 - m.i)
        ]
        return chain(steps, "sort", {"movement": str(m)})
    if isinstance(m, Shift):
        r = cell_rect(k, m.i, 1)
        return Flow("shift", (Phase(Fraction(0), Fraction(1),
                                    (Translating(0, r.y0, r.y1, Fraction(1, k)),)),),
                    {"movement": str(m)})
    if isinstance(m, ShiftCol):
        r = cell_rect(k, 1, m.j)
        return Flow("shift", (Phase(Fraction(0), Fraction(1),
                                    (Translating(1, r.x0, r.x1, Fraction(-1, k)),)),),
                    {"movement": str(m)})
    if isinstance(m, RotateCCW):
        f = _rotate_block(k, m.i, m.j, +1)
        return Flow("rotate2x2", f.phases, {"movement": str(m)})
    if isinstance(m, RotateCW):
        f = _rotate_block(k, m.i, m.j, -1)
        return Flow("rotate2x2", f.phases, {"movement": str(m)})
    raise TypeError(f"unknown movement {m!r}")


def building_block(n: int) -> Flow:
    """X^n: seven segments of length 1/7 realizing V_n on the 2**n grid."""
    if n < 2:
        raise ValueError("the building block is defined for n >= 2")
    k = 2 ** n
    segs = [movement_flow(m, k) for m in chacon_v_sequence(n)]
    return chain(segs, "building_block", {"n": n, "segments": [s.params.get("movement") for s in segs]})


def stage_one_flow() -> Flow:
    """X^1: swap Q_{2,1} with Q_{2,2}, then Q_{2,1} with Q_{2,3} (grid 2)."""
    a, b, c = cell_rect(2, 1, 1), cell_rect(2, 1, 2), cell_rect(2, 2, 1)
    return chain([transposition(a, b), transposition(a, c)], "stage_one", {"n": 1})


# point-evaluation wrappers ------------------------------------------------

def square_rotation_flow(t, p: TorusPoint, Q: Rect) -> TorusPoint:
    if not Q.closed(p):
        raise RegionError(f"{p} is not in {Q}")
    return Rotating(Q, Fraction(1)).move(p, Fraction(t))


def transposition_flow(t, p: TorusPoint, a: Rect, b: Rect) -> TorusPoint:
    return transposition(a, b).advance(p, 0, t)


def sort_flow(t, p: TorusPoint, i: int, j: int, j2: int, k: int) -> TorusPoint:
    return movement_flow(SortColumns(i, j, j2), k).advance(p, 0, t)


def shift_flow(t, p: TorusPoint, i: int, k: int) -> TorusPoint:
    return movement_flow(Shift(i), k).advance(p, 0, t)


def rotate2x2_flow(t, p: TorusPoint, i: int, j: int, k: int, sense: str = "ccw") -> TorusPoint:
    m = RotateCCW(i, j) if sense == "ccw" else RotateCW(i, j)
    return movement_flow(m, k).advance(p, 0, t)


def building_block_flow(n: int, t, p: TorusPoint) -> TorusPoint:
    return building_block(n).advance(p, 0, t)


# global schedule ----------------------------------------------------------

@dataclass(frozen=True)
class Stage:
    n: int
    flow: Flow

    @property
    def start(self) -> Fraction:
        return Fraction(1, 2 ** self.n)

    @property
    def end(self) -> Fraction:
        return Fraction(2, 2 ** self.n)

    @property
    def factor(self) -> int:
        return 2 ** self.n

    def local(self, t: Fraction) -> Fraction:
        return self.factor * t - 1

    def global_time(self, u: Fraction) -> Fraction:
        return (u + 1) / self.factor

    def support(self) -> Rect:
        """Q_{n,h_n} together with R_{n-1}; stage 1 moves the whole torus."""
        if self.n == 1:
            return Rect(0, 0, 1, 1)
        l = Dyadic(1, self.n - 1)
        return Rect(1 - 2 * l, Dyadic(0), 2 * l, l)


class FlowSchedule:
    """Stages ``n_max, ..., 1`` laid out on ``[2**-n_max, 1]``; stage n runs on ``[2**-n, 2**(1-n)]``."""

    def __init__(self, n_max: int):
        if not 1 <= n_max <= 12:
            raise ValueError("n_max must lie in 1..12")
        self.n_max = n_max
        self.stages = {1: Stage(1, stage_one_flow())}
        for n in range(2, n_max + 1):
            self.stages[n] = Stage(n, building_block(n))

    @property
    def start(self) -> Fraction:
        return Fraction(1, 2 ** self.n_max)

    def stage_of(self, t: Fraction) -> Stage:
        t = Fraction(t)
        self._check(t)
        for n in range(1, self.n_max + 1):
            st = self.stages[n]
            if st.start <= t <= st.end:
                return st
        raise TimeOutOfRange(str(t))

    def _check(self, t: Fraction) -> None:
        if not self.start <= t <= 1:
            raise TimeOutOfRange(f"t = {t} outside [{self.start}, 1]")

    def evaluate(self, t0, t1, p: TorusPoint) -> TorusPoint:
        t0, t1 = Fraction(t0), Fraction(t1)
        self._check(t0)
        self._check(t1)
        if t0 == t1:
            return p
        lo, hi = min(t0, t1), max(t0, t1)
        order = range(self.n_max, 0, -1) if t1 > t0 else range(1, self.n_max + 1)
        for n in order:
            st = self.stages[n]
            a, b = max(lo, st.start), min(hi, st.end)
            if a >= b:
                continue
            if n > 1 and not st.support().interior(p):
                continue
            ua, ub = st.local(a), st.local(b)
            p = st.flow.advance(p, ua, ub) if t1 > t0 else st.flow.advance(p, ub, ua)
        return p

    def velocity(self, t, p: TorusPoint) -> tuple[Dyadic, Dyadic]:
        t = Fraction(t)
        self._check(t)
        values = []
        for st in self.stages.values():
            if st.start <= t <= st.end:
                u = st.local(t)
                vx, vy = st.flow.velocity(u, p)
                values.append((vx * st.factor, vy * st.factor))
        if any(v != values[0] for v in values[1:]):
            raise DiscontinuityError(f"velocity jumps at stage boundary t = {t}")
        return values[0]

    def velocity_arrays(self, t, X, Y):
        st = self.stage_of(t)
        return st.flow.velocity_arrays(st.local(Fraction(t)), X, Y, scale=float(st.factor))

    def segments(self) -> list[dict]:
        """One record per primitive segment, in global time order."""
        out = []
        for n in range(self.n_max, 0, -1):
            st = self.stages[n]
            names = st.flow.params.get("segments") or ["T(Q21,Q22)", "T(Q21,Q23)"]
            m = len(names)
            for s, name in enumerate(names):
                out.append({
                    "stage": n,
                    "segment": s + 1,
                    "kind": name,
                    "t0": str(st.global_time(Fraction(s, m))),
                    "t1": str(st.global_time(Fraction(s + 1, m))),
                    "rescale": st.factor * m,
                })
        return out

    def to_json(self) -> str:
        return json.dumps({"n_max": self.n_max, "segments": self.segments()}, indent=1)

    def trajectory_csv(self, p: TorusPoint, times: Iterable) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["t", "x", "y"])
        times = sorted(Fraction(t) for t in times)
        if not times:
            return buf.getvalue()
        q, prev = p, times[0]
        for t in times:
            q = self.evaluate(prev, t, q)
            prev = t
            w.writerow([str(t), str(q.x), str(q.y)])
        return buf.getvalue()


def chacon_schedule(n_max: int) -> FlowSchedule:
    return FlowSchedule(n_max)


def evaluate_flow(s: FlowSchedule, t_start, t_end, p: TorusPoint) -> TorusPoint:
    return s.evaluate(t_start, t_end, p)


def velocity_sample(s: FlowSchedule, t, p: TorusPoint) -> tuple[Dyadic, Dyadic]:
    return s.velocity(t, p)


def endpoint_cells(fn, m: int) -> list[int]:
    """Row-major cell index reached by each cell centre of the ``2**m`` grid under ``fn``."""
    k = 1 << m
    out = []
    for idx in range(k * k):
        q = fn(GridCell.from_index(k, idx).center()).wrapped()
        out.append((k - 1 - (q.y * k).floor()) * k + (q.x * k).floor())
    return out
