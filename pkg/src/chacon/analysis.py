"""Mixing statistics on grid permutations and estimators for velocity fields.

Everything about mixing is exact (``Fraction``).  The field estimators use
floating point on sample lattices and report an error bar next to every
estimate.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .automorphism import GridPermutation, StageIndex, grid_permutation_of
from .dyadic import DyadicSquare
from .flow import Flow, FlowSchedule, Rect, cell_rect, movement_flow, rotation_flow, transposition
from .configuration import RotateCCW, Shift, SortColumns

__all__ = [
    "PeriodGuardError",
    "MixingReport",
    "WitnessResult",
    "FieldEstimate",
    "intersection_measure",
    "strong_mixing_witness",
    "weak_mixing_statistic",
    "tv_estimate",
    "sup_estimate",
    "l1_estimate",
    "crofton_directions",
    "flow_phase_estimates",
    "primitive_checks",
    "stage_estimates",
    "global_field_check",
    "square_cells",
]

C1 = 7 * 24
C2 = 7 * 240


class PeriodGuardError(ValueError):
    """The Cesàro horizon is too long compared with the permutation's order."""


def _mask(cells, size: int) -> np.ndarray:
    m = np.zeros(size, dtype=bool)
    idx = np.fromiter(cells, dtype=np.int64) if not isinstance(cells, np.ndarray) else cells
    if idx.dtype == bool:
        return idx.copy()
    m[idx] = True
    return m


def square_cells(sq: DyadicSquare, m: int) -> np.ndarray:
    return np.array(sq.cell_indices(m), dtype=np.int64)


def intersection_measure(pi: GridPermutation, k: int, A, B) -> Fraction:
    """``|pi^-k(A) & B|`` as an exact fraction of the torus."""
    A = np.asarray(list(A) if not isinstance(A, np.ndarray) else A, dtype=np.int64)
    pre = pi.power_array(-k, A)
    hit = _mask(pre, pi.size) & _mask(B, pi.size)
    return Fraction(int(hit.sum()), pi.size)


@dataclass
class WitnessResult:
    n: int
    k: int
    h_k: int
    resolution: int
    ratio: Fraction
    certified_lower: Fraction
    certified_upper: Fraction
    measure: Fraction

    @property
    def certifies_non_mixing(self) -> bool:
        """True when ``|U^h(Q) & Q| > |Q|^2`` follows from the certified bound."""
        return self.certified_lower * self.measure > self.measure ** 2

    def as_row(self) -> dict:
        return {
            "n": self.n, "k": self.k, "h_k": self.h_k, "resolution": self.resolution,
            "ratio": str(self.ratio), "certified_lower": str(self.certified_lower),
            "certified_upper": str(self.certified_upper), "measure_Q": str(self.measure),
            "certifies_non_mixing": self.certifies_non_mixing,
        }


def strong_mixing_witness(n: int, k_list: Sequence[int], extra: int = 1) -> list[WitnessResult]:
    """Exact ``|U^{h_k}(Q_n) & Q_n| / |Q_n|`` for each ``k``, with ``Q_n = Q_{n,1}``.

    ``U`` is replaced by ``U_M`` at resolution ``2**M`` with ``M = max(k) + extra``.
    The certified bounds only use cells whose orbit stays where ``U_M`` and
    the limit map agree.
    """
    if n < 2:
        raise ValueError("the witness needs n >= 2")
    if any(k < n for k in k_list):
        raise ValueError("each k must be at least n")
    M = max(k_list) + extra
    pi = grid_permutation_of(M, M)
    Q = StageIndex(n).first_square()
    cells = square_cells(Q, M)
    inQ = _mask(cells, pi.size)
    cycle_id, position, *_ = pi._decompose()
    top = 4 ** M - 1  # h_{M+1}
    main = cycle_id[0]
    out = []
    for k in k_list:
        h = StageIndex(k).height
        img = pi.power_array(h, cells)
        hit = inQ[img]
        ok = (cycle_id[cells] == main) & (position[cells] + h <= top - 1)
        lower = int((hit & ok).sum())
        unsure = int((~ok).sum())
        q = len(cells)
        out.append(WitnessResult(
            n=n, k=k, h_k=h, resolution=M,
            ratio=Fraction(int(hit.sum()), q),
            certified_lower=Fraction(lower, q),
            certified_upper=Fraction(lower + unsure, q),
            measure=Fraction(q, pi.size),
        ))
    return out


@dataclass
class MixingReport:
    resolution: int
    A: str
    B: str
    order: int
    measure_A: Fraction
    measure_B: Fraction
    intersections: list[Fraction]
    cesaro: list[Fraction]
    note: str = "finite-resolution statistic; not a proof of weak mixing"
    witness: list[dict] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps({
            "resolution": self.resolution, "A": self.A, "B": self.B, "order": str(self.order),
            "measure_A": str(self.measure_A), "measure_B": str(self.measure_B),
            "intersections": [str(x) for x in self.intersections],
            "cesaro": [str(x) for x in self.cesaro],
            "note": self.note, "witness": self.witness,
        }, indent=1)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["j", "intersection", "cesaro_partial"])
        for j, (x, c) in enumerate(zip(self.intersections, self.cesaro)):
            w.writerow([j, str(x), str(c)])
        return buf.getvalue()


def weak_mixing_statistic(pi: GridPermutation, A, B, N: int,
                          guard_fraction: Fraction = Fraction(1, 4),
                          labels: tuple[str, str] = ("A", "B")) -> MixingReport:
    """Cesàro partial averages of ``(|pi^-j A & B| - |A||B|)^2`` for ``j < N``."""
    order = pi.order()
    if N >= Fraction(guard_fraction) * order:
        raise PeriodGuardError(f"N = {N} is not below {guard_fraction} of the order {order}")
    size = pi.size
    a = _mask(A, size)
    b = _mask(B, size)
    na, nb = int(a.sum()), int(b.sum())
    prod = na * nb
    fwd = pi.forward
    pre = a
    inter, ces = [], []
    acc = 0
    for j in range(N):
        c = int((pre & b).sum())
        inter.append(Fraction(c, size))
        acc += (c * size - prod) ** 2
        ces.append(Fraction(acc, (j + 1) * size ** 4))
        pre = pre[fwd]
    return MixingReport(pi.resolution, labels[0], labels[1], order,
                        Fraction(na, size), Fraction(nb, size), inter, ces)


# field estimators ---------------------------------------------------------

def crofton_directions():
    """Lattice directions and positive weights exact on their own normals.

    The set contains every interface normal that occurs for squares and
    2:1 rectangles: the axes, the diagonals and slopes 2 and 1/2.
    """
    dirs = [(1, 0), (2, 1), (1, 1), (1, 2), (0, 1), (-1, 2), (-1, 1), (-2, 1)]
    th = np.array([math.atan2(q, p) for p, q in dirs])
    A = np.abs(np.sin(th[None, :] - th[:, None]))
    w = np.linalg.solve(A, np.full(len(dirs), 2.0))
    return dirs, w


_DIRS, _WEIGHTS = crofton_directions()
_OFFSET = (0.000123456789, 0.000314159265)

Field = Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]


@dataclass
class FieldEstimate:
    name: str
    sup: float | None = None
    tv: float | None = None
    tv_error: float | None = None
    l1: float | None = None
    resolution: int | None = None
    samples: int | None = None
    bound_sup: float | None = None
    bound_tv: float | None = None
    exact_tv: float | None = None
    tv_raw: float | None = None
    params: dict = field(default_factory=dict)

    def sup_ok(self) -> bool:
        return self.bound_sup is None or self.sup is None or self.sup <= self.bound_sup

    def tv_ok(self) -> bool:
        """The bound holds, or lies within the estimate's error bar."""
        if self.bound_tv is None or self.tv is None:
            return True
        return self.tv <= self.bound_tv or self.tv - (self.tv_error or 0.0) <= self.bound_tv

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, default=str)

    @staticmethod
    def to_csv(rows: Iterable["FieldEstimate"]) -> str:
        buf = io.StringIO()
        keys = ["name", "sup", "bound_sup", "tv", "tv_error", "tv_raw", "bound_tv", "exact_tv", "l1", "resolution", "samples"]
        w = csv.writer(buf)
        w.writerow(keys)
        for r in rows:
            w.writerow(["" if getattr(r, k) is None else getattr(r, k) for k in keys])
        return buf.getvalue()


def _axis(lo: float, hi: float, g: int, offset: float):
    """Lattice coordinates ``offset + i/g`` inside ``[lo, hi)``; the whole circle if it is too wide."""
    if hi - lo >= 1.0:
        i = np.arange(g)
        return offset + i / g, True
    i0 = math.ceil((lo - offset) * g)
    i1 = math.ceil((hi - offset) * g)
    return offset + np.arange(i0, i1) / g, False


def _lattice(region, g: int):
    if region is None:
        region = (0.0, 0.0, 1.0, 1.0)
    x0, y0, x1, y1 = region
    xs, px = _axis(x0, x1, g, _OFFSET[0])
    ys, py = _axis(y0, y1, g, _OFFSET[1])
    X, Y = np.meshgrid(np.mod(xs, 1.0), np.mod(ys, 1.0))
    return X, Y, px, py


def _tv_once(field_fn: Field, region, g: int) -> float:
    if region is not None:
        pad = 4.0 / g
        x0, y0, x1, y1 = region
        region = (x0 - pad, y0 - pad, x1 + pad, y1 + pad)
    X, Y, px, py = _lattice(region, g)
    VX, VY = field_fn(X, Y)
    ny, nx = VX.shape
    h = 1.0 / g
    total = 0.0
    for (p, q), w in zip(_DIRS, _WEIGHTS):
        sx = _pair_slices(nx, p, px)
        sy = _pair_slices(ny, q, py)
        if sx is None or sy is None:
            continue
        SX, SY = VX, VY
        if px:
            SX, SY = np.roll(SX, -p, axis=1), np.roll(SY, -p, axis=1)
        if py:
            SX, SY = np.roll(SX, -q, axis=0), np.roll(SY, -q, axis=0)
        (ax, bx), (ay, by) = sx, sy
        dX = SX[by, bx] - VX[ay, ax]
        dY = SY[by, bx] - VY[ay, ax]
        total += w * float(np.hypot(dX, dY).sum()) * h / math.hypot(p, q)
    return 0.5 * total


def _pair_slices(n: int, d: int, periodic: bool):
    """Index slices (first, second) pairing lattice index ``i`` with ``i + d``."""
    if periodic:
        return slice(None), slice(None)
    if abs(d) >= n:
        return None
    if d >= 0:
        return slice(0, n - d), slice(d, n)
    return slice(-d, n), slice(0, n + d)


def tv_estimate(field_fn: Field, region=None, g: int = 1024, name: str = "field",
                bound: float | None = None, exact: float | None = None) -> FieldEstimate:
    """Total variation of a piecewise-smooth field by a directional (Crofton) lattice sum.

    ``region`` is the bounding box ``(x0, y0, x1, y1)`` of the field's support
    in unwrapped coordinates; a small margin is added and an axis at least one
    unit long is treated as periodic.  Sampled variation along each lattice
    line misses an O(1/g) amount at every interface, so the reported value
    extrapolates the sums at ``g/2`` and ``g``; the error bar is the size of
    that correction and ``tv_raw`` keeps the plain sum at ``g``.
    """
    fine = _tv_once(field_fn, region, g)
    coarse = _tv_once(field_fn, region, max(g // 2, 1))
    X, _, _, _ = _lattice(region, g)
    return FieldEstimate(name=name, tv=2 * fine - coarse, tv_error=abs(fine - coarse), tv_raw=fine,
                         resolution=g, samples=int(X.size), bound_tv=bound, exact_tv=exact)


def sup_estimate(field_fn: Field, region=None, samples: int = 10_000, name: str = "field",
                 bound: float | None = None, seed: int = 0) -> FieldEstimate:
    """Largest speed over a jittered stratified sample of the region."""
    if region is None:
        region = (0.0, 0.0, 1.0, 1.0)
    x0, y0, x1, y1 = region
    m = max(1, math.ceil(math.sqrt(samples)))
    rng = np.random.default_rng(seed)
    i = (np.arange(m)[None, :] + rng.random((m, m))) / m
    j = (np.arange(m)[:, None] + rng.random((m, m))) / m
    X = np.mod(x0 + (x1 - x0) * i, 1.0)
    Y = np.mod(y0 + (y1 - y0) * j, 1.0)
    VX, VY = field_fn(X, Y)
    return FieldEstimate(name=name, sup=float(np.hypot(VX, VY).max()), samples=int(X.size), bound_sup=bound)


def l1_estimate(field_fn: Field, region=None, g: int = 256) -> float:
    X, Y, px, py = _lattice(region, g)
    VX, VY = field_fn(X, Y)
    return float(np.hypot(VX, VY).sum()) / (g * g)


def _window(boxes, margin: float):
    x0 = min(b[0] for b in boxes) - margin
    y0 = min(b[1] for b in boxes) - margin
    x1 = max(b[2] for b in boxes) + margin
    y1 = max(b[3] for b in boxes) + margin
    return (x0, y0, x1, y1)


def flow_phase_estimates(flow: Flow, g: int, samples: int = 10_000, scale: float = 1.0,
                         name: str = "flow") -> list[FieldEstimate]:
    """Sup and TV of the flow's field in every phase, sampled at the phase midpoint."""
    out = []
    for idx, ph in enumerate(flow.phases):
        u = (ph.start + ph.end) / 2
        boxes = flow.support(u)
        if not boxes:
            continue
        region = _window(boxes, 0.0)

        def fn(X, Y, u=u):
            return flow.velocity_arrays(u, X, Y, scale=scale)

        est = tv_estimate(fn, region, g, name=f"{name}[{idx}]")
        s = sup_estimate(fn, region, samples, seed=idx)
        est.sup, est.samples = s.sup, max(s.samples, est.samples)
        est.params = {"phase": idx, "u": str(u), "region": region}
        out.append(est)
    return out


def _reduce(name: str, phases: list[FieldEstimate], bound_sup, bound_tv, params) -> FieldEstimate:
    top = max(phases, key=lambda e: e.tv)
    return FieldEstimate(
        name=name,
        sup=max(e.sup for e in phases),
        tv=top.tv,
        tv_error=top.tv_error,
        tv_raw=top.tv_raw,
        resolution=top.resolution,
        samples=sum(e.samples for e in phases),
        bound_sup=bound_sup,
        bound_tv=bound_tv,
        params=params,
    )


def primitive_checks(k: int, g_per_cell: int = 128, samples: int = 10_000) -> list[FieldEstimate]:
    """Sampled sup and TV of each primitive field on the ``k``-grid against the stated bounds."""
    if k < 4:
        raise ValueError("use k >= 4 so that a sort of length 3 fits")
    g = k * g_per_cell
    out = []
    tr = transposition(cell_rect(k, 2, 1), cell_rect(k, 2, 2))
    out.append(_reduce("transposition", flow_phase_estimates(tr, g, samples, name="transposition"),
                       8 / k, 80 / k ** 2, {"k": k}))
    span = 3
    so = movement_flow(SortColumns(1, 1, 1 + span), k)
    out.append(_reduce("sort", flow_phase_estimates(so, g, samples, name="sort"),
                       8.0, 80 / k, {"k": k, "length": span, "exact_sup_limit": span * 8 / k,
                                     "exact_tv": span * 80 / k ** 2}))
    sh = movement_flow(Shift(2), k)
    out.append(_reduce("shift", flow_phase_estimates(sh, g, samples, name="shift"),
                       1 / k, 2 / k, {"k": k}))
    ro = movement_flow(RotateCCW(2, 1), k)
    est = flow_phase_estimates(ro, g, samples, name="rotate2x2")
    out.append(_reduce("rotate2x2", est, 2 / k, 64 / k ** 2, {"k": k, "exact_sup_limit": 4 / k}))
    return out


def rotation_tv(a, b, g: int = 1024) -> FieldEstimate:
    """TV of the unit-rate rotation field on an ``a`` by ``b`` rectangle at the origin."""
    f = rotation_flow(Rect(0, 0, a, b))
    region = (0.0, 0.0, float(a), float(b))
    exact = 4 * float(a) ** 2 + 4 * float(b) ** 2

    def fn(X, Y):
        return f.velocity_arrays(Fraction(1, 2), X, Y)

    return tv_estimate(fn, region, g, name=f"rotation {a}x{b}", exact=exact)


def stage_estimates(n: int, g_per_cell: int = 64, samples: int = 10_000,
                    rescaled: bool = True) -> list[FieldEstimate]:
    """Per-phase estimates of the stage-n field; ``rescaled`` multiplies by ``2**n`` as in b^U."""
    sched = FlowSchedule(n)
    st = sched.stages[n]
    k = 2 ** n if n > 1 else 2
    g = k * g_per_cell
    scale = float(st.factor) if rescaled else 1.0
    return flow_phase_estimates(st.flow, g, samples, scale=scale, name=f"stage{n}")


def global_field_check(n: int, g_per_cell: int = 64, samples: int = 10_000) -> tuple[FieldEstimate, FieldEstimate]:
    """Sup/L1 and TV of b^U over stage ``n`` against ``C1``, ``2 C1`` and ``2**n C2 / 4**n``."""
    phases = stage_estimates(n, g_per_cell, samples, rescaled=True)
    sched = FlowSchedule(n)
    st = sched.stages[n]
    k = 2 ** n if n > 1 else 2
    l1 = 0.0
    for ph in st.flow.phases:
        u = (ph.start + ph.end) / 2
        region = _window(st.flow.support(u), 0.0)

        def fn(X, Y, u=u):
            return st.flow.velocity_arrays(u, X, Y, scale=float(st.factor))

        x0, y0, x1, y1 = region
        area = min(x1 - x0, 1.0) * min(y1 - y0, 1.0)
        X, Y, _, _ = _lattice(region, k * g_per_cell)
        VX, VY = fn(X, Y)
        l1 = max(l1, float(np.hypot(VX, VY).mean()) * area)
    speed = FieldEstimate(
        name=f"stage{n} speed", sup=max(e.sup for e in phases), l1=l1,
        samples=sum(e.samples for e in phases), bound_sup=float(C1),
        params={"bound_l1": 2 * C1},
    )
    top = max(phases, key=lambda e: e.tv)
    tv = FieldEstimate(
        name=f"stage{n} TV", tv=top.tv, tv_error=top.tv_error, tv_raw=top.tv_raw, resolution=top.resolution,
        samples=sum(e.samples for e in phases), bound_tv=2 ** n * C2 / 4 ** n,
        params={"phase": top.params.get("phase")},
    )
    return speed, tv
