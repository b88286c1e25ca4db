"""Command-line interface: ``chacon <verb> ...``.

Verbs: build, verify, mixing, witness, field, flow-eval, render, chacon1d.

Exit codes are 0 when every check passes, 1 when a check fails and 2 for
usage or I/O errors.  ``CHACON_WORKERS`` sets the process count used by
``verify`` and ``field stage`` (default 1).

Exact values are printed as ``p/2^e`` (or ``p/q`` for the one-dimensional
oracle); decimals only appear in estimator reports.

Report schemas
--------------
Permutation file (``build``): a little-endian ``uint64`` resolution ``m``
followed by ``4**m`` ``int64`` images in row-major order, row 1 on top.
With ``--format json``: ``{"resolution": m, "forward": [...]}``.

Piece list (``build``, ``<out>.pieces.json``): a list of
``[row, col, level, nx, ex, ny, ey]``, meaning the square at ``(row, col)``
of the ``2**level`` grid is translated by ``(nx/2^ex, ny/2^ey)``.

Mixing report JSON: ``resolution``, ``A``, ``B``, ``order``,
``measure_A``, ``measure_B``, ``intersections`` (``|pi^-j A & B|`` for
``j < N``), ``cesaro`` (running averages), ``note``.  The CSV form has the
columns ``j, intersection, cesaro_partial``.

Field report JSON: one object per estimate with ``name, sup, tv,
tv_error, tv_raw, l1, resolution, samples, bound_sup, bound_tv, exact_tv,
params``.  The CSV form has one row per estimate.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

from . import analysis
from .automorphism import (
    GridPermutation,
    ResolutionTooCoarse,
    build_Un_direct,
    build_Un_recursive,
    grid_permutation_of,
    nesting_difference,
    to_grid_permutation,
)
from .chacon1d import chacon_1d_build, chacon_1d_column
from .configuration import Configuration, InvalidMovement, parse_movement
from .dyadic import Dyadic, DyadicSquare, NotDyadicError, TorusPoint
from .flow import TimeOutOfRange, chacon_schedule, endpoint_cells
from .render import column_svg, configuration_svg, movement_svg, partition_svg

N_MAX = 12


class UsageError(Exception):
    pass


def exact(q) -> str:
    """``p/2^e`` when dyadic, otherwise ``p/q``."""
    q = Fraction(q)
    try:
        return str(Dyadic.from_fraction(q))
    except NotDyadicError:
        return str(q)


def workers() -> int:
    try:
        return max(1, int(os.environ.get("CHACON_WORKERS", "1")))
    except ValueError:
        raise UsageError("CHACON_WORKERS must be an integer")


def _pmap(fn, items):
    items = list(items)
    w = workers()
    if w == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=w) as ex:
        return list(ex.map(fn, items))


def _check_n(n: int, lo: int = 1) -> None:
    if not lo <= n <= N_MAX:
        raise UsageError(f"n must lie in {lo}..{N_MAX}")


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _range(text: str) -> list[int]:
    if ".." in text:
        a, b = text.split("..", 1)
        return list(range(int(a), int(b) + 1))
    return [int(v) for v in text.split(",")]


def _quarter_or_rect(text: str, m: int) -> tuple[str, list[int]]:
    """A set of cells of the ``2**m`` grid: ``tl|tr|bl|br`` or ``row:col:rows:cols`` (1-based)."""
    k = 1 << m
    named = {"tl": (0, 1), "tr": (1, 1), "bl": (0, 0), "br": (1, 0)}
    t = text.strip().lower()
    if t in named:
        ix, iy = named[t]
        return t, DyadicSquare(1, ix, iy).cell_indices(m)
    try:
        r, c, h, w = (int(v) for v in t.split(":"))
    except ValueError:
        raise UsageError(f"bad set descriptor {text!r}")
    if not (1 <= r and 1 <= c and h >= 1 and w >= 1 and r + h - 1 <= k and c + w - 1 <= k):
        raise UsageError(f"set {text!r} does not fit the {k}x{k} grid")
    cells = [(i - 1) * k + (j - 1) for i in range(r, r + h) for j in range(c, c + w)]
    return t, cells


# build ----------------------------------------------------------------------

def cmd_build(args) -> int:
    _check_n(args.n)
    m = args.m if args.m is not None else args.n
    if m < args.n or m > N_MAX:
        raise UsageError(f"resolution m must satisfy n <= m <= {N_MAX}")
    f = build_Un_direct(args.n)
    pi = to_grid_permutation(f, m)
    out = Path(args.out) if args.out else None
    if out:
        if args.format == "json":
            out.write_text(pi.to_json())
        else:
            out.write_bytes(pi.to_bytes())
        out.with_name(out.name + ".pieces.json").write_text(f.to_json())
    ct = pi.cycle_type()
    summary = {
        "n": args.n, "resolution": m, "cells": pi.size, "pieces": len(f),
        "order": str(pi.order()),
        "cycle_type": {str(k): v for k, v in sorted(ct.items())},
        "bijective": True,
    }
    print(json.dumps(summary, indent=1))
    if pi.size <= 256:
        print(pi.apply_to_configuration(Configuration.identity(pi.side)))
    return 0


# verify ---------------------------------------------------------------------

def _verify_row(args) -> dict:
    n, flow_max = args
    t = time.perf_counter()
    if n == 1:
        pi = grid_permutation_of(1, 1)
        return {"n": 1, "direct_vs_recursive": "base case, direct only",
                "nesting": "-", "flow_endpoint": "pass" if _flow_ok(1, pi) else "fail",
                "status": "pass" if _flow_ok(1, pi) else "fail",
                "seconds": round(time.perf_counter() - t, 3)}
    direct = grid_permutation_of(n, n)
    rec = to_grid_permutation(build_Un_recursive(n), n)
    diff = direct.first_difference(rec)
    nest = nesting_difference(n)
    row = {"n": n,
           "direct_vs_recursive": "pass" if diff is None else f"fail at cell {diff}",
           "nesting": "pass" if nest is None else f"fail at cell {nest}"}
    if n <= flow_max:
        ok = _flow_ok(n, direct)
        row["flow_endpoint"] = "pass" if ok else "fail"
    else:
        ok = True
        row["flow_endpoint"] = "skipped"
    row["status"] = "pass" if diff is None and nest is None and ok else "fail"
    row["seconds"] = round(time.perf_counter() - t, 3)
    return row


def _flow_ok(n: int, pi: GridPermutation) -> bool:
    s = chacon_schedule(n)
    cells = endpoint_cells(lambda p: s.evaluate(s.start, 1, p), n)
    return cells == pi.forward.tolist()


def _read_perm(path: str) -> GridPermutation:
    data = Path(path).read_bytes()
    if data[:1] == b"{":
        return GridPermutation.from_json(data.decode())
    return GridPermutation.from_bytes(data)


def cmd_verify(args) -> int:
    rows = []
    if args.perm:
        try:
            pi = _read_perm(args.perm)
        except ValueError as exc:
            rows.append({"file": args.perm, "status": "fail", "error": str(exc)})
            pi = None
        if pi is not None:
            n = args.n if args.n is not None else pi.resolution
            _check_n(n)
            if pi.resolution < n:
                raise UsageError("the file is coarser than U_n")
            ref = grid_permutation_of(n, pi.resolution)
            diff = ref.first_difference(pi)
            rows.append({"file": args.perm, "n": n, "resolution": pi.resolution,
                         "status": "pass" if diff is None else "fail",
                         "first_difference": diff})
    else:
        ns = _range(args.n_range)
        for n in ns:
            _check_n(n)
        rows = _pmap(_verify_row, [(n, args.flow_max) for n in ns])
    if args.format == "csv":
        keys = sorted({k for r in rows for k in r})
        lines = [",".join(keys)] + [",".join(str(r.get(k, "")) for k in keys) for r in rows]
        _emit("\n".join(lines), args.out)
    else:
        _emit(json.dumps(rows, indent=1), args.out)
    return 0 if all(r["status"] == "pass" for r in rows) else 1


# mixing and witness ----------------------------------------------------------

def cmd_mixing(args) -> int:
    _check_n(args.n)
    m = args.m if args.m is not None else args.n
    if m < args.n or m > N_MAX:
        raise UsageError(f"resolution m must satisfy n <= m <= {N_MAX}")
    pi = grid_permutation_of(args.n, m)
    la, A = _quarter_or_rect(args.A, m)
    lb, B = _quarter_or_rect(args.B, m)
    try:
        rep = analysis.weak_mixing_statistic(pi, A, B, args.N, Fraction(args.guard), (la, lb))
    except analysis.PeriodGuardError as exc:
        print(f"period guard: {exc}", file=sys.stderr)
        return 1
    if args.format == "csv":
        _emit(rep.to_csv(), args.out)
    else:
        _emit(rep.to_json(), args.out)
    return 0


def cmd_witness(args) -> int:
    _check_n(args.n, 2)
    ks = args.k or list(range(args.n, args.n + 4))
    if max(ks) + 1 > N_MAX:
        raise UsageError(f"k must stay below {N_MAX}")
    rows = [r.as_row() for r in analysis.strong_mixing_witness(args.n, ks)]
    for r in rows:
        for key in ("ratio", "certified_lower", "certified_upper", "measure_Q"):
            r[key] = exact(Fraction(r[key]))
    if args.format == "csv":
        keys = list(rows[0])
        lines = [",".join(keys)] + [",".join(str(r[k]) for k in keys) for r in rows]
        _emit("\n".join(lines), args.out)
    else:
        _emit(json.dumps(rows, indent=1), args.out)
    quarter = Fraction(1, 4)
    return 0 if all(Dyadic.parse(r["ratio"]).as_fraction() >= quarter for r in rows) else 1


# field ---------------------------------------------------------------------

def _stage_job(args):
    n, gpc, samples = args
    return analysis.global_field_check(n, gpc, samples)


def cmd_field(args) -> int:
    ests = []
    if args.kind == "rotation":
        a, b = Fraction(args.a), Fraction(args.b)
        e = analysis.rotation_tv(a, b, args.g)
        e.params["relative_error"] = (e.tv - e.exact_tv) / e.exact_tv
        ests.append(e)
        ok = abs(e.tv - e.exact_tv) <= 0.01 * e.exact_tv
    elif args.kind == "primitives":
        ests = analysis.primitive_checks(args.k, args.g_per_cell, args.samples)
        ok = all(e.sup_ok() and e.tv_ok() for e in ests)
    elif args.kind == "stage":
        ns = _range(args.n_range)
        for n in ns:
            _check_n(n)
        for speed, tv in _pmap(_stage_job, [(n, args.g_per_cell, args.samples) for n in ns]):
            ests += [speed, tv]
        ok = all(e.sup_ok() and e.tv_ok() for e in ests)
    else:
        raise UsageError(f"unknown field kind {args.kind}")
    if args.format == "csv":
        _emit(analysis.FieldEstimate.to_csv(ests), args.out)
    else:
        _emit(json.dumps([e.to_dict() for e in ests], indent=1, default=str), args.out)
    return 0 if ok else 1


# flow-eval --------------------------------------------------------------------

def _point(text: str) -> TorusPoint:
    try:
        x, y = text.split(",")
        return TorusPoint.of(Dyadic.parse(x), Dyadic.parse(y))
    except (ValueError, NotDyadicError):
        raise UsageError(f"points are 'x,y' with dyadic coordinates, got {text!r}")


def cmd_flow_eval(args) -> int:
    _check_n(args.n_max)
    s = chacon_schedule(args.n_max)
    if args.point is None:
        _emit(s.to_json(), args.out)
        return 0
    p = _point(args.point)
    if args.times:
        times = [Fraction(t) for t in args.times.split(",")]
        _emit(s.trajectory_csv(p, times), args.out)
        return 0
    t0 = Fraction(args.t0) if args.t0 is not None else s.start
    t1 = Fraction(args.t1)
    q = s.evaluate(t0, t1, p).wrapped()
    _emit(json.dumps({"point": [str(p.x), str(p.y)], "t0": str(t0), "t1": str(t1),
                      "image": [str(q.x), str(q.y)]}, indent=1), args.out)
    return 0


# render ---------------------------------------------------------------------

def cmd_render(args) -> int:
    if args.format not in (None, "svg"):
        raise UsageError("render only writes svg")
    if args.target == "configuration":
        gamma = Configuration(json.loads(args.matrix)) if args.matrix else Configuration.identity(args.size)
        svg = configuration_svg(gamma)
    elif args.target == "movement":
        if not args.move:
            raise UsageError("--move is required")
        gamma = Configuration(json.loads(args.matrix)) if args.matrix else Configuration.identity(args.size)
        svg = movement_svg(gamma, parse_movement(args.move))
    elif args.target == "partition":
        _check_n(args.n)
        svg = partition_svg(build_Un_direct(args.n), labels=not args.no_labels)
    elif args.target == "column":
        _check_n(args.n)
        svg = column_svg(args.n)
    else:
        raise UsageError(f"unknown render target {args.target}")
    _emit(svg, args.out)
    return 0


# chacon1d ---------------------------------------------------------------------

def cmd_chacon1d(args) -> int:
    if not 0 <= args.n <= 8:
        raise UsageError("n must lie in 0..8")
    col, T = chacon_1d_build(args.n)
    data = {
        "n": args.n,
        "height": col.height,
        "heights": [chacon_1d_column(i).height for i in range(args.n + 1)],
        "spacer": [str(col.spacer.a), str(col.spacer.b)],
        "levels": [[str(iv.a), str(iv.b)] for iv in col.levels],
        "map": [[str(iv.a), str(iv.b), str(off)] for iv, off in T.pieces],
    }
    if args.format == "csv":
        lines = ["a,b,offset"] + [",".join(r) for r in data["map"]]
        _emit("\n".join(lines), args.out)
    else:
        _emit(json.dumps(data, indent=1), args.out)
    return 0


# argument parsing -----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="chacon", description="Chacon's automorphism of the torus and its flow.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, formats=("json", "csv")):
        p.add_argument("--format", choices=formats, default=formats[0])
        p.add_argument("--out", help="output path (default: stdout)")

    p = sub.add_parser("build", help="build U_n and write its grid permutation")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, help="grid resolution exponent (default n)")
    p.add_argument("--format", choices=("bin", "json"), default="bin")
    p.add_argument("--out", help="permutation file; pieces go to <out>.pieces.json")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("verify", help="decomposition, nesting and flow-endpoint checks")
    p.add_argument("--n-range", default="1..6")
    p.add_argument("--flow-max", type=int, default=5, help="largest n for the flow endpoint check")
    p.add_argument("--perm", help="compare a permutation file against U_n instead")
    p.add_argument("--n", type=int, help="with --perm: which U_n (default: the file's resolution)")
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("mixing", help="Cesàro statistic of U_n on the 2^m grid")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int)
    p.add_argument("--A", default="tl", help="tl|tr|bl|br or row:col:rows:cols")
    p.add_argument("--B", default="tr")
    p.add_argument("--N", type=int, default=128)
    p.add_argument("--guard", default="1/4", help="N must stay below guard * order")
    common(p)
    p.set_defaults(func=cmd_mixing)

    p = sub.add_parser("witness", help="exact |U^{h_k} Q_n & Q_n| / |Q_n| table")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, nargs="*")
    common(p)
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("field", help="sup-norm and total-variation estimates")
    p.add_argument("kind", choices=("rotation", "primitives", "stage"))
    p.add_argument("--a", default="1")
    p.add_argument("--b", default="1")
    p.add_argument("--g", type=int, default=1024)
    p.add_argument("--k", type=int, default=8)
    p.add_argument("--n-range", default="2..4")
    p.add_argument("--g-per-cell", type=int, default=64)
    p.add_argument("--samples", type=int, default=10_000)
    common(p)
    p.set_defaults(func=cmd_field)

    p = sub.add_parser("flow-eval", help="evaluate the flow schedule at a point")
    p.add_argument("--n-max", type=int, default=6)
    p.add_argument("--point", help="x,y with dyadic coordinates")
    p.add_argument("--t0")
    p.add_argument("--t1", default="1")
    p.add_argument("--times", help="comma-separated times for a trajectory CSV")
    p.add_argument("--out")
    p.set_defaults(func=cmd_flow_eval)

    p = sub.add_parser("render", help="SVG of a configuration, movement, partition or column")
    p.add_argument("target", choices=("configuration", "movement", "partition", "column"))
    p.add_argument("--matrix", help="JSON label matrix")
    p.add_argument("--size", type=int, default=4, help="identity size when --matrix is absent")
    p.add_argument("--move", help="movement such as 'S_c(4;1,3)' or 'R-(4,1)'")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--no-labels", action="store_true")
    p.add_argument("--format", choices=("svg",), default="svg")
    p.add_argument("--out")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("chacon1d", help="the one-dimensional column and map")
    p.add_argument("--n", type=int, default=1)
    common(p)
    p.set_defaults(func=cmd_chacon1d)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ResolutionTooCoarse, InvalidMovement, TimeOutOfRange, NotDyadicError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
