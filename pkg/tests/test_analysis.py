import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chacon import analysis
from chacon.automorphism import grid_permutation_of
from chacon.dyadic import DyadicSquare
from chacon.flow import cell_rect, transposition


def quarter(ix, iy, m):
    return np.array(DyadicSquare(1, ix, iy).cell_indices(m), dtype=np.int64)


def test_intersection_basics():
    pi = grid_permutation_of(3, 4)
    assert analysis.intersection_measure(pi, 0, [7], [7]) == Fraction(1, 256)
    B = quarter(1, 0, 4)
    for k in (1, 5, 99):
        assert analysis.intersection_measure(pi, k, range(256), B) == Fraction(64, 256)
    u2 = grid_permutation_of(2, 2)
    assert analysis.intersection_measure(u2, 1, [0], [0]) == 0


@settings(max_examples=30, deadline=None)
@given(st.integers(3, 6), st.integers(0, 10 ** 9), st.sets(st.integers(0, 4095), min_size=1, max_size=60))
def test_preimage_mass(m, k, A):
    pi = grid_permutation_of(3, m)
    A = [a % pi.size for a in A]
    A = sorted(set(A))
    parts = [quarter(ix, iy, m) for ix in (0, 1) for iy in (0, 1)]
    assert sum(analysis.intersection_measure(pi, k, A, B) for B in parts) == Fraction(len(A), pi.size)


def test_witness_values():
    rows = analysis.strong_mixing_witness(2, [2, 3, 4, 5])
    assert rows[0].ratio == Fraction(1, 4)
    assert all(r.ratio >= Fraction(1, 4) for r in rows)
    assert all(r.certified_lower <= r.ratio <= r.certified_upper for r in rows)
    n3 = analysis.strong_mixing_witness(3, [3])[0]
    assert n3.ratio == Fraction(1, 4) and n3.certifies_non_mixing
    # |Q_2| is exactly one quarter, so the ratio 1/4 at k = n does not exceed |Q_2|
    assert rows[0].measure == Fraction(1, 4) and not rows[0].certifies_non_mixing


def test_cesaro_trivial_sets():
    pi = grid_permutation_of(5, 5)
    empty = analysis.weak_mixing_statistic(pi, [], quarter(1, 1, 5), 50)
    full = analysis.weak_mixing_statistic(pi, range(pi.size), quarter(1, 1, 5), 50)
    assert all(c == 0 for c in empty.cesaro) and all(c == 0 for c in full.cesaro)


def test_cesaro_report_and_guard():
    pi = grid_permutation_of(5, 5)
    rep = analysis.weak_mixing_statistic(pi, quarter(0, 1, 5), quarter(1, 1, 5), 200)
    assert len(rep.cesaro) == 200 and all(isinstance(c, Fraction) for c in rep.cesaro)
    data = json.loads(rep.to_json())
    assert data["order"] == "1023" and len(data["intersections"]) == 200
    assert rep.to_csv().splitlines()[0] == "j,intersection,cesaro_partial"
    with pytest.raises(analysis.PeriodGuardError):
        analysis.weak_mixing_statistic(grid_permutation_of(4, 4), quarter(0, 1, 4), quarter(1, 1, 4), 128)


def test_cesaro_brute_force():
    pi = grid_permutation_of(3, 3)
    A, B = quarter(0, 1, 3), quarter(1, 0, 3)
    rep = analysis.weak_mixing_statistic(pi, A, B, 10, guard_fraction=1)
    pre, acc = set(A.tolist()), Fraction(0)
    for j in range(10):
        inter = Fraction(len(pre & set(B.tolist())), 64)
        assert rep.intersections[j] == inter
        acc += (inter - Fraction(1, 16)) ** 2
        assert rep.cesaro[j] == acc / (j + 1)
        pre = {c for c in range(64) if pi(c) in pre}


def test_crofton_weights_reproduce_normals():
    dirs, w = analysis.crofton_directions()
    th = np.array([np.arctan2(q, p) for p, q in dirs])
    for phi in th:
        assert np.isclose((w * np.abs(np.sin(th - phi))).sum(), 2.0)
    assert (w > 0).all()


def test_zero_field_and_rotation():
    zero = analysis.tv_estimate(lambda X, Y: (0 * X, 0 * Y), None, 256)
    assert zero.tv == 0
    e = analysis.rotation_tv(1, 1, 256)
    assert abs(e.tv - 8) < 0.01 * 8 and e.tv_error is not None


def test_tv_refinement_reveals_more():
    raws = [analysis.rotation_tv(Fraction(1, 2), Fraction(1, 4), g).tv_raw for g in (256, 512, 1024)]
    assert raws[0] <= raws[1] <= raws[2] <= 1.25


def test_transposition_tv_bound_k4():
    f = transposition(cell_rect(4, 2, 1), cell_rect(4, 2, 2))
    for e in analysis.flow_phase_estimates(f, 512, 2000):
        assert e.tv - e.tv_error <= 5.0


def test_field_estimate_serialization():
    e = analysis.rotation_tv(1, 1, 128)
    assert json.loads(e.to_json())["name"] == e.name
    assert analysis.FieldEstimate.to_csv([e]).count("\n") == 2


def test_stage_two_l1_and_stage_four_tv():
    speed, _ = analysis.global_field_check(2, g_per_cell=32, samples=10_000)
    assert speed.l1 <= 2 * analysis.C1
    _, tv = analysis.global_field_check(4, g_per_cell=32, samples=2_000)
    assert tv.tv <= 1680
