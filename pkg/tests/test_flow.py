from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from chacon.automorphism import grid_permutation_of
from chacon.configuration import (
    RotateCCW,
    RotateCW,
    Shift,
    ShiftCol,
    SimpleExchange,
    SortColumns,
    SortRows,
    chacon_v_sequence,
    movement_to_cell_permutation,
    sequence_to_cell_permutation,
)
from chacon.dyadic import Dyadic, GridCell, TorusPoint
from chacon.flow import (
    DiscontinuityError,
    Rect,
    TimeOutOfRange,
    building_block,
    cell_rect,
    chacon_schedule,
    endpoint_cells,
    evaluate_flow,
    movement_flow,
    rotate2x2_flow,
    shift_flow,
    sort_flow,
    square_rotation_flow,
    transposition_flow,
    velocity_sample,
)

UNIT = Rect(0, 0, 1, 1)


def P(x, y):
    return TorusPoint.of(x, y)


def test_quarter_turn_of_unit_square():
    assert square_rotation_flow(1, P(1, "1/2"), UNIT) == P("1/2", 1)
    assert square_rotation_flow("1/2", P(1, "1/2"), UNIT) == P(1, 1)
    for t in (0, "1/8", "1/2", 1):
        assert square_rotation_flow(t, P("1/2", "1/2"), UNIT) == P("1/2", "1/2")


@settings(max_examples=60)
@given(st.integers(0, 255), st.integers(0, 255))
def test_quarter_turn_formula(a, b):
    # at t=1 the square turns by 90 degrees about its centre
    p = P(Dyadic(a, 8), Dyadic(b, 8))
    assert square_rotation_flow(1, p, UNIT) == P(1 - p.y, p.x)


def test_transposition_exchanges_squares():
    a, b = cell_rect(4, 2, 1), cell_rect(4, 2, 2)
    p = P("1/16", "9/16")
    assert transposition_flow(1, p, a, b) == P("5/16", "9/16")
    assert transposition_flow(0, p, a, b) == p
    centre = P("1/4", "5/8")
    assert transposition_flow("1/2", centre, a, b) == centre


def test_primitive_endpoints_on_cell_centres():
    k = 8
    for m in [SortColumns(3, 2, 6), SortRows(2, 5, 4), Shift(3), ShiftCol(2),
              RotateCCW(4, 5), RotateCW(8, 1), SimpleExchange(3, 3, 4, 3)]:
        f = movement_flow(m, k)
        assert endpoint_cells(f.endpoint, 3) == list(movement_to_cell_permutation(m, k)), m


def test_named_primitive_wrappers():
    assert endpoint_cells(lambda p: sort_flow(1, p, 1, 2, 4, 4), 2) == list(
        movement_to_cell_permutation(SortColumns(1, 2, 4), 4))
    p = P("1/16", "11/16")
    assert shift_flow(1, p, 2, 4) == P("5/16", "11/16")
    assert endpoint_cells(lambda p: rotate2x2_flow(1, p, 2, 1, 2), 1) == list(
        movement_to_cell_permutation(RotateCCW(2, 1), 2))


def test_building_block_is_v_n():
    for n in range(2, 6):
        want = list(sequence_to_cell_permutation(chacon_v_sequence(n), 2 ** n))
        assert endpoint_cells(building_block(n).endpoint, n) == want
        assert building_block(n).advance(P("1/8", "3/8"), 0, 0) == P("1/8", "3/8")


def test_schedule_endpoints():
    s = chacon_schedule(2)
    half = chacon_schedule(1)
    assert endpoint_cells(lambda p: half.evaluate(Fraction(1, 2), 1, p), 1) == grid_permutation_of(1, 1).forward.tolist()
    assert endpoint_cells(lambda p: s.evaluate(Fraction(1, 4), 1, p), 2) == grid_permutation_of(2, 2).forward.tolist()
    p = P("3/16", "5/16")
    assert evaluate_flow(s, "1/3", "1/3", p) == p


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 4095), st.integers(0, 4095), st.integers(1, 32), st.integers(1, 32))
def test_time_reversal(x, y, a, b):
    s = chacon_schedule(5)
    p = P(Dyadic(x, 12), Dyadic(y, 12))
    t0, t1 = Fraction(a, 32), Fraction(b, 32)
    assert evaluate_flow(s, t1, t0, evaluate_flow(s, t0, t1, p)).wrapped() == p.wrapped()


def test_time_range_enforced():
    s = chacon_schedule(3)
    with pytest.raises(TimeOutOfRange):
        s.evaluate(Fraction(1, 16), 1, P(0, 0))
    with pytest.raises(ValueError):
        chacon_schedule(13)


def test_velocity_samples():
    s = chacon_schedule(4)
    # stage 4 only moves the bottom-right strip; the top-left corner is at rest
    assert velocity_sample(s, Fraction(3, 32), P("1/64", "63/64")) == (0, 0)
    cells = [GridCell(16, 16, c).center() for c in range(13, 17)]
    # middle of the first phase of stage 4, local time u = 16 t - 1
    t = (1 + Fraction(1, 56)) / 16
    speeds = []
    for p in cells:
        vx, vy = velocity_sample(s, t, p)
        speeds.append(float(vx) ** 2 + float(vy) ** 2)
    assert max(speeds) <= 168 ** 2
    assert max(speeds) > 0


def test_velocity_raises_on_interfaces():
    f = movement_flow(Shift(1), 4)
    with pytest.raises(DiscontinuityError):
        f.velocity(Fraction(1, 2), P("1/8", "3/4"))
    vx, vy = f.velocity(Fraction(1, 2), P("1/8", "7/8"))
    assert (vx, vy) == (Dyadic(1, 2), 0)
