import itertools

import pytest
from hypothesis import given, strategies as st

from chacon.configuration import (
    Configuration,
    InvalidMovement,
    RotateCCW,
    RotateCW,
    Shift,
    ShiftCol,
    SimpleExchange,
    SortColumns,
    SortRows,
    apply_movement,
    apply_sequence,
    chacon_v_sequence,
    inverse_sequence,
    movement_displacements,
    movement_to_cell_permutation,
    parse_movement,
)
from chacon.dyadic import Dyadic

G4 = Configuration.identity(4)


def test_sort_columns_example():
    out = apply_movement(G4, SortColumns(1, 2, 4))
    assert out.to_list() == [[1, 4, 2, 3], [5, 6, 7, 8], [9, 10, 11, 12], [13, 14, 15, 16]]


def test_rotate_ccw_example():
    out = apply_movement(G4, RotateCCW(2, 3))
    assert out.to_list() == [[1, 2, 4, 8], [5, 6, 3, 7], [9, 10, 11, 12], [13, 14, 15, 16]]


def test_rotate_cells_read_off_identity():
    # labels of the identity configuration tell where each cell went
    out = apply_movement(G4, RotateCCW(3, 2))
    where = {G4.position(v): out.position(v) for v in range(1, 17)}
    assert where[(2, 2)] == (3, 2)
    assert where[(3, 2)] == (3, 3)
    assert where[(3, 3)] == (2, 3)
    assert where[(2, 3)] == (2, 2)
    assert sum(a != b for a, b in where.items()) == 4


def test_shift_and_exchange():
    out = apply_movement(G4, Shift(2))
    assert out.to_list()[1] == [8, 5, 6, 7]
    assert apply_movement(G4, ShiftCol(1)).to_list()[0][0] == 13
    swap = SimpleExchange(2, 1, 3, 1)
    assert apply_movement(apply_movement(G4, swap), swap) == G4
    assert movement_to_cell_permutation(swap, 4)[4] == 8
    d = movement_displacements(Shift(2), 4)
    assert d[(2, 1)] == (Dyadic(1, 2), Dyadic(0))


def test_invalid_movements():
    with pytest.raises(InvalidMovement):
        SimpleExchange(1, 1, 2, 2).cell_map(4)
    with pytest.raises(InvalidMovement):
        RotateCCW(1, 1).cell_map(4)
    with pytest.raises(InvalidMovement):
        SortColumns(1, 3, 2).cell_map(4)
    with pytest.raises(ValueError):
        Configuration([[1, 1], [2, 3]])


def _moves(n):
    out = [SimpleExchange(1, 1, 1, 2), SimpleExchange(1, 2, 2, 2), SortColumns(2, 1, 2), SortRows(1, 2, 1),
           Shift(1), Shift(2), ShiftCol(2), RotateCCW(2, 1), RotateCW(2, 1)]
    return [m for m in out if m.cell_map(n) is not None]


def test_inverse_on_every_two_by_two_configuration():
    moves = _moves(2)
    for perm in itertools.permutations(range(1, 5)):
        gamma = Configuration([list(perm[:2]), list(perm[2:])])
        for seq in itertools.product(moves, repeat=2):
            assert apply_sequence(apply_sequence(gamma, seq), inverse_sequence(seq, 2)) == gamma
    assert apply_sequence(G4, []) == G4


movement_4 = st.one_of(
    st.builds(SortColumns, st.integers(1, 4), st.just(1), st.integers(2, 4)),
    st.builds(SortRows, st.just(1), st.integers(2, 4), st.integers(1, 4)),
    st.builds(Shift, st.integers(1, 4)),
    st.builds(ShiftCol, st.integers(1, 4)),
    st.builds(RotateCCW, st.integers(2, 4), st.integers(1, 3)),
    st.builds(RotateCW, st.integers(2, 4), st.integers(1, 3)),
    st.builds(lambda i, j: SimpleExchange(i, j, i, j + 1), st.integers(1, 4), st.integers(1, 3)),
)


@given(st.lists(movement_4, max_size=6), st.permutations(list(range(1, 17))))
def test_sequences_are_invertible(seq, labels):
    gamma = Configuration([labels[r * 4:(r + 1) * 4] for r in range(4)])
    for m in seq:
        assert sorted(movement_to_cell_permutation(m, 4)) == list(range(16))
    assert apply_sequence(apply_sequence(gamma, seq), inverse_sequence(seq, 4)) == gamma


@given(movement_4)
def test_parse_round_trip(m):
    assert parse_movement(str(m)) == m


def test_v_sequence_shape():
    seq = chacon_v_sequence(3)
    assert len(seq) == 7
    idx = {v for m in seq for v in vars(m).values()}
    assert {8, 5, 6, 7} <= idx
    assert [str(m) for m in chacon_v_sequence(2)] == [
        "S_c(4;1,3)", "R-(4,1)", "S_c(3;1,4)", "S_c(3;1,4)", "R+(4,1)", "R+(4,1)", "E_s(4,1;4,2)"]
    with pytest.raises(ValueError):
        chacon_v_sequence(1)


def test_json_round_trip():
    g = apply_movement(G4, RotateCW(4, 2))
    assert Configuration.from_json(g.to_json()) == g
