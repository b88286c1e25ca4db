from fractions import Fraction

from hypothesis import given, strategies as st

from chacon.chacon1d import Interval, IntervalMap, chacon_1d_build, chacon_1d_column, chacon_1d_map


def test_first_column_and_map():
    col, t1 = chacon_1d_build(0)
    assert col.levels == (Interval(0, Fraction(2, 3)),)
    assert col.spacer == Interval(Fraction(2, 3), Fraction(8, 9))
    # I(1) -> I(2) -> S_0 -> I(3) and I(3) -> I(1)
    assert t1(0) == Fraction(2, 9)
    assert t1(Fraction(2, 9)) == Fraction(2, 3)
    assert t1(Fraction(2, 3)) == Fraction(4, 9)
    assert t1(Fraction(4, 9)) == 0
    assert t1(Fraction(8, 9)) == Fraction(8, 9)


def test_heights_and_spacers():
    hs = [chacon_1d_column(n).height for n in range(6)]
    assert hs == [1, 4, 13, 40, 121, 364]
    assert all(b == 3 * a + 1 for a, b in zip(hs, hs[1:]))
    for n in range(6):
        assert chacon_1d_column(n).spacer.length == Fraction(2, 3 ** (n + 2))


def test_column_levels_are_stacked_by_the_map():
    for n in range(1, 5):
        col = chacon_1d_column(n)
        tn = chacon_1d_map(n)
        for lo, hi in zip(col.levels, col.levels[1:]):
            assert tn(lo.a) == hi.a
            assert tn.offset_at(lo.a) == tn.offset_at(lo.b - Fraction(1, 3 ** 20))


def test_lower_levels_are_kept():
    for n in range(1, 6):
        col, nxt = chacon_1d_build(n)
        assert nxt.disagreement(chacon_1d_map(n), col.levels[:-1]) == []


@given(st.integers(0, 4), st.integers(0, 3 ** 9 - 1))
def test_maps_are_measure_preserving_bijections(n, a):
    t = chacon_1d_map(n)
    # a piecewise translation is a bijection when the images tile the sources
    src = sorted(iv for iv, _ in t.pieces)
    img = sorted(Interval(iv.a + off, iv.b + off) for iv, off in t.pieces)
    assert sum(iv.length for iv in src) == sum(iv.length for iv in img)
    assert {iv.a for iv in src} | {iv.b for iv in src} == {iv.a for iv in img} | {iv.b for iv in img}
    x = Fraction(a, 3 ** 9)
    assert 0 <= t(x) < 1


def test_identity_map():
    assert IntervalMap()(Fraction(1, 7)) == Fraction(1, 7)
