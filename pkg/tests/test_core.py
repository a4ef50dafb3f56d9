from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cantorgauge.core import (Address, DomainError, GapTable, MiddleThirdsGaps, PowerGaps,
                              UnsupportedRigorError, cantor_measure, dump_gap_table, gap_length,
                              global_gap_order, interval_geometry, level_geometry,
                              load_gap_table, near_basic_interval, subtree_lengths)
from conftest import random_table


# ---------------------------------------------------------------- addresses


def test_address_integer_form():
    a = Address.parse("101")
    assert (a.level, a.index) == (3, 5)
    assert Address.from_index(3, 5) == a
    assert str(Address.parse("-")) == "-"
    assert Address.parse("").level == 0


@given(st.integers(0, 12).flatmap(lambda k: st.tuples(st.just(k), st.integers(0, 2 ** k - 1))))
def test_address_roundtrip(kl):
    k, l = kl
    a = Address.from_index(k, l)
    assert (a.level, a.index) == (k, l)
    assert Address.parse(str(a)) == a


def test_address_children_and_prefix():
    j = Address.parse("01")
    assert j.child(1, 0) == Address.parse("0110")
    assert j.child(0).parent == j
    assert j.is_prefix_of(Address.parse("0111"))
    assert not j.is_prefix_of(Address.parse("1"))
    with pytest.raises(DomainError):
        Address.parse("").parent


def test_address_rejects_bad_symbols():
    with pytest.raises(DomainError):
        Address((0, 2))
    with pytest.raises(DomainError):
        Address.from_index(2, 4)
    assert Address((0, 2), n=3).index == 2


# ---------------------------------------------------------------- gaps


def test_power_gap_values():
    spec = PowerGaps(2.0)
    assert gap_length(spec, Address.from_index(3, 5)) == pytest.approx(1 / 169, rel=1e-15)
    assert gap_length(spec, Address.parse("")) == 1.0


def test_power_gap_bounds_contain_exact_rational():
    spec = PowerGaps(2.0)
    lo, hi = spec.gap_bounds(4, np.arange(16))
    for l in range(16):
        exact = Fraction(1, (16 + l) ** 2)
        assert Fraction(lo[l, 0]) <= exact <= Fraction(hi[l, 0])


def test_gap_order():
    assert global_gap_order(0, 0) == 1
    assert global_gap_order(3, 5) == 13


def test_table_level_limits():
    t = GapTable([[[0.5]]], [0.25, 0.25])
    with pytest.raises(DomainError):
        t.gap_values(1)
    with pytest.raises(DomainError):
        t.check_level(2)


def test_table_without_leaves_is_not_rigorous():
    t = GapTable([[[0.5]]])
    with pytest.raises(UnsupportedRigorError):
        level_geometry(t, 1)
    g = level_geometry(t, 1, rigorous=False)
    assert g.length_lo.tolist() == [0.0, 0.0]


def test_table_file_roundtrip(tmp_path, rng):
    t = random_table(rng, 3)
    path = tmp_path / "t.gaps"
    dump_gap_table(t, path)
    back = load_gap_table(path)
    assert back.max_level == 3
    for a, b in zip(t.levels, back.levels):
        assert np.array_equal(a, b)
    assert np.array_equal(t.leaves, back.leaves)


def test_table_file_errors(tmp_path):
    p = tmp_path / "bad.gaps"
    p.write_text("cantor-gaps n=2\n- 0 0.5\n0 L 0.2\n")
    with pytest.raises(DomainError):
        load_gap_table(p)
    p.write_text("cantor-gaps n=2\n- 0 -0.5\n")
    with pytest.raises(DomainError):
        load_gap_table(p)


def test_mirrored_table_reverses_geometry(rng):
    t = random_table(rng, 3)
    g = level_geometry(t, 3)
    gm = level_geometry(t.mirrored(), 3)
    assert np.allclose(g.length_lo[::-1], gm.length_lo, rtol=1e-14)
    assert np.allclose(g.between_lo[::-1], gm.between_lo, rtol=1e-14)


# ---------------------------------------------------------------- geometry


def test_middle_thirds_geometry_exact():
    g = level_geometry(MiddleThirdsGaps(), 3)
    assert np.allclose(g.length_lo, 1 / 27, rtol=1e-14)
    assert np.allclose(g.length_hi, 1 / 27, rtol=1e-14)
    # left endpoints are the base-3 numbers with digits 0 and 2
    expect = [sum(2 * int(c) * 3.0 ** -(i + 1) for i, c in enumerate(f"{l:03b}")) for l in range(8)]
    assert np.allclose(g.left_lo, expect, atol=1e-15)


def test_toy_table_geometry():
    t = GapTable([[[0.5]]], [0.25, 0.25])
    g = level_geometry(t, 1)
    assert g.left_lo.tolist() == [0.0, 0.75]
    assert g.length_hi.tolist() == [0.25, 0.25]
    assert g.between_lo.tolist() == [0.5]


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 5))
def test_tiling_is_contiguous(seed, depth):
    # left[i+1] = left[i] + |I_i| + gap between, within the brackets
    t = random_table(np.random.default_rng(seed), depth)
    g = level_geometry(t, depth)
    nxt_lo = g.left_lo[:-1] + g.length_lo[:-1] + g.between_lo
    nxt_hi = g.left_hi[:-1] + g.length_hi[:-1] + g.between_hi
    assert np.all(nxt_lo <= g.left_hi[1:] * (1 + 1e-14))
    assert np.all(nxt_hi >= g.left_lo[1:] * (1 - 1e-14))
    total = g.right_hi[-1] - g.left_lo[0]
    assert subtree_lengths(t, 0, [0])[1][0] == pytest.approx(total, rel=1e-13)


def test_brackets_ordered_and_narrow():
    g = level_geometry(PowerGaps(2.0), 10)
    assert np.all(g.length_lo <= g.length_hi)
    assert np.all(g.left_lo <= g.left_hi)
    assert np.max((g.length_hi - g.length_lo) / g.length_hi) < 1e-3


def test_deeper_truncation_narrows_bracket():
    spec = PowerGaps(2.0)
    lo4, hi4 = subtree_lengths(spec, 3, [2], 4)
    lo8, hi8 = subtree_lengths(spec, 3, [2], 8)
    assert lo4[0] <= lo8[0] <= hi8[0] <= hi4[0]
    assert hi8[0] - lo8[0] < hi4[0] - lo4[0]


def test_interval_geometry_matches_level_geometry():
    spec = PowerGaps(1.5)
    g = level_geometry(spec, 6)
    for l in (0, 17, 63):
        iv = interval_geometry(spec, Address.from_index(6, l))
        assert iv.length_lo == pytest.approx(g.length_lo[l], rel=1e-14)
        assert iv.left_lo <= g.left_hi[l] and g.left_lo[l] <= iv.left_hi


def test_near_basic_interval():
    spec = MiddleThirdsGaps()
    iv = near_basic_interval(spec, Address.parse("01"), Address.parse("10"))
    assert iv.length == pytest.approx(1 / 9 + 1 / 3 + 1 / 9, rel=1e-14)
    assert iv.left_lo == pytest.approx(2 / 9, rel=1e-14)
    single = near_basic_interval(spec, Address.parse("1"), Address.parse("1"))
    assert single.length == pytest.approx(1 / 3)
    with pytest.raises(DomainError):
        near_basic_interval(spec, Address.parse("1"), Address.parse("0"))


def test_depth_cap():
    spec = PowerGaps(2.0, depth_cap=8)
    with pytest.raises(DomainError):
        level_geometry(spec, 9)


# ---------------------------------------------------------------- Cantor measure


def test_measure_of_a_level_is_one():
    for k in range(6):
        assert cantor_measure([Address.from_index(k, l) for l in range(2 ** k)]) == 1


def test_measure_children_split_exactly():
    j = Address.parse("0110")
    assert cantor_measure([j.child(0)]) + cantor_measure([j.child(1)]) == cantor_measure([j])
    assert cantor_measure([Address.parse("10")]) == Fraction(1, 4)


def test_measure_drops_nested_addresses():
    assert cantor_measure([Address.parse("0"), Address.parse("01"), Address.parse("1")]) == 1


@given(st.lists(st.integers(0, 2 ** 8 - 1), unique=True))
def test_measure_counts_disjoint_intervals(idx):
    assert cantor_measure([Address.from_index(8, l) for l in idx]) == Fraction(len(idx), 256)


def test_measure_nary():
    assert cantor_measure([Address((1,), n=3), Address((2, 0), n=3)]) == Fraction(4, 9)
