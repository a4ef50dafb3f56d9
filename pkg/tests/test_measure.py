import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cantorgauge import gauge as G
from cantorgauge.catalog import cp_ratio_bounds, make_Cp, make_Cpx, make_middle_thirds
from cantorgauge.core import Address, DomainError, GapTable, level_geometry
from cantorgauge.hypotheses import QRBounds, check_assumption_ii, estimate_qr
from cantorgauge.measure import (TheoremNotApplicable, check_contraction, dp_optimal_cover,
                                 example_convergence_series, export_series, mdp_lower_bound,
                                 nu_bracket, thm1_bounds, thm2_bounds, uniform_cover_sum)
from conftest import brute_force_cover, failing_table, random_table

MT = make_middle_thirds()
CP2 = make_Cp(2)
TOY = GapTable([[[0.5]]], [0.25, 0.25])
SQRT = G.power(0.5)


def holds(name):
    return G.ConditionReport(name, "holds")


GOOD = [holds("condition_i"), holds("assumption_ii")]


# ---------------------------------------------------------------- uniform covers


def test_uniform_toy():
    e = uniform_cover_sum(TOY, SQRT, None, 1)
    assert e.value_lo <= 1.0 <= e.value_hi and e.value_hi - e.value_lo < 1e-14


def test_uniform_middle_thirds_is_one():
    for k in (0, 3, 9):
        e = uniform_cover_sum(MT.spec, MT.gauge, None, k)
        assert e.value_lo <= 1 <= e.value_hi and e.value_hi - e.value_lo < 1e-12


def test_uniform_interval_region():
    e = uniform_cover_sum(MT.spec, MT.gauge, (0.0, 1 / 3), 6)
    assert e.value_lo == pytest.approx(0.5, rel=1e-12)
    assert e.details["intervals"] == 32


def test_uniform_region_straddling():
    # a cut through one level-4 interval: certain and possible counts differ
    g = level_geometry(MT.spec, 4)
    cut = 0.5 * (g.left_lo[3] + g.right_hi[3])
    e = uniform_cover_sum(MT.spec, MT.gauge, (0.0, cut), 4)
    assert e.value_lo < e.value_hi
    assert e.value_hi == pytest.approx(4 / 16, rel=1e-12)


def test_nu_bracket():
    assert nu_bracket(MT.spec, None) == (1, 1)
    assert nu_bracket(MT.spec, Address.parse("01")) == (Fraction(1, 4), Fraction(1, 4))
    lo, hi = nu_bracket(MT.spec, (0.0, 0.5), level=6)
    assert lo == hi == Fraction(1, 2)


def test_convergence_series_cp2():
    series = example_convergence_series(CP2, range(4, 15))
    mids = [e.midpoint for e in series]
    # the Riemann sums decrease toward sqrt(2) log 2
    assert all(a > b for a, b in zip(mids, mids[1:]))
    assert series[-1].value_lo > CP2.closed_form
    assert abs(mids[-1] - CP2.closed_form) / CP2.closed_form < 1e-4


def test_export_series(tmp_path):
    path = tmp_path / "c.txt"
    export_series(example_convergence_series(MT, range(2, 5)), path)
    data = np.loadtxt(path)
    assert data.shape == (3, 3) and data[:, 0].tolist() == [2, 3, 4]


# ---------------------------------------------------------------- optimal covers


def test_dp_toy():
    e, sol = dp_optimal_cover(TOY, SQRT, None, 1)
    assert e.value_lo == pytest.approx(1.0) and e.value_hi == pytest.approx(1.0)
    assert sol.spans in ([(Address.parse("0"), Address.parse("1"))],
                         [(Address.parse("0"), Address.parse("0")), (Address.parse("1"), Address.parse("1"))])


@pytest.mark.parametrize("depth", [1, 2, 3, 4])
@pytest.mark.parametrize("h", [G.power(0.5), G.weighted_power(0.5), G.power(0.9)],
                         ids=["power", "wpower", "power0.9"])
def test_dp_matches_brute_force(rng, depth, h):
    for _ in range(3 if depth == 4 else 6):
        t = random_table(rng, depth, spread=1.0)
        e, sol = dp_optimal_cover(t, h, None, depth)
        g = level_geometry(t, depth)
        best, _ = brute_force_cover(g.length_lo.tolist(), g.between_lo.tolist(), g.left_lo.tolist(), h)
        assert e.value_lo * (1 - 1e-12) <= best <= e.value_hi * (1 + 1e-12)


def test_dp_witness_is_a_partition(rng):
    t = random_table(rng, 5, spread=2.0)
    e, sol = dp_optimal_cover(t, SQRT, None, 5)
    covered = []
    for a, b in sol.spans:
        assert a.level == b.level == 5 and a.index <= b.index
        covered.extend(range(a.index, b.index + 1))
    assert covered == list(range(32))
    assert sol.cost_hi == e.value_hi


def test_dp_below_uniform_and_nonincreasing():
    prev = math.inf
    for d in range(1, 11):
        dp, _ = dp_optimal_cover(CP2.spec, CP2.gauge, None, d)
        un = uniform_cover_sum(CP2.spec, CP2.gauge, None, d)
        assert dp.value_lo <= un.value_hi
        assert dp.value_lo <= prev
        prev = dp.value_hi


def test_dp_snaps_region():
    g = level_geometry(MT.spec, 4)
    cut = 0.5 * (g.left_lo[3] + g.right_hi[3])
    e, sol = dp_optimal_cover(MT.spec, MT.gauge, (0.0, cut), 4)
    snap = e.details["snap"]
    assert snap["snapped_mass"] == "1/16"
    assert snap["snapped_region"][1] >= cut
    assert e.details["max_span_diameter"] > 0


def test_dp_size_limit():
    with pytest.raises(DomainError):
        dp_optimal_cover(CP2.spec, CP2.gauge, None, 16)


def test_dp_custom_gauge_uses_generic_path(rng):
    h = G.custom(lambda w, d: (1.5 + np.cos(w)) * d ** 0.5)
    t = random_table(rng, 3, spread=1.0)
    e, _ = dp_optimal_cover(t, h, None, 3)
    g = level_geometry(t, 3)
    best, _ = brute_force_cover(g.length_lo.tolist(), g.between_lo.tolist(), g.left_lo.tolist(), h)
    assert e.value_lo * (1 - 1e-9) <= best <= e.value_hi * (1 + 1e-9)


# ---------------------------------------------------------------- bounds


def test_mdp_lower():
    assert mdp_lower_bound(MT.spec, MT.gauge, None, 1.0).value_lo == pytest.approx(1.0)
    q = math.sqrt(2) / 2
    assert mdp_lower_bound(CP2.spec, CP2.gauge, None, q).value_lo == pytest.approx(q)
    assert mdp_lower_bound(CP2.spec, CP2.gauge, Address.parse("0"), q).value_lo == pytest.approx(q / 2)
    e = mdp_lower_bound(CP2.spec, CP2.gauge, None, 0.0)
    assert e.value_hi == 0 and "degenerate" in e.details["warning"]


def test_thm2_middle_thirds_collapses():
    qr = estimate_qr(MT.spec, MT.gauge, None, 0.01, 1, 10)
    e = thm2_bounds(MT.spec, MT.gauge, None, 0.01, qr, GOOD)
    assert abs(e.value_lo - 1) < 1e-9 and abs(e.value_hi - 1) < 1e-9


def test_thm2_clamps_to_zero():
    e = thm2_bounds(MT.spec, MT.gauge, None, 0.01, QRBounds.from_constants(0.4, 1.0), GOOD)
    assert e.value_lo == 0 and e.value_hi == pytest.approx(1.0)
    assert e.details["clamped"]


def test_thm2_mirror_route():
    reps = [holds("condition_i_mirror"), holds("assumption_ii_mirror")]
    e = thm2_bounds(MT.spec, MT.gauge, None, 0.01, QRBounds.from_constants(1, 1), reps)
    assert e.details["route"] == ["condition_i_mirror", "assumption_ii_mirror"]


def test_thm2_refuses_failing_hypothesis():
    rep = check_assumption_ii(failing_table(), 1, 1)
    with pytest.raises(TheoremNotApplicable) as exc:
        thm2_bounds(failing_table(), SQRT, None, 0.01, QRBounds.from_constants(0.5, 1.0),
                    [holds("condition_i"), rep])
    assert exc.value.hypothesis == "assumption_ii"
    with pytest.raises(TheoremNotApplicable):
        thm2_bounds(MT.spec, MT.gauge, None, 0.01, QRBounds.from_constants(1, 1), [holds("condition_i")])


def test_thm2_cp2_subtree_assembly():
    # bracket midpoints are q_l 2^-k, so their sum is the right-endpoint Riemann
    # sum of sqrt(2) / (1 + x); the brackets themselves contain the closed form
    k = 6
    lo_sum = hi_sum = mid_sum = 0.0
    for l in range(2 ** k):
        q, r = cp_ratio_bounds(k, l, 2)
        e = thm2_bounds(CP2.spec, CP2.gauge, Address.from_index(k, l), 0.01,
                        QRBounds.from_constants(q, r), GOOD)
        lo_sum += e.value_lo
        hi_sum += e.value_hi
        mid_sum += e.midpoint
    assert lo_sum <= CP2.closed_form <= hi_sum
    riemann = math.sqrt(2) * sum(1 / (1 + (l + 1) / 2 ** k) for l in range(2 ** k)) / 2 ** k
    assert mid_sum == pytest.approx(riemann, rel=1e-12)


def test_thm1_middle_thirds():
    D, _ = G.check_doubling(MT.gauge, G.default_doubling_samples())
    e = thm1_bounds(MT.spec, MT.gauge, None, 1.0, 1.0, D)
    assert e.value_lo == pytest.approx(1 / (2 * D * D), rel=1e-12)
    assert e.value_lo == pytest.approx(0.208503, rel=1e-5)
    assert e.value_hi == pytest.approx(1.0)


def test_contraction():
    assert check_contraction(MT.spec, 8)[0] == "holds"
    t = GapTable([[[0.1]]], [0.6, 0.3])
    verdict, witness = check_contraction(t, 3)
    assert verdict == "fails" and witness["word"] == "-"
    with pytest.raises(TheoremNotApplicable):
        thm1_bounds(t, SQRT, None, 0.5, 1.0, 1.5)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 6), st.integers(0, 2 ** 32 - 1))
def test_sandwich_cp2_subtrees(k, seed):
    l = int(np.random.default_rng(seed).integers(0, 2 ** k))
    j = Address.from_index(k, l)
    q, r = cp_ratio_bounds(k, l, 2)
    low = mdp_lower_bound(CP2.spec, CP2.gauge, j, q)
    for d in (k + 1, k + 4, 10):
        dp, _ = dp_optimal_cover(CP2.spec, CP2.gauge, j, d)
        un = uniform_cover_sum(CP2.spec, CP2.gauge, j, d)
        assert low.value_hi <= dp.value_lo <= un.value_hi
        assert un.value_lo <= r * 2.0 ** -k


def test_cpx_series_approaches_closed_form():
    fam = make_Cpx(2, 3)
    e = example_convergence_series(fam, [10])[0]
    assert abs(e.midpoint - fam.closed_form) / fam.closed_form < 0.01


def test_estimate_serializes():
    import json
    e, sol = dp_optimal_cover(MT.spec, MT.gauge, (0.0, 0.5), 4)
    json.dumps(e.to_dict())
    json.dumps(sol.to_dict())
