import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cantorgauge import gauge as G
from cantorgauge.catalog import cp_ratio_bounds, make_Cp, make_Cpx, make_middle_thirds
from cantorgauge.core import Address, DomainError, GapTable, NaryPowerGaps
from cantorgauge.hypotheses import (check_assumption_ii, check_assumption_ii_mirror,
                                    check_decreasing_gaps, check_lemma_equivalence, estimate_qr,
                                    export_staircase, proportion_ratios, staircase_profile,
                                    staircase_verdict)
from conftest import failing_table, random_table

ROOT = Address.parse("")


# ---------------------------------------------------------------- decreasing gaps


def test_decreasing_gaps_families():
    assert check_decreasing_gaps(make_Cp(2).spec, 12).verdict == "holds"
    assert check_decreasing_gaps(make_Cpx(2, 3).spec, 10).verdict == "holds"


def test_decreasing_gaps_oracle_cpx():
    # brute force over all pairs of floor-power gaps
    p, x = 2.0, 3.0
    vals = [(2 ** k + l, (math.floor(x ** k) + l) ** -p) for k in range(8) for l in range(2 ** k)]
    ok = all(g1 >= g2 for o1, g1 in vals for o2, g2 in vals if o1 < o2)
    assert ok == (check_decreasing_gaps(make_Cpx(p, x).spec, 7).verdict == "holds")


def test_decreasing_gaps_witness():
    t = GapTable([[[0.1]], [[0.2], [0.05]]], [0.1] * 4)
    rep = check_decreasing_gaps(t, 2)
    assert rep.verdict == "fails"
    assert (tuple(rep.witness["later"]), tuple(rep.witness["earlier"])) == ((1, 0), (0, 0))


def test_decreasing_gaps_checks_leaves():
    t = GapTable([[[0.5]]], [0.1, 0.2])
    assert check_decreasing_gaps(t, 1).verdict == "fails"


def test_binary_only():
    with pytest.raises(DomainError):
        check_decreasing_gaps(NaryPowerGaps(2.0, 3), 3)


# ---------------------------------------------------------------- assumption (ii)


def test_cp2_root_ratio_bracket():
    # |I_1| in [2/16, 2/9], |I_10| in [2/49, 2/36] from the classical length bracket
    lo, hi = proportion_ratios(make_Cp(2).spec, 0, [0], 1)
    assert lo[0] >= (1 + 2 / 49) / (1 + 2 / 9) > 0.5
    assert hi[0] <= (1 + 2 / 36) / (1 + 2 / 16)


def test_cp2_assumption_ii_holds_with_vacuity():
    spec = make_Cp(2).spec
    for check in (check_assumption_ii, check_assumption_ii_mirror):
        rep = check(spec, 8, 12)
        assert rep.verdict == "holds"
        assert rep.details["all_m_certified"]


def test_region_restricts_words():
    spec = make_Cp(2).spec
    full = check_assumption_ii(spec, 6, 4)
    part = check_assumption_ii(spec, 6, 4, region=(0.0, 0.3))
    assert 0 < part.details["checked"] < full.details["checked"]


def test_failing_table_and_mirror():
    t = failing_table()
    rep = check_assumption_ii(t, 1, 1)
    assert rep.verdict == "fails"
    assert rep.witness["word"] == "-" and rep.witness["m"] == 1
    assert rep.witness["ratio_hi"] == pytest.approx(2 / 9, rel=1e-12)
    assert check_assumption_ii_mirror(t, 1, 1).verdict == "fails"


def test_mirror_relation(rng):
    # the mirrored check on a table equals the direct check on its reflection
    for _ in range(20):
        t = random_table(rng, 4, spread=1.0)
        a = check_assumption_ii_mirror(t, 3, 3).verdict
        b = check_assumption_ii(t.mirrored(), 3, 3).verdict
        assert a == b


def test_one_sided_table():
    # right child large relative to its left grandchild, left side fine
    t = GapTable([[[0.1]], [[0.1], [0.1]]], [0.2, 0.3, 0.1, 0.6])
    assert check_assumption_ii(t, 1, 1).verdict == "fails"
    assert check_assumption_ii_mirror(t, 1, 1).verdict == "holds"


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 6))
def test_decreasing_implies_assumption_ii(seed, depth):
    t = random_table(np.random.default_rng(seed), depth, decreasing=True)
    assert check_decreasing_gaps(t, depth).verdict == "holds"
    assert check_assumption_ii(t, depth, 6).verdict == "holds"


def test_failure_witness_reverifies(rng):
    seen = 0
    for _ in range(30):
        t = random_table(rng, 4)
        rep = check_assumption_ii(t, 3, 3)
        if rep.verdict != "fails":
            continue
        seen += 1
        w = rep.witness
        lo, hi = proportion_ratios(t, w["level"], [w["index"]], w["m"])
        assert hi[0] < 2.0 ** -w["m"]
    assert seen > 0


# ---------------------------------------------------------------- staircase


def test_staircase_endpoints():
    pts = staircase_profile(make_Cp(2).spec, Address.parse("01"), 4)
    assert (pts[0].rho, pts[0].lhs, pts[0].rhs_hi) == (0.0, 0, 0.0)
    assert pts[-1].rho == 1.0 and pts[-1].lhs == Fraction(1, 8)
    assert all(a.lhs < b.lhs for a, b in zip(pts, pts[1:]))
    assert all(a.rho_lo <= b.rho_hi for a, b in zip(pts, pts[1:]))


def test_staircase_middle_thirds_point():
    # right endpoint of I_10: rho = (1/3 + 1/9) / (1/3 + 1/3) = 2/3, lhs = nu(I_10) = 1/4
    pts = staircase_profile(make_middle_thirds().spec, ROOT, 1)
    p = pts[1]
    assert p.rho == pytest.approx(2 / 3, rel=1e-14)
    assert p.lhs == Fraction(1, 4)
    assert p.rhs_lo <= 1 / 3 <= p.rhs_hi
    assert staircase_verdict(pts) == "holds"


def test_staircase_failing_table():
    pts = staircase_profile(failing_table(), ROOT, 1)
    assert staircase_verdict(pts) == "fails"
    assert any(float(p.lhs) > p.rhs_hi for p in pts)


def test_staircase_export(tmp_path):
    pts = staircase_profile(make_middle_thirds().spec, ROOT, 2)
    path = tmp_path / "s.txt"
    export_staircase(pts, path)
    data = np.loadtxt(path)
    assert data.shape == (5, 4)
    assert data[0].tolist() == [0, 0, 0, 0]
    assert data[-1, 1] == 0.5


def test_lemma_examples():
    assert tuple(check_lemma_equivalence(make_middle_thirds().spec, ROOT, 6)) == ("holds", "holds", True)
    r = check_lemma_equivalence(failing_table(), ROOT, 6)
    assert (r.verdict_i, r.verdict_ii, r.equivalent) == ("fails", "fails", True)
    assert r.witness_i and r.witness_ii


def test_lemma_equivalence_random_tables(rng):
    verdicts = set()
    for _ in range(60):
        d = int(rng.integers(1, 7))
        t = random_table(rng, d, spread=float(rng.choice([0.5, 1.0, 3.0])))
        r = check_lemma_equivalence(t, ROOT, d - 1, 6)
        assert r.equivalent, (d, r)
        verdicts.add(r.verdict_i)
    assert verdicts == {"holds", "fails"}


def test_lemma_equivalence_inner_words(rng):
    for _ in range(20):
        t = random_table(rng, 6, spread=1.0)
        j = Address.from_index(2, int(rng.integers(0, 4)))
        assert check_lemma_equivalence(t, j, 3).equivalent


def test_lemma_on_family():
    r = check_lemma_equivalence(make_Cp(2).spec, Address.parse("1"), 5)
    assert (r.verdict_i, r.verdict_ii) == ("holds", "holds")


# ---------------------------------------------------------------- q and r


def test_qr_middle_thirds():
    fam = make_middle_thirds()
    qr = estimate_qr(fam.spec, fam.gauge, None, 0.01, 0, 12)
    assert abs(qr.q_hat - 1) < 1e-9 and abs(qr.r_hat - 1) < 1e-9


def test_qr_cp2_subtree_bounds():
    fam = make_Cp(2)
    g = __import__("cantorgauge.core", fromlist=["level_geometry"]).level_geometry(fam.spec, 3)
    for l in range(8):
        region = (g.left_lo[l], g.right_hi[l])
        qr = estimate_qr(fam.spec, fam.gauge, region, 0.0, 3, 10)
        q, r = cp_ratio_bounds(3, l, 2)
        assert qr.q_hat >= q and qr.r_hat <= r


def test_qr_cp2_root_limits():
    fam = make_Cp(2)
    qr = estimate_qr(fam.spec, fam.gauge, None, 0.01, 4, 12)
    assert qr.r_hat == pytest.approx(math.sqrt(2), rel=1e-3)
    assert qr.q_hat == pytest.approx(math.sqrt(2) / 2, rel=1e-3)
    assert [row["level"] for row in qr.per_level] == list(range(4, 13))


def test_qr_monotone_in_range():
    fam = make_Cp(2)
    narrow = estimate_qr(fam.spec, fam.gauge, None, 0.01, 6, 8)
    wide = estimate_qr(fam.spec, fam.gauge, None, 0.01, 4, 10)
    assert wide.q_hat <= narrow.q_hat and wide.r_hat >= narrow.r_hat


def test_qr_empty_region():
    fam = make_Cp(2)
    with pytest.raises(DomainError):
        estimate_qr(fam.spec, fam.gauge, (5.0, 6.0), 0.01, 2, 4)


def test_exact_tie_is_indeterminate():
    # mirrored ratio at the root is (0.1 + 0.3) / (0.1 + 0.7) = 1/2 exactly
    t = GapTable([[[0.1]], [[0.1], [0.1]]], [0.3, 0.3, 0.1, 0.6])
    rep = check_assumption_ii_mirror(t, 1, 1)
    assert rep.verdict == "indeterminate"
    assert rep.details["undecided"] == [{"word": "-", "m": 1}]
