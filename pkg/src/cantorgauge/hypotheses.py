"""Set-side hypotheses: gap ordering, the left-proportion condition, staircase, q/r constants.

All checks are finite certificates over a word range.  Comparisons use the
length brackets from :mod:`core`, so a verdict is ``holds`` or ``fails``
only when the bracket decides it; otherwise it is ``indeterminate`` and the
caller may retry with a deeper truncation.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .core import (DEFAULT_TRUNCATION, Address, DomainError, GapSpec, GapTable,
                   level_geometry, subtree_lengths)
from .gauge import ConditionReport, GaugeFunction, _jsonable, combine_verdicts, dilate
from .kernels import U, add_down, add_up

# levels beyond this lose integer exactness in the float gap formulas
_MAX_LEVEL = 52


def _require_binary(spec):
    if spec.n != 2:
        raise DomainError("set-side theorem checks are implemented for binary sets only")


def _gap_levels(spec, max_level):
    top = max_level if spec.max_level is None else min(max_level, spec.max_level - 1)
    return range(top + 1)


def check_decreasing_gaps(spec: GapSpec, max_level: int = 12) -> ConditionReport:
    """Gaps nonincreasing in the global order ``2^k + l`` up to ``max_level``.

    A sequence is nonincreasing iff every consecutive pair is, so the scan is
    linear.  For finite tables the leaf lengths must also be nonincreasing
    left to right; the interval-ordering argument needs it.
    """
    _require_binary(spec)
    vals, keys = [], []
    for k in _gap_levels(spec, max_level):
        g = spec.gap_values(k)[:, 0]
        vals.append(g)
        keys.append(np.stack([np.full(g.size, k), np.arange(g.size)], axis=1))
    v = np.concatenate(vals)
    key = np.concatenate(keys)
    tol = 4 * U
    later, earlier = v[1:], v[:-1]
    bad = later > earlier * (1 + tol)
    close = (later > earlier) & ~bad
    if bad.any():
        i = int(np.argmax(bad))
        witness = {"later": [int(x) for x in key[i + 1]], "earlier": [int(x) for x in key[i]],
                   "later_length": float(v[i + 1]), "earlier_length": float(v[i])}
        return ConditionReport("decreasing_gaps", "fails", witness, None,
                               {"max_level": max_level, "gaps": int(v.size)})
    if isinstance(spec, GapTable) and spec.leaves is not None:
        leaves = spec.leaves
        lbad = leaves[1:] > leaves[:-1] * (1 + tol)
        if lbad.any():
            i = int(np.argmax(lbad))
            D = spec.max_level
            witness = {"later_leaf": [D, i + 1], "earlier_leaf": [D, i],
                       "later_length": float(leaves[i + 1]), "earlier_length": float(leaves[i])}
            return ConditionReport("decreasing_gaps", "fails", witness, None,
                                   {"max_level": max_level, "gaps": int(v.size)})
    verdict = "indeterminate" if close.any() else "holds"
    return ConditionReport("decreasing_gaps", verdict, None, None,
                           {"max_level": max_level, "gaps": int(v.size)})


# ---------------------------------------------------------------- assumption (ii)


def _words_in_region(spec, k, region, eps, depth):
    n_words = spec.n ** k
    if region is None:
        return np.arange(n_words, dtype=np.int64)
    a, b = dilate(region, eps)
    g = level_geometry(spec, k, depth)
    inside = (g.left_lo >= a) & (g.right_hi <= b)
    return np.nonzero(inside)[0].astype(np.int64)


def _ratio_bracket(g_lo, g_hi, num_lo, num_hi, den_lo, den_hi):
    n_lo = add_down(g_lo, num_lo)
    n_hi = add_up(g_hi, num_hi)
    d_lo = add_down(g_lo, den_lo)
    d_hi = add_up(g_hi, den_hi)
    return n_lo / d_hi * (1 - 2 * U), n_hi / d_lo * (1 + 2 * U)


def proportion_ratios(spec, k, idx, m, depth=DEFAULT_TRUNCATION, mirror=False):
    """Brackets of ``|G_j ∪ I_{j10^m}| / |G_j ∪ I_{j1}|`` for the words ``idx`` at level ``k``.

    The mirrored form uses ``|G_j ∪ I_{j01^m}| / |G_j ∪ I_{j0}|``.
    """
    idx = np.asarray(idx, dtype=np.int64)
    g_lo, g_hi = spec.gap_bounds(k, idx)
    g_lo, g_hi = g_lo[:, 0], g_hi[:, 0]
    if mirror:
        near = 2 * idx
        far = (2 * idx + 1) * 2 ** m - 1
    else:
        near = 2 * idx + 1
        far = (2 * idx + 1) * 2 ** m
    den_lo, den_hi = subtree_lengths(spec, k + 1, near, depth)
    num_lo, num_hi = subtree_lengths(spec, k + 1 + m, far, depth)
    return _ratio_bracket(g_lo, g_hi, num_lo, num_hi, den_lo, den_hi)


def _m_limit(spec, k, max_m, depth):
    if spec.max_level is not None:
        return min(max_m, spec.max_level - k - 1)
    return min(max_m, _MAX_LEVEL - k - 1 - depth)


def _vacuity(spec, k, idx, depth, mirror):
    # ratio >= |G| / |G ∪ I_near|, so every m with 2^-m below that is automatic
    g_lo, g_hi = spec.gap_bounds(k, idx)
    near = 2 * idx if mirror else 2 * idx + 1
    d_lo, d_hi = subtree_lengths(spec, k + 1, near, depth)
    total = add_up(g_hi[:, 0], d_hi)
    return np.ceil(np.log2(total / g_lo[:, 0]) + 1e-12).astype(int)


def _check_ii(spec, max_word_len, max_m, region, eps, depth, mirror):
    _require_binary(spec)
    name = "assumption_ii_mirror" if mirror else "assumption_ii"
    failures, undecided = [], []
    checked = 0
    vac_max = 0
    levels = list(_gap_levels(spec, max_word_len))
    for k in levels:
        idx = _words_in_region(spec, k, region, eps, depth)
        if idx.size == 0:
            continue
        vac_max = max(vac_max, int(_vacuity(spec, k, idx, depth, mirror).max()))
        # m = 0 compares I_{j1} with itself: holds identically
        for m in range(1, _m_limit(spec, k, max_m, depth) + 1):
            lo, hi = proportion_ratios(spec, k, idx, m, depth, mirror)
            target = 2.0 ** -m
            checked += idx.size
            fail = hi < target
            und = ~fail & (lo < target)
            if fail.any():
                i = int(np.argmax(fail))
                failures.append((k, int(idx[i]), m, float(lo[i]), float(hi[i])))
            if und.any():
                for i in np.nonzero(und)[0][:8]:
                    undecided.append((k, int(idx[i]), m))
    grid = {"max_word_len": max_word_len, "max_m": max_m, "eps": eps, "region": region,
            "truncation_depth": depth}
    details = {"checked": checked, "vacuity_m": vac_max,
               "all_m_certified": bool(max_m >= vac_max and not undecided)}
    if failures:
        k, l, m, lo, hi = min(failures)
        witness = {"word": str(Address.from_index(k, l)), "level": k, "index": l, "m": m,
                   "ratio_lo": lo, "ratio_hi": hi, "target": 2.0 ** -m}
        return ConditionReport(name, "fails", witness, None, grid, details)
    if undecided:
        details["undecided"] = [{"word": str(Address.from_index(k, l)), "m": m}
                                for k, l, m in sorted(undecided)[:16]]
        return ConditionReport(name, "indeterminate", None, None, grid, details)
    return ConditionReport(name, "holds", None, None, grid, details)


def check_assumption_ii(spec: GapSpec, max_word_len: int = 10, max_m: int = 20, region=None,
                        eps: float = 0.01, depth: int = DEFAULT_TRUNCATION) -> ConditionReport:
    """``2^-m <= |G_j ∪ I_{j10^m}| / |G_j ∪ I_{j1}|`` for words up to ``max_word_len``.

    Only words with ``I_j`` inside ``(1 + eps) * region`` are checked.  Since
    the ratio is at least ``|G_j| / |G_j ∪ I_{j1}|``, every ``m`` at or above
    ``details["vacuity_m"]`` holds automatically; ``all_m_certified`` is set
    when ``max_m`` reaches it.
    """
    return _check_ii(spec, max_word_len, max_m, region, eps, depth, False)


def check_assumption_ii_mirror(spec: GapSpec, max_word_len: int = 10, max_m: int = 20,
                               region=None, eps: float = 0.01,
                               depth: int = DEFAULT_TRUNCATION) -> ConditionReport:
    """Mirror image: ``2^-m <= |G_j ∪ I_{j01^m}| / |G_j ∪ I_{j0}|``."""
    return _check_ii(spec, max_word_len, max_m, region, eps, depth, True)


# ---------------------------------------------------------------- staircase


@dataclass
class StaircasePoint:
    rho: float
    rho_lo: float
    rho_hi: float
    lhs: Fraction
    rhs_lo: float
    rhs_hi: float

    @property
    def verdict(self):
        if self.lhs <= Fraction(self.rhs_lo):
            return "holds"
        if self.lhs > Fraction(self.rhs_hi):
            return "fails"
        return "indeterminate"


def _between_in_subtree(spec, L, first, count):
    """Gap brackets between consecutive level-L intervals ``first .. first+count-1``."""
    r = np.arange(1, count, dtype=np.int64)
    glob = first + r
    tz = np.zeros(r.size, dtype=np.int64)
    x = glob.copy()
    while True:
        even = (x & 1) == 0
        if not even.any():
            break
        tz[even] += 1
        x[even] >>= 1
    lo = np.empty(r.size)
    hi = np.empty(r.size)
    for v in np.unique(tz):
        sel = tz == v
        lev = L - 1 - int(v)
        parent = glob[sel] >> (int(v) + 1)
        g_lo, g_hi = spec.gap_bounds(lev, parent)
        lo[sel] = g_lo[:, 0]
        hi[sel] = g_hi[:, 0]
    return lo, hi


def staircase_profile(spec: GapSpec, j: Address, depth: int = 6,
                      truncation: int = DEFAULT_TRUNCATION) -> list:
    """Breakpoints of ``rho -> nu(rho ._L (G_j ∪ I_{j1}))`` against ``rho * nu(I_{j1})``.

    The left side is a nondecreasing step function, flat across gaps, so
    the inequality holds for every rho iff it holds at the right endpoints
    of the basic intervals inside ``I_{j1}``; those are taken at level
    ``|j| + 1 + depth``.  The first point is rho = 0, the last rho = 1.
    """
    _require_binary(spec)
    k, l = j.level, j.index
    if spec.max_level is not None:
        depth = min(depth, spec.max_level - k - 1)
        if depth < 0:
            raise DomainError(f"word {j} has no children in this table")
    L = k + 1 + depth
    first = (2 * l + 1) * 2 ** depth
    count = 2 ** depth
    len_lo, len_hi = subtree_lengths(spec, L, np.arange(first, first + count), truncation)
    bet_lo, bet_hi = _between_in_subtree(spec, L, first, count)
    inc_lo = len_lo.copy()
    inc_hi = len_hi.copy()
    inc_lo[1:] += bet_lo
    inc_hi[1:] += bet_hi
    terms = 2.0 * np.arange(1, count + 1) + 1.0
    dist_lo = np.cumsum(inc_lo) * (1 - terms * U)
    dist_hi = np.cumsum(inc_hi) * (1 + terms * U)
    dist = np.cumsum(0.5 * (len_lo + len_hi) + np.concatenate([[0.0], 0.5 * (bet_lo + bet_hi)]))
    g_lo, g_hi = spec.gap_bounds(k, [l])
    g_lo, g_hi = float(g_lo[0, 0]), float(g_hi[0, 0])
    rho_lo, rho_hi = _ratio_bracket(g_lo, g_hi, dist_lo, dist_hi, dist_lo[-1], dist_hi[-1])
    g_mid = 0.5 * (g_lo + g_hi)
    rho = (g_mid + dist) / (g_mid + dist[-1])
    nu_j1 = Fraction(1, 2 ** (k + 1))
    points = [StaircasePoint(0.0, 0.0, 0.0, Fraction(0), 0.0, 0.0)]
    for t in range(count):
        lhs = Fraction(t + 1, 2 ** L)
        if t == count - 1:
            # rho = 1 exactly: the whole of G_j ∪ I_{j1}
            v = float(nu_j1)
            points.append(StaircasePoint(1.0, 1.0, 1.0, lhs, v, v))
            continue
        r_lo = min(float(rho_lo[t]), 1.0)
        r_hi = min(float(rho_hi[t]), 1.0)
        points.append(StaircasePoint(float(rho[t]), r_lo, r_hi, lhs,
                                     r_lo * float(nu_j1) * (1 - U), r_hi * float(nu_j1) * (1 + U)))
    return points


def staircase_verdict(points) -> str:
    return combine_verdicts(p.verdict for p in points)


def export_staircase(points, path=None) -> str:
    """Four numeric columns ``rho lhs rhs_lo rhs_hi`` at 17 significant digits."""
    rows = ["# rho lhs rhs_lo rhs_hi"]
    for p in points:
        rows.append(f"{p.rho:.17g} {float(p.lhs):.17g} {p.rhs_lo:.17g} {p.rhs_hi:.17g}")
    text = "\n".join(rows) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


@dataclass
class LemmaCheck:
    verdict_i: str
    verdict_ii: str
    equivalent: bool
    words: int
    witness_i: Optional[dict] = None
    witness_ii: Optional[dict] = None

    def __iter__(self):
        return iter((self.verdict_i, self.verdict_ii, self.equivalent))


def _lemma_words(j, L):
    words = [j]
    base = j.child(1)
    frontier = [base]
    while frontier:
        w = frontier.pop()
        if w.level <= L - 1:
            words.append(w)
            frontier.extend([w.child(0), w.child(1)])
    return sorted(set(words), key=lambda a: (a.level, a.index))


def check_lemma_equivalence(spec: GapSpec, j: Address, depth: int = 6, max_m: Optional[int] = None,
                            truncation: int = DEFAULT_TRUNCATION) -> LemmaCheck:
    """Staircase form vs ratio form over ``{j} ∪ subtree(j1)`` down to level ``|j|+1+depth``.

    The staircase side checks every breakpoint of every word in the set; the
    ratio side checks every ``(word, m)`` whose ``I_{word 1 0^m}`` reaches no
    deeper than the same level.  The word set is closed under ``j' -> j'1k``,
    which is what the equivalence argument needs.
    """
    _require_binary(spec)
    if spec.max_level is not None:
        depth = min(depth, spec.max_level - j.level - 1)
    if depth < 0:
        raise DomainError(f"word {j} has no children in this table")
    if max_m is None:
        max_m = depth
    L = j.level + 1 + depth
    words = _lemma_words(j, L)
    v_i, v_ii = [], []
    wit_i = wit_ii = None
    for w in words:
        d = L - w.level - 1
        pts = staircase_profile(spec, w, d, truncation)
        vi = staircase_verdict(pts)
        v_i.append(vi)
        if vi == "fails" and wit_i is None:
            bad = next(p for p in pts if p.verdict == "fails")
            wit_i = {"word": str(w), "rho": bad.rho, "lhs": str(bad.lhs), "rhs_hi": bad.rhs_hi}
        for m in range(1, min(max_m, d) + 1):
            lo, hi = proportion_ratios(spec, w.level, [w.index], m, truncation)
            t = 2.0 ** -m
            if hi[0] < t:
                v = "fails"
                if wit_ii is None:
                    wit_ii = {"word": str(w), "m": m, "ratio_hi": float(hi[0]), "target": t}
            elif lo[0] < t:
                v = "indeterminate"
            else:
                v = "holds"
            v_ii.append(v)
    verdict_i = combine_verdicts(v_i)
    verdict_ii = combine_verdicts(v_ii)
    return LemmaCheck(verdict_i, verdict_ii, verdict_i == verdict_ii, len(words), wit_i, wit_ii)


# ---------------------------------------------------------------- q and r


@dataclass
class QRBounds:
    q_hat: float
    r_hat: float
    k_min: int
    k_max: int
    region: Optional[tuple] = None
    eps: float = 0.01
    per_level: list = field(default_factory=list)
    source: str = "estimated"

    @classmethod
    def from_constants(cls, q, r, region=None, source="analytic"):
        if not 0 < q <= r:
            raise DomainError(f"need 0 < q <= r, got q={q}, r={r}")
        return cls(float(q), float(r), 0, 0, region, 0.0, [], source)

    def to_dict(self):
        return _jsonable(asdict(self))


def estimate_qr(spec: GapSpec, h: GaugeFunction, region=None, eps: float = 0.01, k_min: int = 4,
                k_max: int = 12, depth: int = DEFAULT_TRUNCATION) -> QRBounds:
    """``q_hat = min h(I_j) n^|j|`` (lower brackets), ``r_hat = max`` (upper brackets).

    Ranges over words with ``k_min <= |j| <= k_max`` and ``I_j`` inside
    ``(1 + eps) * region``; ``per_level`` keeps the per-level extremes so the
    sensitivity to the starting level can be read off.
    """
    if k_min > k_max:
        raise DomainError("k_min > k_max")
    n = spec.n
    g = level_geometry(spec, k_max, depth)
    if region is not None:
        a, b = dilate(region, eps)
    per_level = []
    q_hat, r_hat = math.inf, -math.inf
    for k in range(k_min, k_max + 1):
        len_lo, len_hi = g.lengths_at(k)
        step = n ** (k_max - k)
        left_lo = g.left_lo[::step]
        left_hi = g.left_hi[::step]
        if region is None:
            sel = np.ones(len_lo.size, dtype=bool)
        else:
            right_hi = g.right_hi[step - 1::step]
            sel = (left_lo >= a) & (right_hi <= b)
        if not sel.any():
            continue
        mid_lo = add_down(left_lo[sel], 0.5 * len_lo[sel])
        mid_hi = add_up(left_hi[sel], 0.5 * len_hi[sel])
        h_lo, h_hi = h.bracket(mid_lo, mid_hi, len_lo[sel], len_hi[sel])
        scale = float(n) ** k
        qk = float(np.min(h_lo)) * scale
        rk = float(np.max(h_hi)) * scale
        per_level.append({"level": k, "q": qk, "r": rk, "words": int(sel.sum())})
        q_hat = min(q_hat, qk)
        r_hat = max(r_hat, rk)
    if not per_level:
        raise DomainError("no basic interval of the requested levels lies inside the region")
    return QRBounds(q_hat, r_hat, k_min, k_max, None if region is None else tuple(region), eps,
                    per_level)
