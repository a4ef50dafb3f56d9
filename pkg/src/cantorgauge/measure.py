"""Hausdorff-measure estimates: uniform covers, optimal covers, theorem bounds.

A region is ``None`` (the whole set), a closed interval ``(a, b)``, or an
:class:`~cantorgauge.core.Address`; the last selects a subtree by index,
which keeps its Cantor measure exact and avoids endpoint rounding.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .core import (DEFAULT_TRUNCATION, Address, DomainError, GapSpec, level_geometry)
from .gauge import GaugeFunction, _jsonable
from .hypotheses import QRBounds
from .kernels import U, add_down, add_up, backtrack, dp_cover, sum_bracket

METHODS = ("uniform-cover", "dp-cover", "mdp-lower", "thm1-bounds", "thm2-bounds", "closed-form")
MAX_DP_INTERVALS = 2 ** 15


class TheoremNotApplicable(Exception):
    """A hypothesis of the requested bound is not certified."""

    def __init__(self, hypothesis, message=None):
        self.hypothesis = hypothesis
        super().__init__(message or f"hypothesis not satisfied: {hypothesis}")


@dataclass
class MeasureEstimate:
    value_lo: float
    value_hi: float
    method: str
    level: Optional[int] = None
    region: Optional[object] = None
    details: dict = field(default_factory=dict)

    @property
    def midpoint(self):
        return 0.5 * (self.value_lo + self.value_hi)

    def to_dict(self):
        d = asdict(self)
        d["region"] = _region_repr(self.region)
        return _jsonable(d)


@dataclass
class CoverSolution:
    spans: list
    cost_lo: float
    cost_hi: float
    level: int
    max_span_diameter: float

    def to_dict(self):
        return {"spans": [[str(a), str(b)] for a, b in self.spans], "cost_lo": self.cost_lo,
                "cost_hi": self.cost_hi, "level": self.level,
                "max_span_diameter": self.max_span_diameter}


def _region_repr(region):
    if region is None or isinstance(region, Address):
        return None if region is None else str(region)
    return [float(region[0]), float(region[1])]


# ---------------------------------------------------------------- region selection


@dataclass
class _Selection:
    possible: np.ndarray
    certain: np.ndarray

    @property
    def first(self):
        return int(self.possible[0])

    @property
    def last(self):
        return int(self.possible[-1])


def _select(g, region, spec) -> _Selection:
    """Level intervals that may meet the region and those that certainly lie in it."""
    N = len(g)
    if region is None:
        allidx = np.arange(N)
        return _Selection(allidx, allidx)
    if isinstance(region, Address):
        if region.n != spec.n:
            raise DomainError("region address has the wrong branching factor")
        if region.level > g.level:
            raise DomainError(f"region {region} is deeper than level {g.level}")
        size = spec.n ** (g.level - region.level)
        idx = np.arange(region.index * size, (region.index + 1) * size)
        return _Selection(idx, idx)
    a, b = float(region[0]), float(region[1])
    if not a <= b:
        raise DomainError(f"region ({a}, {b}) is inverted")
    possible = np.nonzero((g.right_hi >= a) & (g.left_lo <= b))[0]
    certain = np.nonzero((g.left_lo >= a) & (g.right_hi <= b))[0]
    if possible.size == 0:
        raise DomainError(f"region ({a}, {b}) does not meet the set")
    return _Selection(possible, certain)


def nu_bracket(spec: GapSpec, region, level: int = 12, depth: int = DEFAULT_TRUNCATION):
    """Exact-rational bracket of ``nu(J)`` from the level tiling.

    Intervals certainly inside J give the lower end, intervals possibly
    meeting J the upper end; at most two intervals straddle the boundary.
    """
    if region is None:
        return Fraction(1), Fraction(1)
    if isinstance(region, Address):
        v = Fraction(1, spec.n ** region.level)
        return v, v
    g = level_geometry(spec, level, depth)
    sel = _select(g, region, spec)
    scale = spec.n ** level
    return Fraction(int(sel.certain.size), scale), Fraction(int(sel.possible.size), scale)


# ---------------------------------------------------------------- covers


def _h_bracket(h, g, idx):
    return h.bracket(g.mid_lo[idx], g.mid_hi[idx], g.length_lo[idx], g.length_hi[idx])


def uniform_cover_sum(spec: GapSpec, h: GaugeFunction, region=None, level: int = 10,
                      depth: int = DEFAULT_TRUNCATION, geometry=None) -> MeasureEstimate:
    """``sum h(I_j)`` over level-k intervals meeting J.

    ``value_hi`` sums upper brackets over every interval that may meet J
    and bounds the delta-cover infimum from above; ``value_lo`` sums lower
    brackets over the intervals that certainly meet it.
    """
    g = geometry if geometry is not None else level_geometry(spec, level, depth)
    sel = _select(g, region, spec)
    h_lo, h_hi = _h_bracket(h, g, sel.possible)
    _, total_hi = sum_bracket(h_lo, h_hi)
    if region is None or isinstance(region, Address):
        total_lo, _ = sum_bracket(h_lo, h_hi)
    else:
        a, b = float(region[0]), float(region[1])
        sure = (g.right_lo[sel.possible] >= a) & (g.left_hi[sel.possible] <= b)
        total_lo, _ = sum_bracket(h_lo[sure], h_hi[sure])
    details = {"intervals": int(sel.possible.size), "delta": float(np.max(g.length_hi[sel.possible])),
               "truncation_level": g.truncation_level}
    return MeasureEstimate(float(total_lo), float(total_hi), "uniform-cover", g.level, region, details)


def _span_lengths(g, first, spans):
    # spans are disjoint, so summing each slice is linear overall
    lo = np.empty(len(spans))
    hi = np.empty(len(spans))
    for t, (a, b) in enumerate(spans):
        a, b = a + first, b + first
        lo[t], _ = sum_bracket(np.concatenate([g.length_lo[a:b + 1], g.between_lo[a:b]]), 0.0)
        _, hi[t] = sum_bracket(0.0, np.concatenate([g.length_hi[a:b + 1], g.between_hi[a:b]]))
    return lo, hi


def dp_optimal_cover(spec: GapSpec, h: GaugeFunction, region=None, level: int = 10,
                     depth: int = DEFAULT_TRUNCATION, geometry=None):
    """Cheapest cover of the level-d intervals in J by disjoint near-basic spans.

    Restricting to near-basic spans loses nothing for a gauge that is
    increasing as an interval function: any interval covering a run of basic
    intervals contains the near-basic span of that run, and overlapping spans
    can be merged or trimmed to disjoint ones.  The prefix recurrence
    ``best[r+1] = min_l best[l] + h(span(l, r))`` is exact over this class.

    Returns ``(MeasureEstimate, CoverSolution)``.  A real-interval region is
    snapped outward to the endpoints of the level-d intervals that may meet
    it; the snapped Cantor mass is reported in ``details["snap"]``.
    """
    g = geometry if geometry is not None else level_geometry(spec, level, depth)
    sel = _select(g, region, spec)
    first, last = sel.first, sel.last
    N = last - first + 1
    if N > MAX_DP_INTERVALS:
        raise DomainError(f"{N} intervals exceed the cover DP limit of {MAX_DP_INTERVALS}")
    s = slice(first, last + 1)
    best_lo, best_hi, _, arg_hi = dp_cover(g.length_lo[s], g.length_hi[s], g.between_lo[first:last],
                                           g.between_hi[first:last], g.left_lo[s], g.left_hi[s], h)
    spans = backtrack(arg_hi, N)
    span_lo, span_hi = _span_lengths(g, first, spans)
    d = g.level
    addresses = [(Address.from_index(d, a + first, spec.n), Address.from_index(d, b + first, spec.n))
                 for a, b in spans]
    max_diam = float(np.max(span_hi))
    sol = CoverSolution(addresses, float(best_lo[N]), float(best_hi[N]), d, max_diam)
    scale = spec.n ** d
    snap = {"snapped_region": [float(g.left_lo[first]), float(g.right_hi[last])],
            "snapped_mass": str(Fraction(int(sel.possible.size - sel.certain.size), scale))}
    details = {"intervals": N, "spans": len(spans), "max_span_diameter": max_diam, "snap": snap,
               "truncation_level": g.truncation_level, "cover_class": "near-basic"}
    est = MeasureEstimate(float(best_lo[N]), float(best_hi[N]), "dp-cover", d, region, details)
    return est, sol


# ---------------------------------------------------------------- lower and two-sided bounds


def mdp_lower_bound(spec: GapSpec, h: GaugeFunction, region=None, q: float = 1.0, eps: float = 0.01,
                    level: int = 12, depth: int = DEFAULT_TRUNCATION) -> MeasureEstimate:
    """``q * nu(J)``: a lower bound when ``h(I) >= q nu(I)`` for small intervals in ``(1+eps) J``.

    ``q`` must be certified by the caller; a non-positive ``q`` yields the
    trivial bound 0 with a ``degenerate`` flag.
    """
    nu_lo, nu_hi = nu_bracket(spec, region, level, depth)
    details = {"q": q, "eps": eps, "nu": [str(nu_lo), str(nu_hi)]}
    if not q > 0:
        details["warning"] = "degenerate: q <= 0"
        return MeasureEstimate(0.0, 0.0, "mdp-lower", level, region, details)
    lo = q * float(nu_lo) * (1 - 2 * U)
    hi = q * float(nu_hi) * (1 + 2 * U)
    return MeasureEstimate(lo, hi, "mdp-lower", level, region, details)


ROUTES = (("condition_i", "assumption_ii"), ("condition_i_mirror", "assumption_ii_mirror"))


def _reports_by_name(reports):
    if isinstance(reports, dict):
        return dict(reports)
    return {r.name: r for r in reports}


def theorem2_route(reports):
    """The first hypothesis route whose reports all pass, or ``None``."""
    by = _reports_by_name(reports)
    for route in ROUTES:
        if all(name in by and by[name].ok for name in route):
            return route
    return None


def thm2_bounds(spec: GapSpec, h: GaugeFunction, region, eps: float, qr: QRBounds, condition_reports,
                level: int = 12, depth: int = DEFAULT_TRUNCATION) -> MeasureEstimate:
    """``[max(0, (2q - r) nu(J)), r nu(J)]`` under the direct or mirrored hypotheses.

    ``condition_reports`` maps report names to reports (or is a list of
    them).  Either ``condition_i`` with ``assumption_ii`` or their mirrored
    pair must pass, and any failing report given is refused.
    """
    by = _reports_by_name(condition_reports)
    failing = [n for n, r in by.items() if r.verdict == "fails"]
    if failing:
        raise TheoremNotApplicable(failing[0], f"failing hypotheses: {', '.join(sorted(failing))}")
    route = theorem2_route(by)
    if route is None:
        missing = [n for n in ROUTES[0] if n not in by or not by[n].ok]
        raise TheoremNotApplicable(missing[0], f"no certified hypothesis route; missing {missing}")
    q, r = qr.q_hat, qr.r_hat
    nu_lo, nu_hi = nu_bracket(spec, region, level, depth)
    lo = max(0.0, (2.0 * q - r) * float(nu_lo) * (1 - 4 * U))
    hi = r * float(nu_hi) * (1 + 2 * U)
    thresholds = {n: by[n].threshold for n in route if by[n].threshold is not None}
    details = {"q": q, "r": r, "route": list(route), "nu": [str(nu_lo), str(nu_hi)],
               "thresholds": thresholds, "clamped": bool(2.0 * q - r <= 0)}
    return MeasureEstimate(lo, hi, "thm2-bounds", level, region, details)


def check_contraction(spec: GapSpec, max_level: int = 10, depth: int = DEFAULT_TRUNCATION):
    """``2 max(|I_j0|, |I_j1|) <= |I_j|`` for every word up to ``max_level``.

    Returns ``(verdict, witness)``; the witness is the first word in
    length-lexicographic order where the inequality certainly fails.
    """
    top = max_level + 1
    if spec.max_level is not None:
        top = min(top, spec.max_level)
    g = level_geometry(spec, top, depth)
    undecided = False
    n = spec.n
    for k in range(top):
        p_lo, p_hi = g.lengths_at(k)
        c_lo, c_hi = g.lengths_at(k + 1)
        big_lo = c_lo.reshape(-1, n).max(axis=1) * 2
        big_hi = c_hi.reshape(-1, n).max(axis=1) * 2
        bad = big_lo > p_hi
        if bad.any():
            i = int(np.argmax(bad))
            return "fails", {"word": str(Address.from_index(k, i, n)), "level": k, "index": i,
                             "twice_child_lo": float(big_lo[i]), "parent_hi": float(p_hi[i])}
        undecided |= bool(np.any(big_hi > p_lo))
    return ("indeterminate" if undecided else "holds"), None


def thm1_bounds(spec: GapSpec, h: GaugeFunction, region, q: float, r: float, D: float,
                contraction_levels: int = 10, level: int = 12,
                depth: int = DEFAULT_TRUNCATION) -> MeasureEstimate:
    """``[q / (2 D^2) nu(J), r nu(J)]``; refuses unless the contraction check holds."""
    if not (q > 0 and r >= q and D > 0):
        raise DomainError(f"need 0 < q <= r and D > 0, got q={q}, r={r}, D={D}")
    verdict, witness = check_contraction(spec, contraction_levels, depth)
    if verdict != "holds":
        raise TheoremNotApplicable("contraction", f"contraction check {verdict}: {witness}")
    nu_lo, nu_hi = nu_bracket(spec, region, level, depth)
    lo = q / (2.0 * D * D) * float(nu_lo) * (1 - 4 * U)
    hi = r * float(nu_hi) * (1 + 2 * U)
    details = {"q": q, "r": r, "D": D, "contraction_levels": contraction_levels,
               "nu": [str(nu_lo), str(nu_hi)]}
    return MeasureEstimate(lo, hi, "thm1-bounds", level, region, details)


def closed_form_estimate(value: float, region=None) -> MeasureEstimate:
    return MeasureEstimate(value, value, "closed-form", None, region, {})


def example_convergence_series(family, levels, h: Optional[GaugeFunction] = None,
                               depth: int = DEFAULT_TRUNCATION) -> list:
    """Uniform cover sums of a built-in family over a range of levels."""
    h = h if h is not None else family.gauge
    return [uniform_cover_sum(family.spec, h, None, k, depth) for k in levels]


def export_series(series, path=None) -> str:
    """Three columns ``level value_lo value_hi`` at 17 significant digits."""
    rows = ["# level value_lo value_hi"]
    rows += [f"{e.level} {e.value_lo:.17g} {e.value_hi:.17g}" for e in series]
    text = "\n".join(rows) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text
