"""Midpoint-dependent gauge functions ``h(w, delta)`` and their hypothesis checks."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .kernels import U, widen

# central-difference steps, relative to max(1, |w|) and to delta
FD_STEP = 1e-5
# second differences lose ~u / step^2 to rounding; 1e-5 would leave
# ~1.5e-5 relative noise in h22, so they use a coarser step
FD_STEP2 = 1e-4
COND_TOL = 1e-8


class GaugeError(ValueError):
    """The gauge evaluated to a non-positive or non-finite value."""


@dataclass(frozen=True)
class GaugeFunction:
    """Vectorized evaluator ``func(w, delta)`` plus optional analytic partials.

    ``partials_fn(w, delta)`` returns ``(h1, h2, h11, h12, h22)``.  Gauges of
    the form ``(1 + slope * w) * delta ** alpha`` set ``weighted_power`` so the
    numba cover kernel can evaluate them inline.
    """

    func: Callable
    partials_fn: Optional[Callable] = None
    tag: str = "custom"
    params: dict = field(default_factory=dict)
    delta_only: bool = False
    weighted_power: Optional[tuple] = None
    ulps: int = 4

    def __call__(self, w, delta):
        w = np.asarray(w, dtype=float)
        delta = np.asarray(delta, dtype=float)
        v = np.asarray(self.func(w, delta), dtype=float)
        if np.any(~np.isfinite(v)) or np.any(v <= 0):
            raise GaugeError(f"{self.name} is not positive and finite on the requested points")
        return v

    @property
    def name(self):
        if not self.params:
            return self.tag
        return f"{self.tag}:" + ",".join(f"{v:g}" if isinstance(v, float) else str(v)
                                         for v in self.params.values())

    def kernel_params(self):
        return self.weighted_power

    def bracket(self, w_lo, w_hi, d_lo, d_hi):
        """``[min, max]`` of h over the box of midpoints and diameters.

        h is increasing in delta (nested intervals), so the extremes sit on
        the delta bounds; in w the corners are sampled, and the first partial
        (when available) widens the result by its slope times the w-width.
        """
        w_lo = np.asarray(w_lo, dtype=float)
        w_hi = np.asarray(w_hi, dtype=float)
        d_lo = np.asarray(d_lo, dtype=float)
        d_hi = np.asarray(d_hi, dtype=float)
        if self.delta_only:
            lo = self(w_lo, d_lo)
            hi = self(w_lo, d_hi)
        else:
            a = self(w_lo, d_lo)
            b = self(w_hi, d_lo)
            c = self(w_lo, d_hi)
            d = self(w_hi, d_hi)
            lo = np.minimum(a, b)
            hi = np.maximum(c, d)
            if self.partials_fn is not None and self.weighted_power is None:
                span = w_hi - w_lo
                s_lo = np.maximum(np.abs(self.partials_fn(w_lo, d_lo)[0]),
                                  np.abs(self.partials_fn(w_hi, d_lo)[0]))
                s_hi = np.maximum(np.abs(self.partials_fn(w_lo, d_hi)[0]),
                                  np.abs(self.partials_fn(w_hi, d_hi)[0]))
                lo = np.maximum(lo - s_lo * span, 0.0)
                hi = hi + s_hi * span
        return widen(lo, hi, self.ulps)


def power(alpha) -> GaugeFunction:
    """``h(delta) = delta ** alpha``."""
    a = float(alpha)
    if not a > 0:
        raise GaugeError(f"power exponent must be positive, got {alpha}")

    def partials(w, d):
        w, d = np.broadcast_arrays(np.asarray(w, float), np.asarray(d, float))
        z = np.zeros_like(d)
        return z, a * d ** (a - 1), z, z, a * (a - 1) * d ** (a - 2)

    return GaugeFunction(lambda w, d: d ** a + 0.0 * w, partials, "power",
                         {"alpha": a}, True, (a, 0.0))


def log_power(p, x) -> GaugeFunction:
    """``delta ** (log 2 / (p log x))``, the gauge paired with the C_{p,x} sets."""
    g = power(math.log(2.0) / (float(p) * math.log(float(x))))
    return GaugeFunction(g.func, g.partials_fn, "logpower", {"p": float(p), "x": float(x)},
                         True, g.weighted_power)


def weighted_power(alpha, slope=1.0) -> GaugeFunction:
    """``(1 + slope * w) * delta ** alpha``; positive only where ``1 + slope * w > 0``."""
    a = float(alpha)
    s = float(slope)

    def func(w, d):
        return (1.0 + s * w) * d ** a

    def partials(w, d):
        w, d = np.broadcast_arrays(np.asarray(w, float), np.asarray(d, float))
        z = np.zeros_like(d)
        return (s * d ** a, (1.0 + s * w) * a * d ** (a - 1), z,
                s * a * d ** (a - 1), (1.0 + s * w) * a * (a - 1) * d ** (a - 2))

    params = {"alpha": a} if s == 1.0 else {"alpha": a, "slope": s}
    return GaugeFunction(func, partials, "wpower", params, False, (a, s))


def custom(func, partials_fn=None, delta_only=False, tag="custom") -> GaugeFunction:
    return GaugeFunction(func, partials_fn, tag, {}, delta_only, None)


def _number(text):
    return float(Fraction(text.strip()))


def from_name(text: str) -> GaugeFunction:
    """Parse ``power:alpha``, ``power:1/p``, ``logpower:p,x`` or ``wpower:alpha``."""
    kind, _, arg = text.partition(":")
    kind = kind.strip().lower()
    args = [a for a in arg.split(",") if a.strip()]
    try:
        if kind == "power" and len(args) == 1:
            return power(_number(args[0]))
        if kind == "logpower" and len(args) == 2:
            return log_power(_number(args[0]), _number(args[1]))
        if kind == "wpower" and len(args) in (1, 2):
            return weighted_power(*(_number(a) for a in args))
    except (ValueError, ZeroDivisionError) as exc:
        raise GaugeError(f"bad gauge parameters in {text!r}: {exc}") from None
    raise GaugeError(f"unknown gauge {text!r}; expected power:a, logpower:p,x or wpower:a")


# ---------------------------------------------------------------- evaluation


def evaluate(h: GaugeFunction, interval) -> tuple:
    """Bracket of ``h(I)`` over the interval's midpoint and length brackets."""
    lo, hi = h.bracket(interval.mid_lo, interval.mid_hi, interval.length_lo, interval.length_hi)
    return float(lo), float(hi)


def fd_partials(h: GaugeFunction, w, delta):
    """Central finite differences for ``(h1, h2, h11, h12, h22)``."""
    w = np.asarray(w, dtype=float)
    d = np.asarray(delta, dtype=float)
    f = h.func
    ew = FD_STEP * np.maximum(1.0, np.abs(w))
    ed = FD_STEP * d
    h1 = (f(w + ew, d) - f(w - ew, d)) / (2 * ew)
    h2 = (f(w, d + ed) - f(w, d - ed)) / (2 * ed)
    ew2 = FD_STEP2 * np.maximum(1.0, np.abs(w))
    ed2 = FD_STEP2 * d
    f0 = f(w, d)
    h11 = (f(w + ew2, d) - 2 * f0 + f(w - ew2, d)) / ew2 ** 2
    h22 = (f(w, d + ed2) - 2 * f0 + f(w, d - ed2)) / ed2 ** 2
    h12 = (f(w + ew2, d + ed2) - f(w + ew2, d - ed2)
           - f(w - ew2, d + ed2) + f(w - ew2, d - ed2)) / (4 * ew2 * ed2)
    return h1, h2, h11, h12, h22


def partials(h: GaugeFunction, w, delta, analytic=True):
    """``(h1, h2, h11, h12, h22)`` at ``(w, delta)``: analytic when supplied."""
    d = np.asarray(delta, dtype=float)
    if np.any(d <= 0):
        raise GaugeError("partials need delta > 0")
    if analytic and h.partials_fn is not None:
        return tuple(np.asarray(v, dtype=float) for v in h.partials_fn(w, delta))
    return fd_partials(h, w, delta)


def _fd_noise(h, w, d):
    """Rounding noise of the second differences in ``fd_partials``."""
    f0 = np.abs(h.func(w, d))
    step = FD_STEP2 * np.minimum(np.maximum(1.0, np.abs(w)), d)
    return 64 * U * f0 / step ** 2


# ---------------------------------------------------------------- reports


VERDICTS = ("holds", "holds-below-threshold", "indeterminate", "fails")


@dataclass
class ConditionReport:
    name: str
    verdict: str
    witness: Optional[dict] = None
    threshold: Optional[float] = None
    grid: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    @property
    def ok(self):
        return self.verdict in ("holds", "holds-below-threshold")

    def to_dict(self):
        return _jsonable(asdict(self))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    return obj


def combine_verdicts(verdicts):
    """Worst verdict of a collection (fails > indeterminate > below-threshold > holds)."""
    rank = {v: i for i, v in enumerate(VERDICTS)}
    return max(verdicts, key=lambda v: rank[v], default="holds")


# ---------------------------------------------------------------- grids


def dilate(region, eps):
    """``(1 + eps) * J``: same midpoint, diameter scaled by ``1 + eps``."""
    a, b = float(region[0]), float(region[1])
    c = 0.5 * (a + b)
    r = 0.5 * (b - a) * (1.0 + eps)
    return c - r, c + r


@dataclass(frozen=True)
class GridSpec:
    n_w: int = 65
    per_decade: int = 20
    decades: int = 6

    def points(self, region, eps):
        a, b = dilate(region, eps)
        w = a + (np.arange(self.n_w) + 0.5) * (b - a) / self.n_w
        n_d = self.per_decade * self.decades + 1
        deltas = (b - a) * 10.0 ** (-np.arange(n_d)[::-1] / self.per_decade)
        return w, deltas, (a, b)

    def describe(self, region, eps):
        a, b = dilate(region, eps)
        return {"w_points": self.n_w, "w_range": [a, b], "delta_per_decade": self.per_decade,
                "decades": self.decades, "delta_max": b - a}


def _condition_values(h, w, d, mirror, analytic):
    h1, h2, h11, h12, h22 = partials(h, w, d, analytic)
    e1 = -h11 + 4 * h22
    e2 = h11 - 4 * h12 + 4 * h22 if mirror else h11 + 4 * h12 + 4 * h22
    tol = COND_TOL * (np.abs(h11) + 4 * np.abs(h12) + 4 * np.abs(h22))
    if not (analytic and h.partials_fn is not None):
        tol = tol + 12 * _fd_noise(h, w, d)
    finite = np.isfinite(e1) & np.isfinite(e2)
    return e1, e2, tol, finite


def _violates(h, w, d, mirror, analytic):
    e1, e2, tol, finite = _condition_values(h, w, d, mirror, analytic)
    return (~finite) | (e1 > tol) | (e2 > tol)


def _check_condition_i(h, region, eps, grid, mirror, analytic, name):
    grid = grid or GridSpec()
    ws, deltas, (a, b) = grid.points(region, eps)
    per_w = []
    failures = []
    for w in ws:
        room = 2.0 * min(w - a, b - w)
        ds = deltas[deltas <= room]
        if ds.size == 0:
            per_w.append(None)
            continue
        bad = _violates(h, np.full(ds.size, w), ds, mirror, analytic)
        if not bad.any():
            per_w.append(None)
            continue
        first = int(np.argmax(bad))
        if first == 0:
            failures.append((float(w), float(ds[0])))
            per_w.append(0.0)
            continue
        lo, hi = float(ds[first - 1]), float(ds[first])
        for _ in range(60):
            mid = math.sqrt(lo * hi)
            if _violates(h, np.array([w]), np.array([mid]), mirror, analytic)[0]:
                hi = mid
            else:
                lo = mid
            if hi - lo <= 1e-12 * hi:
                break
        per_w.append(lo)
    details = {"w": ws, "threshold_by_w": [t if t is not None else None for t in per_w],
               "analytic_partials": bool(analytic and h.partials_fn is not None)}
    desc = grid.describe(region, eps)
    if failures:
        w0, d0 = min(failures)
        e1, e2, tol, _ = _condition_values(h, np.array([w0]), np.array([d0]), mirror, analytic)
        witness = {"w": w0, "delta": d0, "e1": float(e1[0]), "e2": float(e2[0]), "tol": float(tol[0])}
        return ConditionReport(name, "fails", witness, None, desc, details)
    found = [t for t in per_w if t is not None]
    if found:
        return ConditionReport(name, "holds-below-threshold", None, min(found), desc, details)
    return ConditionReport(name, "holds", None, None, desc, details)


def check_theorem2_condition_i(h: GaugeFunction, region, eps=0.01, grid: GridSpec = None,
                               analytic=True) -> ConditionReport:
    """``-h11 + 4 h22 <= 0`` and ``h11 + 4 h12 + 4 h22 <= 0`` on the grid.

    For each sampled midpoint the largest delta below which both hold is
    located by bisection between the last passing and first failing sample.
    """
    return _check_condition_i(h, region, eps, grid, False, analytic, "condition_i")


def check_symmetric_condition_i(h: GaugeFunction, region, eps=0.01, grid: GridSpec = None,
                                analytic=True) -> ConditionReport:
    """Mirrored form: ``-h11 + 4 h22 <= 0`` and ``h11 - 4 h12 + 4 h22 <= 0``."""
    return _check_condition_i(h, region, eps, grid, True, analytic, "condition_i_mirror")


def recheck_witness(h: GaugeFunction, report: ConditionReport, mirror=False, analytic=True) -> bool:
    """True when a failing report's witness still violates the condition."""
    w = report.witness
    return bool(_violates(h, np.array([w["w"]]), np.array([w["delta"]]), mirror, analytic)[0])


def default_doubling_samples(region=(0.0, 1.0), n_w=9, decades=8):
    a, b = float(region[0]), float(region[1])
    ws = np.linspace(a, b, n_w)
    ds = (b - a if b > a else 1.0) * 10.0 ** -np.linspace(0, decades, 4 * decades + 1)
    W, D = np.meshgrid(ws, ds, indexing="ij")
    return list(zip(W.ravel(), D.ravel()))


def check_doubling(h: GaugeFunction, samples):
    """``D = max h(w, 2 delta) / h(w, delta)`` over the samples."""
    if not samples:
        raise GaugeError("doubling check needs samples")
    w = np.array([s[0] for s in samples], dtype=float)
    d = np.array([s[1] for s in samples], dtype=float)
    base = h(w, d)
    ratio = h(w, 2 * d) / base
    i = int(np.argmax(ratio))
    D = float(ratio[i])
    verdict = "holds" if math.isfinite(D) else "fails"
    witness = {"w": float(w[i]), "delta": float(d[i]), "ratio": D}
    rep = ConditionReport("doubling", verdict, witness if verdict == "fails" else None,
                          None, {"samples": len(samples)}, {"D": D, "argmax": witness})
    return D, rep


def default_nesting_samples(region=(0.0, 1.0), n=12, seed=0):
    rng = np.random.default_rng(seed)
    a, b = float(region[0]), float(region[1])
    pairs = []
    for _ in range(n):
        w = rng.uniform(a, b)
        d = rng.uniform(0.01, 0.5) * (b - a)
        grow_l, grow_r = rng.uniform(0, 0.5 * d, 2)
        pairs.append(((w, d), (w + 0.5 * (grow_r - grow_l), d + grow_l + grow_r)))
    return pairs


def check_increasing_and_vanishing(h: GaugeFunction, nested_pairs=None, delta_seq=None,
                                   w=0.0, tol=1e-6, region=(0.0, 1.0)) -> ConditionReport:
    """Spot check: ``h(I) <= h(I')`` for sampled ``I ⊆ I'`` and ``h -> 0`` as delta -> 0."""
    nested_pairs = nested_pairs if nested_pairs is not None else default_nesting_samples(region)
    delta_seq = np.asarray(delta_seq if delta_seq is not None else 10.0 ** -np.arange(0, 13, 2), float)
    for (w0, d0), (w1, d1) in nested_pairs:
        if not (w1 - d1 / 2 <= w0 - d0 / 2 + 1e-15 and w0 + d0 / 2 <= w1 + d1 / 2 + 1e-15):
            raise GaugeError(f"I({w0}, {d0}) is not inside I({w1}, {d1})")
        small, big = float(h(w0, d0)), float(h(w1, d1))
        if small > big * (1 + 8 * U):
            return ConditionReport("increasing", "fails",
                                   {"inner": [w0, d0], "outer": [w1, d1], "h_inner": small, "h_outer": big})
    vals = h(np.full(delta_seq.size, w), delta_seq)
    order = np.argsort(-delta_seq)
    v = vals[order]
    if np.any(np.diff(v) > 0) or v[-1] > tol:
        i = int(order[-1])
        return ConditionReport("vanishing", "fails", {"w": w, "delta": float(delta_seq[i]),
                                                      "h": float(vals[i])})
    return ConditionReport("increasing_and_vanishing", "holds", None, None,
                           {"pairs": len(nested_pairs), "deltas": delta_seq},
                           {"h_smallest_delta": float(v[-1])})
