"""Hot numeric kernels: directed-rounding sums, pyramid reduction, cover DP.

Each kernel has a numba implementation and a numpy implementation with the
same contract; ``_accel.use_numba()`` picks one per call.
"""
import numpy as np

from ._accel import jit, use_numba

# unit roundoff for float64
U = 2.0 ** -53
INF = np.inf


def two_sum(a, b):
    """Error-free transformation: a + b == s + e exactly."""
    s = a + b
    bb = s - a
    e = (a - (s - bb)) + (b - bb)
    return s, e


def add_down(a, b):
    s, e = two_sum(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    return np.where(e < 0, np.nextafter(s, -INF), s)


def add_up(a, b):
    s, e = two_sum(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    return np.where(e > 0, np.nextafter(s, INF), s)


def sub_down(a, b):
    return add_down(a, -np.asarray(b, dtype=float))


def sub_up(a, b):
    return add_up(a, -np.asarray(b, dtype=float))


def widen(lo, hi, ulps=1):
    """Push a bracket outward by a few ulps (for libm results such as pow)."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    for _ in range(ulps):
        lo = np.nextafter(lo, -INF)
        hi = np.nextafter(hi, INF)
    return lo, hi


def sum_bracket(lo, hi):
    """Pairwise sum of positive bracket arrays with a rigorous error margin."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    m = max(lo.size, 1)
    # pairwise summation error <= ceil(log2 m) * u * sum, doubled for margin
    c = 2.0 * (np.ceil(np.log2(m)) + 2.0) * U
    return float(np.sum(lo)) * (1.0 - c), float(np.sum(hi)) * (1.0 + c)


# ---------------------------------------------------------------- pyramid


@jit
def _down_nb(a, b):
    s = a + b
    bb = s - a
    e = (a - (s - bb)) + (b - bb)
    if e < 0:
        return np.nextafter(s, -np.inf)
    return s


@jit
def _up_nb(a, b):
    s = a + b
    bb = s - a
    e = (a - (s - bb)) + (b - bb)
    if e > 0:
        return np.nextafter(s, np.inf)
    return s


@jit
def _reduce_level_nb(child_lo, child_hi, gap_lo, gap_hi, n):
    m = gap_lo.shape[0]
    out_lo = np.empty(m)
    out_hi = np.empty(m)
    for t in range(m):
        acc_lo = child_lo[t * n]
        acc_hi = child_hi[t * n]
        for c in range(1, n):
            acc_lo = _down_nb(acc_lo, gap_lo[t, c - 1])
            acc_lo = _down_nb(acc_lo, child_lo[t * n + c])
            acc_hi = _up_nb(acc_hi, gap_hi[t, c - 1])
            acc_hi = _up_nb(acc_hi, child_hi[t * n + c])
        out_lo[t] = acc_lo
        out_hi[t] = acc_hi
    return out_lo, out_hi


def _reduce_level_np(child_lo, child_hi, gap_lo, gap_hi, n):
    cl = child_lo.reshape(-1, n)
    ch = child_hi.reshape(-1, n)
    acc_lo = cl[:, 0].copy()
    acc_hi = ch[:, 0].copy()
    for c in range(1, n):
        acc_lo = add_down(add_down(acc_lo, gap_lo[:, c - 1]), cl[:, c])
        acc_hi = add_up(add_up(acc_hi, gap_hi[:, c - 1]), ch[:, c])
    return acc_lo, acc_hi


def reduce_level(child_lo, child_hi, gap_lo, gap_hi, n):
    """Parent length brackets from children and the gaps between them.

    ``child_*`` has ``n * m`` entries, ``gap_*`` has shape ``(m, n - 1)``;
    each parent is summed left to right with outward rounding.
    """
    child_lo = np.ascontiguousarray(child_lo, dtype=float)
    child_hi = np.ascontiguousarray(child_hi, dtype=float)
    gap_lo = np.ascontiguousarray(gap_lo, dtype=float).reshape(-1, n - 1)
    gap_hi = np.ascontiguousarray(gap_hi, dtype=float).reshape(-1, n - 1)
    if use_numba():
        return _reduce_level_nb(child_lo, child_hi, gap_lo, gap_hi, n)
    return _reduce_level_np(child_lo, child_hi, gap_lo, gap_hi, n)


# ---------------------------------------------------------------- cover DP


@jit
def _dp_weighted_power_nb(len_lo, len_hi, gap_lo, gap_hi, left_lo, left_hi,
                          alpha, slope):
    N = len_lo.shape[0]
    u = 2.0 ** -53
    best_lo = np.zeros(N + 1)
    best_hi = np.zeros(N + 1)
    arg_lo = np.zeros(N + 1, dtype=np.int64)
    arg_hi = np.zeros(N + 1, dtype=np.int64)
    bad = 0
    for r in range(N):
        acc_lo = 0.0
        acc_hi = 0.0
        b_lo = np.inf
        b_hi = np.inf
        a_lo = -1
        a_hi = -1
        for l in range(r, -1, -1):
            if l < r:
                acc_lo += gap_lo[l]
                acc_hi += gap_hi[l]
            acc_lo += len_lo[l]
            acc_hi += len_hi[l]
            k = 2.0 * (r - l) + 2.0
            d_lo = acc_lo * (1.0 - k * u)
            d_hi = acc_hi * (1.0 + k * u)
            c_lo = d_lo ** alpha
            c_hi = d_hi ** alpha
            if slope != 0.0:
                w_lo = (left_lo[l] + 0.5 * d_lo)
                w_hi = (left_hi[l] + 0.5 * d_hi)
                w_lo -= abs(w_lo) * 4.0 * u
                w_hi += abs(w_hi) * 4.0 * u
                f1 = 1.0 + slope * w_lo
                f2 = 1.0 + slope * w_hi
                f_lo = min(f1, f2)
                f_hi = max(f1, f2)
                if f_lo <= 0.0:
                    bad = 1
                c_lo *= f_lo
                c_hi *= f_hi
            c_lo *= (1.0 - 6.0 * u)
            c_hi *= (1.0 + 6.0 * u)
            v_lo = (best_lo[l] + c_lo) * (1.0 - 2.0 * u)
            v_hi = (best_hi[l] + c_hi) * (1.0 + 2.0 * u)
            if v_lo < b_lo:
                b_lo = v_lo
                a_lo = l
            if v_hi < b_hi:
                b_hi = v_hi
                a_hi = l
        best_lo[r + 1] = b_lo
        best_hi[r + 1] = b_hi
        arg_lo[r + 1] = a_lo
        arg_hi[r + 1] = a_hi
    return best_lo, best_hi, arg_lo, arg_hi, bad


def _dp_np(len_lo, len_hi, gap_lo, gap_hi, left_lo, left_hi, bracket):
    N = len_lo.shape[0]
    best_lo = np.zeros(N + 1)
    best_hi = np.zeros(N + 1)
    arg_lo = np.zeros(N + 1, dtype=np.int64)
    arg_hi = np.zeros(N + 1, dtype=np.int64)
    gl = np.append(gap_lo, 0.0)
    gh = np.append(gap_hi, 0.0)
    for r in range(N):
        inc_lo = len_lo[: r + 1] + gl[: r + 1]
        inc_hi = len_hi[: r + 1] + gh[: r + 1]
        inc_lo[r] = len_lo[r]
        inc_hi[r] = len_hi[r]
        acc_lo = np.cumsum(inc_lo[::-1])[::-1]
        acc_hi = np.cumsum(inc_hi[::-1])[::-1]
        k = 2.0 * (r - np.arange(r + 1)) + 2.0
        d_lo = acc_lo * (1.0 - k * U)
        d_hi = acc_hi * (1.0 + k * U)
        w_lo = left_lo[: r + 1] + 0.5 * d_lo
        w_hi = left_hi[: r + 1] + 0.5 * d_hi
        w_lo = w_lo - np.abs(w_lo) * 4.0 * U
        w_hi = w_hi + np.abs(w_hi) * 4.0 * U
        c_lo, c_hi = bracket(w_lo, w_hi, d_lo, d_hi)
        v_lo = (best_lo[: r + 1] + c_lo) * (1.0 - 2.0 * U)
        v_hi = (best_hi[: r + 1] + c_hi) * (1.0 + 2.0 * U)
        # ties resolve to the largest l, matching the numba loop order
        a_lo = r - int(np.argmin(v_lo[::-1]))
        a_hi = r - int(np.argmin(v_hi[::-1]))
        best_lo[r + 1] = v_lo[a_lo]
        best_hi[r + 1] = v_hi[a_hi]
        arg_lo[r + 1] = a_lo
        arg_hi[r + 1] = a_hi
    return best_lo, best_hi, arg_lo, arg_hi


def dp_cover(len_lo, len_hi, gap_lo, gap_hi, left_lo, left_hi, gauge):
    """Minimum-cost partition of N ordered intervals into contiguous spans.

    best[r + 1] = min over l <= r of best[l] + h(span(l, r)), evaluated
    once with lower-bracket costs and once with upper-bracket costs.
    Returns ``(best_lo, best_hi, arg_lo, arg_hi)`` where ``arg[r + 1]`` is the
    first interval of the last span in an optimal cover of ``0..r``.
    """
    arrays = [np.ascontiguousarray(a, dtype=float)
              for a in (len_lo, len_hi, gap_lo, gap_hi, left_lo, left_hi)]
    params = gauge.kernel_params()
    if use_numba() and params is not None:
        alpha, slope = params
        *out, bad = _dp_weighted_power_nb(*arrays, float(alpha), float(slope))
        if bad:
            from .gauge import GaugeError
            raise GaugeError("gauge is non-positive on a cover span")
        return tuple(out)
    return _dp_np(*arrays, gauge.bracket)


def backtrack(arg, N):
    """Spans (first, last) of the optimal cover recorded in ``arg``."""
    spans = []
    r = N
    while r > 0:
        l = int(arg[r])
        spans.append((l, r - 1))
        r = l
    spans.reverse()
    return spans
