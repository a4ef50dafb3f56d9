"""Construction tree of a Cantor set: addresses, gaps, interval geometry, measure.

A Cantor set is fixed by its gap rule.  Every basic interval is the sum of the
gaps it contains plus the lengths of its descendants at some truncation level;
built-in rules carry an analytic bracket for those descendant lengths, so all
lengths and endpoints come out as rigorous ``[lo, hi]`` brackets.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from .kernels import add_down, add_up, reduce_level, sub_down, sub_up, widen

DEFAULT_DEPTH_CAP = 24
DEFAULT_TRUNCATION = 6


class DomainError(ValueError):
    """An address, index or parameter outside the construction."""


class UnsupportedRigorError(DomainError):
    """A rigorous bracket was requested from a spec without a tail bound."""


# ---------------------------------------------------------------- addresses


@dataclass(frozen=True, order=True)
class Address:
    """A word over ``{0, ..., n-1}`` locating a basic interval or gap.

    The empty word is the root.  ``index`` is the word read as a base-``n``
    integer, so for binary sets ``Address(j).index`` is the ``l`` of
    ``I_l^k`` with ``k = len(j)``.
    """

    word: tuple = ()
    n: int = 2

    def __post_init__(self):
        if self.n < 2:
            raise DomainError(f"branching factor must be >= 2, got {self.n}")
        word = tuple(int(s) for s in self.word)
        if any(s < 0 or s >= self.n for s in word):
            raise DomainError(f"word {self.word!r} has symbols outside 0..{self.n - 1}")
        object.__setattr__(self, "word", word)

    @classmethod
    def parse(cls, text: str, n: int = 2) -> "Address":
        text = text.strip()
        if text in ("", "-", "root", "()"):
            return cls((), n)
        if not text.isdigit():
            raise DomainError(f"cannot parse address {text!r}")
        return cls(tuple(int(c) for c in text), n)

    @classmethod
    def from_index(cls, level: int, index: int, n: int = 2) -> "Address":
        if level < 0 or not 0 <= index < n ** level:
            raise DomainError(f"index {index} out of range at level {level}")
        word = []
        for _ in range(level):
            index, s = divmod(index, n)
            word.append(s)
        return cls(tuple(reversed(word)), n)

    @property
    def level(self) -> int:
        return len(self.word)

    @property
    def index(self) -> int:
        v = 0
        for s in self.word:
            v = v * self.n + s
        return v

    def child(self, *symbols: int) -> "Address":
        return Address(self.word + tuple(symbols), self.n)

    @property
    def parent(self) -> "Address":
        if not self.word:
            raise DomainError("the root has no parent")
        return Address(self.word[:-1], self.n)

    def is_prefix_of(self, other: "Address") -> bool:
        return other.word[: len(self.word)] == self.word

    def __len__(self):
        return len(self.word)

    def __str__(self):
        return "".join(str(s) for s in self.word) or "-"


# ---------------------------------------------------------------- gap specs


def _as_index(level, idx, n):
    if idx is None:
        return np.arange(n ** level, dtype=np.int64)
    return np.asarray(idx, dtype=np.int64)


class GapSpec:
    """Gap rule of a Cantor set.

    Subclasses implement ``_gaps(level, idx)`` (point values, shape
    ``(len(idx), n - 1)``) and, when they can, ``_tail(level, idx)``: a
    rigorous bracket of the lengths of the basic intervals ``idx`` at
    ``level``.
    """

    tag = "custom"
    n = 2
    root_left = 0.0
    depth_cap = DEFAULT_DEPTH_CAP
    # finite tables stop here; None means gaps at every level
    max_level = None
    # lowest level at which _tail is valid
    min_tail_level = 0
    # ulps of slack on computed gap values (libm pow is within one ulp)
    gap_ulps = 1

    def _gaps(self, level, idx):
        raise NotImplementedError

    def _tail(self, level, idx):
        raise UnsupportedRigorError(f"{self.tag} spec has no tail bound")

    @property
    def has_tail(self):
        return type(self)._tail is not GapSpec._tail

    def describe(self) -> dict:
        return {"tag": self.tag, "n": self.n, "root_left": self.root_left}

    def check_level(self, level):
        if level < 0:
            raise DomainError(f"negative level {level}")
        if self.max_level is not None and level > self.max_level:
            raise DomainError(f"level {level} is below the last tabulated level {self.max_level}")

    def gap_values(self, level, idx=None):
        self.check_level(level)
        if self.max_level is not None and level >= self.max_level:
            raise DomainError(f"no gaps at level {level} of a table of depth {self.max_level}")
        return np.asarray(self._gaps(level, _as_index(level, idx, self.n)), dtype=float)

    def gap_bounds(self, level, idx=None):
        g = self.gap_values(level, idx)
        if self.gap_ulps:
            return widen(g, g, self.gap_ulps)
        return g, g.copy()

    def tail_bounds(self, level, idx=None):
        self.check_level(level)
        lo, hi = self._tail(level, _as_index(level, idx, self.n))
        return np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)

    def truncation_level(self, level, depth):
        if self.max_level is not None:
            return self.max_level
        return max(level + depth, self.min_tail_level)


def gap_length(spec: GapSpec, j: Address, gap_index: int = 0) -> float:
    """Length of the ``gap_index``-th gap inside ``I_j``, exactly as the rule gives it."""
    if j.n != spec.n:
        raise DomainError(f"address is {j.n}-ary but the spec is {spec.n}-ary")
    if not 0 <= gap_index < spec.n - 1:
        raise DomainError(f"gap index {gap_index} outside 0..{spec.n - 2}")
    if j.level > spec.depth_cap:
        raise DomainError(f"address deeper than the depth cap {spec.depth_cap}")
    return float(spec.gap_values(j.level, [j.index])[0, gap_index])


class PowerGaps(GapSpec):
    """Gaps ``|G_l^k| = (2^k + l)^(-p)``."""

    tag = "cp"

    def __init__(self, p, root_left=0.0, depth_cap=DEFAULT_DEPTH_CAP):
        if not p > 1:
            raise DomainError(f"p must be > 1, got {p}")
        self.p = float(p)
        self.root_left = float(root_left)
        self.depth_cap = depth_cap

    def describe(self):
        return {**super().describe(), "p": self.p}

    def _gaps(self, level, idx):
        return ((2.0 ** level + idx.astype(float)) ** -self.p)[:, None]

    def length_factor(self):
        return 2.0 ** self.p / (2.0 ** self.p - 2.0)

    def _tail(self, level, idx):
        c = self.length_factor()
        base = 2.0 ** level + idx.astype(float)
        lo = c * (base + 1.0) ** -self.p
        hi = c * base ** -self.p
        return widen(lo, hi, 3)


class FloorPowerGaps(GapSpec):
    """Gaps ``|G_l^k| = (floor(x^k) + l)^(-p)`` with ``x > 2``."""

    tag = "cpx"
    min_tail_level = 1

    def __init__(self, p, x, root_left=0.0, depth_cap=DEFAULT_DEPTH_CAP):
        if not p > 1:
            raise DomainError(f"p must be > 1, got {p}")
        if not x > 2:
            raise DomainError(f"x must be > 2, got {x}")
        self.p = float(p)
        self.x = float(x)
        self.root_left = float(root_left)
        self.depth_cap = depth_cap

    def describe(self):
        return {**super().describe(), "p": self.p, "x": self.x}

    def _gaps(self, level, idx):
        return ((math.floor(self.x ** level) + idx.astype(float)) ** -self.p)[:, None]

    def _tail(self, level, idx):
        # row h of the subtree holds 2^h gaps; bound each row, sum the
        # geometric series in h:
        #   lo: floor(x^(k+h)) + 2^h l + m <= x^h (x^k + l + 1)
        #   hi: row 0 exact, rows h >= 1 use floor(x^(k+h)) >= x^h (x^k - 1)
        if level < 1:
            raise DomainError("tail bound needs level >= 1")
        p, x = self.p, self.x
        s = 2.0 * x ** -p
        geo = 1.0 / (1.0 - s)
        l = idx.astype(float)
        lo = (x ** level + l + 1.0) ** -p * geo
        hi = (math.floor(x ** level) + l) ** -p + (x ** level - 1.0) ** -p * s * geo
        return widen(lo, hi, 4)


class NaryPowerGaps(GapSpec):
    """``n - 1`` gaps per interval with lengths ``(n^k + i)^(-p)``.

    ``ordering="interval"`` gives all gaps of interval ``l`` the index
    ``i = l``; ``ordering="global"`` numbers the ``(n-1) n^k`` gaps of a level
    left to right, ``i = (n-1) l + g``.  Both reduce to ``PowerGaps`` at n=2.
    """

    tag = "cpn"

    def __init__(self, p, n, ordering="interval", root_left=0.0,
                 depth_cap=DEFAULT_DEPTH_CAP):
        if not p > 1:
            raise DomainError(f"p must be > 1, got {p}")
        if int(n) != n or n < 2:
            raise DomainError(f"n must be an integer >= 2, got {n}")
        if ordering not in ("interval", "global"):
            raise DomainError(f"unknown ordering {ordering!r}")
        self.p = float(p)
        self.n = int(n)
        self.ordering = ordering
        self.root_left = float(root_left)
        self.depth_cap = depth_cap

    def describe(self):
        return {**super().describe(), "p": self.p, "ordering": self.ordering}

    def _offsets(self, idx):
        l = idx.astype(float)[:, None]
        g = np.arange(self.n - 1, dtype=float)[None, :]
        if self.ordering == "interval":
            return l + 0.0 * g
        return (self.n - 1) * l + g

    def _gaps(self, level, idx):
        return (float(self.n) ** level + self._offsets(idx)) ** -self.p

    def length_factor(self):
        n, p = self.n, self.p
        return (n - 1) * n ** p / (n ** p - n)

    def _tail(self, level, idx):
        n, p = self.n, self.p
        c = self.length_factor()
        l = idx.astype(float)
        base = float(n) ** level
        if self.ordering == "interval":
            lo = c * (base + l + 1.0) ** -p
            hi = c * (base + l) ** -p
        else:
            lo = c * (base + (n - 1) * (l + 1.0)) ** -p
            hi = c * (base + (n - 1) * l) ** -p
        return widen(lo, hi, 3)


class MiddleThirdsGaps(GapSpec):
    """Classical middle-thirds set: ``|G_j| = 3^-(|j|+1)``, ``|I_j| = 3^-|j|``."""

    tag = "mt3"

    def __init__(self, root_left=0.0, depth_cap=DEFAULT_DEPTH_CAP):
        self.root_left = float(root_left)
        self.depth_cap = depth_cap

    def _gaps(self, level, idx):
        return np.full((idx.size, 1), 3.0 ** -(level + 1))

    def _tail(self, level, idx):
        v = np.full(idx.size, 3.0 ** -level)
        return widen(v, v, 1)


class GapTable(GapSpec):
    """Explicit finite gap table.

    ``levels[k]`` holds the gaps of level ``k`` with shape ``(n^k, n-1)``;
    ``leaves`` the lengths of the basic intervals at the last level ``D``.
    ``leaves_hi`` (optional) turns the leaf lengths into a bracket, which is
    how a custom tail bound is supplied.  Without leaves the table can only
    produce non-rigorous lower estimates.
    """

    tag = "table"
    gap_ulps = 0

    def __init__(self, levels, leaves=None, n=2, root_left=0.0, leaves_hi=None,
                 depth_cap=DEFAULT_DEPTH_CAP):
        self.n = int(n)
        if self.n < 2:
            raise DomainError("branching factor must be >= 2")
        arrs = []
        for k, g in enumerate(levels):
            g = np.asarray(g, dtype=float).reshape(self.n ** k, self.n - 1)
            if not np.all(np.isfinite(g)) or np.any(g <= 0):
                raise DomainError(f"gaps at level {k} must be finite and positive")
            arrs.append(g)
        self.levels = arrs
        self.max_level = len(arrs)
        D = self.max_level
        self.leaves = None if leaves is None else np.asarray(leaves, dtype=float).reshape(self.n ** D)
        if leaves_hi is not None and leaves is None:
            raise DomainError("leaves_hi needs leaves")
        self.leaves_hi = None if leaves_hi is None else np.asarray(leaves_hi, dtype=float).reshape(self.n ** D)
        if self.leaves is not None and np.any(self.leaves <= 0):
            raise DomainError("leaf lengths must be positive")
        if self.leaves_hi is not None and np.any(self.leaves_hi < self.leaves):
            raise DomainError("leaves_hi below leaves")
        self.root_left = float(root_left)
        self.depth_cap = depth_cap

    @property
    def has_tail(self):
        return self.leaves is not None

    def describe(self):
        return {**super().describe(), "depth": self.max_level}

    def _gaps(self, level, idx):
        return self.levels[level][idx]

    def _tail(self, level, idx):
        if level != self.max_level:
            raise DomainError(f"table leaves live at level {self.max_level}, not {level}")
        if self.leaves is None:
            raise UnsupportedRigorError("table has no leaf lengths or tail bound")
        hi = self.leaves if self.leaves_hi is None else self.leaves_hi
        return self.leaves[idx].copy(), hi[idx].copy()

    def leaf_estimate(self, idx):
        if self.leaves is None:
            return np.zeros(len(idx)), np.zeros(len(idx))
        return self._tail(self.max_level, idx)

    @classmethod
    def from_records(cls, records, n=2, root_left=0.0, depth_cap=DEFAULT_DEPTH_CAP):
        """Build from ``(word, gap_index, length)``; gap_index ``"L"`` marks a leaf."""
        gaps = {}
        leaves = {}
        for word, gi, length in records:
            a = word if isinstance(word, Address) else Address.parse(str(word), n)
            if str(gi).upper() == "L":
                leaves[a] = float(length)
            else:
                gaps[(a, int(gi))] = float(length)
        depth = 1 + max((a.level for a, _ in gaps), default=-1)
        if leaves:
            leaf_levels = {a.level for a in leaves}
            if leaf_levels != {depth}:
                raise DomainError(f"leaf records must all sit at level {depth}")
        levels = []
        for k in range(depth):
            g = np.empty((n ** k, n - 1))
            for l in range(n ** k):
                a = Address.from_index(k, l, n)
                for gi in range(n - 1):
                    try:
                        g[l, gi] = gaps[(a, gi)]
                    except KeyError:
                        raise DomainError(f"missing gap {a} {gi}") from None
            levels.append(g)
        leaf_arr = None
        if leaves:
            if len(leaves) != n ** depth:
                raise DomainError(f"need {n ** depth} leaf records, got {len(leaves)}")
            leaf_arr = np.array([leaves[Address.from_index(depth, l, n)] for l in range(n ** depth)])
        return cls(levels, leaf_arr, n=n, root_left=root_left, depth_cap=depth_cap)

    def records(self):
        for k, g in enumerate(self.levels):
            for l in range(self.n ** k):
                a = Address.from_index(k, l, self.n)
                for gi in range(self.n - 1):
                    yield a, str(gi), float(g[l, gi])
        if self.leaves is not None:
            for l in range(self.n ** self.max_level):
                yield Address.from_index(self.max_level, l, self.n), "L", float(self.leaves[l])

    def mirrored(self) -> "GapTable":
        """The left-right reflection of this table."""
        levels = [g[::-1, ::-1].copy() for g in self.levels]
        leaves = None if self.leaves is None else self.leaves[::-1].copy()
        leaves_hi = None if self.leaves_hi is None else self.leaves_hi[::-1].copy()
        return GapTable(levels, leaves, n=self.n, root_left=self.root_left,
                        leaves_hi=leaves_hi, depth_cap=self.depth_cap)


_HEADER = re.compile(r"n\s*=\s*(\d+)|left\s*=\s*([-+0-9.eE]+)")


def load_gap_table(path) -> GapTable:
    """Read a gap table file.

    First non-comment line is the header, e.g. ``cantor-gaps n=2 left=0``;
    every further line is ``word gap_index length`` with ``-`` for the empty
    word and gap_index ``L`` for a leaf interval length.
    """
    lines = [ln.split("#", 1)[0].strip() for ln in Path(path).read_text().splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise DomainError(f"{path}: empty gap table")
    n, left = 2, 0.0
    for m in _HEADER.finditer(lines[0]):
        if m.group(1):
            n = int(m.group(1))
        if m.group(2):
            left = float(m.group(2))
    records = []
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 3:
            raise DomainError(f"{path}: bad record {ln!r}")
        records.append(tuple(parts))
    return GapTable.from_records(records, n=n, root_left=left)


def dump_gap_table(table: GapTable, path) -> None:
    out = [f"cantor-gaps n={table.n} left={table.root_left!r}"]
    for a, gi, length in table.records():
        out.append(f"{a} {gi} {length!r}")
    Path(path).write_text("\n".join(out) + "\n")


# ---------------------------------------------------------------- geometry


@dataclass(frozen=True)
class IntervalGeometry:
    """Bracketed length and left endpoint of a basic or near-basic interval."""

    address: object
    length_lo: float
    length_hi: float
    left_lo: float
    left_hi: float

    @property
    def right_lo(self):
        return float(add_down(self.left_lo, self.length_lo))

    @property
    def right_hi(self):
        return float(add_up(self.left_hi, self.length_hi))

    @property
    def mid_lo(self):
        return float(add_down(self.left_lo, 0.5 * self.length_lo))

    @property
    def mid_hi(self):
        return float(add_up(self.left_hi, 0.5 * self.length_hi))

    @property
    def length(self):
        return 0.5 * (self.length_lo + self.length_hi)

    @property
    def width(self):
        return self.length_hi - self.length_lo


@dataclass
class LevelGeometry:
    """All basic intervals of one level, as arrays in left-to-right order."""

    level: int
    n: int
    length_lo: np.ndarray
    length_hi: np.ndarray
    left_lo: np.ndarray
    left_hi: np.ndarray
    # gap between interval i and i+1, shape (N-1,)
    between_lo: np.ndarray
    between_hi: np.ndarray
    truncation_level: int
    rigorous: bool = True
    pyramid: list = field(default_factory=list, repr=False)

    def __len__(self):
        return self.length_lo.size

    @property
    def right_lo(self):
        return add_down(self.left_lo, self.length_lo)

    @property
    def right_hi(self):
        return add_up(self.left_hi, self.length_hi)

    @property
    def mid_lo(self):
        return add_down(self.left_lo, 0.5 * self.length_lo)

    @property
    def mid_hi(self):
        return add_up(self.left_hi, 0.5 * self.length_hi)

    def interval(self, i) -> IntervalGeometry:
        return IntervalGeometry(Address.from_index(self.level, int(i), self.n),
                                float(self.length_lo[i]), float(self.length_hi[i]),
                                float(self.left_lo[i]), float(self.left_hi[i]))

    def lengths_at(self, level):
        """Length brackets of an intermediate level 0..self.level."""
        return self.pyramid[level]


def _leaf_bounds(spec, L, idx, rigorous):
    if isinstance(spec, GapTable) and not rigorous:
        return spec.leaf_estimate(idx)
    if not spec.has_tail:
        if rigorous:
            raise UnsupportedRigorError(f"{spec.tag} spec has no tail bound; pass rigorous=False")
        z = np.zeros(len(idx))
        return z, z.copy()
    return spec.tail_bounds(L, idx)


def subtree_lengths(spec: GapSpec, level: int, idx, depth: int = DEFAULT_TRUNCATION,
                    rigorous: bool = True):
    """Length brackets of the basic intervals ``idx`` at ``level``.

    Sums every gap inside each interval down to the truncation level and
    brackets the remainder with the spec's tail bound.
    """
    spec.check_level(level)
    n = spec.n
    idx = np.atleast_1d(np.asarray(idx, dtype=np.int64))
    L = spec.truncation_level(level, depth)
    h = L - level
    leaf = (idx[:, None] * n ** h + np.arange(n ** h, dtype=np.int64)[None, :]).ravel()
    lo, hi = _leaf_bounds(spec, L, leaf, rigorous)
    for lev in range(L - 1, level - 1, -1):
        parents = leaf // n ** (L - lev)
        parents = parents[:: n ** (L - lev)]
        g_lo, g_hi = spec.gap_bounds(lev, parents)
        lo, hi = reduce_level(lo, hi, g_lo, g_hi, n)
    return lo, hi


def level_geometry(spec: GapSpec, level: int, depth: int = DEFAULT_TRUNCATION,
                   rigorous: bool = True) -> LevelGeometry:
    """Brackets for every basic interval of ``level``.

    Lengths are reduced bottom-up from the truncation level; left endpoints
    are propagated top-down from the root placement.
    """
    if level > spec.depth_cap:
        raise DomainError(f"level {level} exceeds the depth cap {spec.depth_cap}")
    spec.check_level(level)
    n = spec.n
    L = spec.truncation_level(level, depth)
    lo, hi = _leaf_bounds(spec, L, np.arange(n ** L, dtype=np.int64), rigorous)
    pyramid = [None] * (level + 1)
    if L == level:
        pyramid[level] = (lo, hi)
    for lev in range(L - 1, -1, -1):
        g_lo, g_hi = spec.gap_bounds(lev)
        lo, hi = reduce_level(lo, hi, g_lo, g_hi, n)
        if lev <= level:
            pyramid[lev] = (lo, hi)

    left_lo = np.array([spec.root_left])
    left_hi = left_lo.copy()
    bet_lo = np.empty(0)
    bet_hi = np.empty(0)
    for lev in range(level):
        c_lo, c_hi = pyramid[lev + 1]
        g_lo, g_hi = spec.gap_bounds(lev)
        m = n ** lev
        nl = np.empty((m, n))
        nh = np.empty((m, n))
        nl[:, 0] = left_lo
        nh[:, 0] = left_hi
        cl = c_lo.reshape(m, n)
        ch = c_hi.reshape(m, n)
        for c in range(1, n):
            nl[:, c] = add_down(add_down(nl[:, c - 1], cl[:, c - 1]), g_lo[:, c - 1])
            nh[:, c] = add_up(add_up(nh[:, c - 1], ch[:, c - 1]), g_hi[:, c - 1])
        left_lo = nl.ravel()
        left_hi = nh.ravel()
        b_lo = np.empty(m * n - 1)
        b_hi = np.empty(m * n - 1)
        inner = (np.arange(m)[:, None] * n + np.arange(n - 1)[None, :]).ravel()
        b_lo[inner] = g_lo.ravel()
        b_hi[inner] = g_hi.ravel()
        if m > 1:
            outer = np.arange(1, m) * n - 1
            b_lo[outer] = bet_lo
            b_hi[outer] = bet_hi
        bet_lo, bet_hi = b_lo, b_hi

    length_lo, length_hi = pyramid[level]
    return LevelGeometry(level, n, length_lo, length_hi, left_lo, left_hi,
                         bet_lo, bet_hi, L, rigorous, pyramid)


def interval_geometry(spec: GapSpec, j: Address, truncation_depth: int = DEFAULT_TRUNCATION,
                      rigorous: bool = True) -> IntervalGeometry:
    """Bracket of ``|I_j|`` and of its left endpoint.

    The length is truncated ``truncation_depth`` levels below ``j``; the
    left endpoint adds, along the path from the root, every left sibling
    (truncated at the same relative depth) and the gap after it.
    """
    if truncation_depth < 0:
        raise DomainError("truncation depth must be >= 0")
    if j.n != spec.n:
        raise DomainError(f"address is {j.n}-ary but the spec is {spec.n}-ary")
    if j.level > spec.depth_cap:
        raise DomainError(f"address deeper than the depth cap {spec.depth_cap}")
    spec.check_level(j.level)
    n = spec.n
    lo, hi = subtree_lengths(spec, j.level, [j.index], truncation_depth, rigorous)
    left_lo = left_hi = spec.root_left
    prefix = 0
    for lev, sym in enumerate(j.word):
        if sym:
            sib = prefix * n + np.arange(sym)
            s_lo, s_hi = subtree_lengths(spec, lev + 1, sib, truncation_depth, rigorous)
            g_lo, g_hi = spec.gap_bounds(lev, [prefix])
            for c in range(sym):
                left_lo = float(add_down(add_down(left_lo, s_lo[c]), g_lo[0, c]))
                left_hi = float(add_up(add_up(left_hi, s_hi[c]), g_hi[0, c]))
        prefix = prefix * n + sym
    return IntervalGeometry(j, float(lo[0]), float(hi[0]), float(left_lo), float(left_hi))


def _span_order(left_at: Address, right_at: Address):
    M = max(left_at.level, right_at.level)
    n = left_at.n
    first = left_at.index * n ** (M - left_at.level)
    last = (right_at.index + 1) * n ** (M - right_at.level) - 1
    return first, last


def near_basic_interval(spec: GapSpec, left_at: Address, right_at: Address,
                        depth: int = DEFAULT_TRUNCATION, rigorous: bool = True) -> IntervalGeometry:
    """Interval from the left endpoint of ``I_left_at`` to the right endpoint of ``I_right_at``."""
    first, last = _span_order(left_at, right_at)
    if first > last:
        raise DomainError(f"span {left_at}..{right_at} is inverted")
    a = interval_geometry(spec, left_at, depth, rigorous)
    if left_at == right_at:
        return a
    b = interval_geometry(spec, right_at, depth, rigorous)
    length_lo = float(sub_down(b.right_lo, a.left_hi))
    length_hi = float(sub_up(b.right_hi, a.left_lo))
    return IntervalGeometry((left_at, right_at), max(length_lo, 0.0), length_hi,
                            a.left_lo, a.left_hi)


# ---------------------------------------------------------------- measure


def _normalize(addresses: Sequence[Address]):
    uniq = sorted(set(addresses), key=lambda a: (a.level, a.word))
    kept = []
    for a in uniq:
        if not any(k.is_prefix_of(a) for k in kept):
            kept.append(a)
    return kept


def cantor_measure(addresses: Sequence[Address]) -> Fraction:
    """Exact Cantor measure of a union of basic intervals.

    Nested addresses are normalized by dropping descendants, so the result
    is ``sum n^-|j|`` over the remaining disjoint intervals.
    """
    total = Fraction(0)
    for a in _normalize(list(addresses)):
        total += Fraction(1, a.n ** a.level)
    return total


def global_gap_order(level, index):
    """Position ``2^k + l`` of a binary gap in the decreasing-gap ordering."""
    return 2 ** level + index
