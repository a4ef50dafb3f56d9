"""Built-in Cantor set families, their paired gauges and closed-form measures."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from . import gauge as _gauge
from .core import (DomainError, FloorPowerGaps, GapSpec, MiddleThirdsGaps, NaryPowerGaps,
                   PowerGaps, load_gap_table)


@dataclass
class Family:
    tag: str
    params: dict
    spec: GapSpec
    gauge: _gauge.GaugeFunction
    closed_form: Optional[float] = None
    # theorem verifiers are binary-only
    binary_theory: bool = True
    notes: list = field(default_factory=list)

    @property
    def name(self):
        if not self.params:
            return self.tag
        return f"{self.tag}:" + ",".join(f"{k}={v:g}" if isinstance(v, float) else f"{k}={v}"
                                         for k, v in self.params.items())


def cp_closed_form(p):
    return 2.0 * math.log(2.0) / (2.0 ** p - 2.0) ** (1.0 / p)


def cpx_closed_form(p, x):
    return (1.0 / (1.0 - 2.0 / x ** p)) ** (math.log(2.0) / (p * math.log(x)))


def cpn_closed_form(p, n):
    return n * math.log(n) / (n ** p - n) ** (1.0 / p) / (n - 1)


def cp_length_bounds(k, l, p):
    """Classical bracket ``c (2^k+l+1)^-p <= |I_l^k| <= c (2^k+l)^-p``, ``c = 2^p/(2^p-2)``."""
    c = 2.0 ** p / (2.0 ** p - 2.0)
    return c * (2.0 ** k + l + 1) ** -p, c * (2.0 ** k + l) ** -p


def cp_ratio_bounds(k, l, p):
    """Bounds on ``h(I)/nu(I)`` for every basic interval inside ``I_l^k`` (gauge ``delta^(1/p)``)."""
    c = 2.0 / (2.0 ** p - 2.0) ** (1.0 / p)
    return c / (1.0 + (l + 1) / 2.0 ** k), c / (1.0 + l / 2.0 ** k)


def cpx_eps0(k, p, x):
    return 1.0 - (1.0 + 2.0 ** k / x ** k) ** -p


def cpx_eps1(k, p, x):
    if k == 0:
        return math.inf
    return (1.0 - x ** -k) ** -p - 1.0


def cpx_length_bounds(k, p, x):
    """Level-uniform bracket of ``|I_l^k|`` for C_{p,x}: ``x^-kp/(1-2/x^p)`` times ``(1-eps0, 1+eps1)``."""
    base = x ** (-k * p) / (1.0 - 2.0 / x ** p)
    return base * (1.0 - cpx_eps0(k, p, x)), base * (1.0 + cpx_eps1(k, p, x))


def make_Cp(p) -> Family:
    if not p > 1:
        raise DomainError(f"p must be > 1, got {p}")
    p = float(p)
    return Family("cp", {"p": p}, PowerGaps(p), _gauge.power(1.0 / p), cp_closed_form(p))


def make_Cpx(p, x) -> Family:
    if not p > 1 or not x > 2:
        raise DomainError(f"need p > 1 and x > 2, got p={p}, x={x}")
    p, x = float(p), float(x)
    return Family("cpx", {"p": p, "x": x}, FloorPowerGaps(p, x), _gauge.log_power(p, x),
                  cpx_closed_form(p, x))


def make_Cpn(p, n, ordering="interval") -> Family:
    if not p > 1:
        raise DomainError(f"p must be > 1, got {p}")
    if int(n) != n or n < 2:
        raise DomainError(f"n must be an integer >= 2, got {n}")
    p, n = float(p), int(n)
    fam = Family("cpn", {"p": p, "n": n}, NaryPowerGaps(p, n, ordering), _gauge.power(1.0 / p),
                 cpn_closed_form(p, n), binary_theory=(n == 2))
    if ordering != "interval":
        fam.params["ordering"] = ordering
    fam.notes.append("closed-form and cover-convergence only; theorem verifiers are binary-only")
    return fam


def cpn_cover_limit(p, n, ordering="interval"):
    """Limit of the uniform level-k cover sums for the n-ary family.

    Each level-k interval has length ``c_n (n^k + s l)^-p (1 + o(1))`` with
    ``c_n = (n-1) n^p / (n^p - n)`` and ``s = 1`` (interval ordering) or
    ``s = n - 1`` (global ordering), so the cover sum is a Riemann sum of
    ``c_n^(1/p) / (1 + s t)`` over ``t in [0, 1]``.
    """
    c = ((n - 1) * n ** p / (n ** p - n)) ** (1.0 / p)
    s = 1.0 if ordering == "interval" else n - 1.0
    return c * math.log(1.0 + s) / s


def make_middle_thirds() -> Family:
    return Family("mt3", {}, MiddleThirdsGaps(), _gauge.power(math.log(2.0) / math.log(3.0)), 1.0)


def _kv(arg):
    out = {}
    for part in arg.split(","):
        if not part.strip():
            continue
        k, _, v = part.partition("=")
        if not _:
            raise DomainError(f"expected key=value, got {part!r}")
        out[k.strip()] = v.strip()
    return out


def family_from_name(text: str) -> Family:
    """``cp:p=2``, ``cpx:p=2,x=3``, ``cpn:p=2,n=3[,ordering=global]``, ``mt3`` or ``table:PATH``."""
    kind, _, arg = text.partition(":")
    kind = kind.strip().lower()
    if kind == "table":
        spec = load_gap_table(arg)
        alpha = 0.5
        return Family("table", {"path": arg}, spec, _gauge.power(alpha), None,
                      binary_theory=(spec.n == 2), notes=["gauge defaults to power:1/2"])
    try:
        kv = _kv(arg)
        num = lambda key: float(Fraction(kv[key]))
        if kind == "cp":
            return make_Cp(num("p"))
        if kind == "cpx":
            return make_Cpx(num("p"), num("x"))
        if kind == "cpn":
            return make_Cpn(num("p"), int(num("n")), kv.get("ordering", "interval"))
        if kind in ("mt3", "middle-thirds"):
            return make_middle_thirds()
    except KeyError as exc:
        raise DomainError(f"{text!r} is missing parameter {exc}") from None
    except ValueError as exc:
        raise DomainError(f"bad parameters in {text!r}: {exc}") from None
    raise DomainError(f"unknown family {text!r}")
