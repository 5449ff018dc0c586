"""The univariate one-sided amplifier ``P = p1**d * p2(p1) * p3``.

``P`` is meant to stay close to 1 near the origin and to decay like
``eps / t**d`` on ``(2, n]``.  The three factors:

* ``p1(t) = T_{d1+1}(1 - 2(t-a)/(n-a)) / T_{d1+1}(1 + 2a/(n-a))`` squeezes
  ``[a, n]`` into ``[-1/T, 1/T]`` while ``p1(0) = 1`` (``a`` is the anchor,
  1 by default);
* ``p2(s) = sum_{i<=D} C(i+d-1, i) (1-s)**i``, so that ``s**d * p2(s)`` is the
  probability that ``Bin(d+D, s)`` reaches ``d``;
* ``p3 = B_{d3}(amp_scale * T_m(1 + (2-t)/n))`` with ``m = isqrt(n)`` and
  ``B`` a Bernstein tail (or the alternative product reading).

Every constant is a field of :class:`AmplifierParams`.  Tuned values live in
a key=value constants file, one section per ``(n, d, eps)`` bucket.
"""

from __future__ import annotations

import configparser
import csv
import io
import math
import os
import warnings
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from math import comb, isqrt
from typing import Iterable, Sequence

import numpy as np

from .exactpoly import (
    Polynomial,
    affine,
    chebyshev,
    chebyshev_value,
    clear_denominators,
    compose,
    power,
)

CONSTANTS_ENV = "PTFDL_CONSTANTS"
E7_RATIONAL = Fraction(1, 1097)

READINGS = ("bernstein", "literal")


class AmplifierValidationError(RuntimeError):
    def __init__(self, report: "ValidationReport"):
        self.report = report
        super().__init__(report.summary())


def _log2_ceil_inv(eps: Fraction) -> int:
    # ceil(log2(1/eps)) for rational eps
    k = 0
    while Fraction(1, 2**k) > eps:
        k += 1
    return k


@dataclass(frozen=True)
class AmplifierParams:
    n: int
    d: int
    eps: Fraction
    d1: int
    D: int
    d3: int
    amp_scale: Fraction = E7_RATIONAL
    amp_lo: int = 0
    reading: str = "bernstein"
    p1_anchor: int = 1
    inner_power: int = 1

    def __post_init__(self):
        object.__setattr__(self, "eps", Fraction(self.eps))
        object.__setattr__(self, "amp_scale", Fraction(self.amp_scale))
        if self.n < 3:
            raise ValueError("amplifier range n must be >= 3")
        if self.d < 1:
            raise ValueError("decay exponent d must be >= 1")
        if not 0 < self.eps < 1:
            raise ValueError("eps must lie in (0, 1)")
        if self.d1 < 1 or self.d3 < 1 or self.D < 0:
            raise ValueError("need d1 >= 1, d3 >= 1, D >= 0")
        if not 0 < self.amp_scale < 1:
            raise ValueError("amp_scale must lie in (0, 1)")
        if not 0 <= self.amp_lo <= self.d3:
            raise ValueError("amp_lo must lie in [0, d3]")
        if self.reading not in READINGS:
            raise ValueError(f"reading must be one of {READINGS}")
        if not 0 <= self.p1_anchor < self.n or self.inner_power < 1:
            raise ValueError("need 0 <= p1_anchor < n and inner_power >= 1")

    @classmethod
    def defaults(cls, n: int, d: int, eps) -> "AmplifierParams":
        """The untuned schedule: ``d1 = isqrt(2(n-1))``, ``D = 4(d + L)``, ``d3 = 8L``."""
        eps = Fraction(eps)
        L = _log2_ceil_inv(eps)
        d3 = 8 * L
        return cls(
            n=n,
            d=d,
            eps=eps,
            d1=isqrt(2 * (n - 1)),
            D=4 * (d + L),
            d3=d3,
            amp_scale=E7_RATIONAL,
            amp_lo=math.ceil(Fraction(5, 2) * d3 / 1097),
        )

    def predicted_degree(self) -> int:
        return (self.d + self.D) * (self.d1 + 1) + p3_degree(self)

    def as_dict(self) -> dict:
        return {
            "d1": self.d1,
            "D": self.D,
            "d3": self.d3,
            "amp_scale": str(self.amp_scale),
            "amp_lo": self.amp_lo,
            "reading": self.reading,
            "p1_anchor": self.p1_anchor,
            "inner_power": self.inner_power,
        }


def p3_degree(params: AmplifierParams) -> int:
    m = isqrt(params.n)
    if params.reading == "bernstein":
        if params.amp_lo == 0:
            return 0  # full Bernstein sum is identically 1
        return params.d3 * m * params.inner_power
    return 2 * params.d3 * m * params.inner_power


# the three factors


def build_p1(n: int, d1: int, anchor: int = 1) -> Polynomial:
    if n < 3:
        raise ValueError("n must be >= 3")
    span = Fraction(n - anchor)
    top = 1 + 2 * Fraction(anchor) / span
    inner = affine(top, -2 / span)
    tm = chebyshev(d1 + 1)
    return compose(tm, inner).scale(1 / chebyshev_value(d1 + 1, top))


def p1_denominator(n: int, d1: int, anchor: int = 1) -> Fraction:
    return chebyshev_value(d1 + 1, 1 + Fraction(2 * anchor, n - anchor))


def build_p2(d: int, D: int) -> Polynomial:
    if d < 1 or D < 0:
        raise ValueError("need d >= 1 and D >= 0")
    one_minus = affine(1, -1)
    out = Polynomial.const(0, 1)
    term = Polynomial.const(1, 1)
    for i in range(D + 1):
        out = out + term.scale(comb(i + d - 1, i))
        term = term * one_minus
    return out


def _tail_polynomial(d3: int, lo: int, reading: str) -> Polynomial:
    u = Polynomial.var(1)
    one_minus = affine(1, -1)
    out = Polynomial.const(0, 1)
    for i in range(lo, d3 + 1):
        other = d3 - i if reading == "bernstein" else i
        out = out + (power(u, i) * power(one_minus, other)).scale(comb(d3, i))
    return out


def build_p3(
    n: int,
    d3: int,
    amp_scale,
    amp_lo: int,
    reading: str = "bernstein",
    inner_power: int = 1,
) -> Polynomial:
    m = isqrt(n)
    arg = affine(1 + Fraction(2, n), Fraction(-1, n))
    inner = power(compose(chebyshev(m), arg), inner_power).scale(Fraction(amp_scale))
    return compose(_tail_polynomial(d3, amp_lo, reading), inner)


# validation


@dataclass(frozen=True)
class ValidationPoint:
    t: Fraction
    value: Fraction
    bound: Fraction
    margin: Fraction
    passed: bool
    region: str  # "near" on [0,1], "far" on (2,n], "free" elsewhere


@dataclass
class ValidationReport:
    n: int
    d: int
    eps: Fraction
    points: list = field(default_factory=list)
    warning: str = ""

    @property
    def passed(self) -> bool:
        return all(p.passed for p in self.points)

    @property
    def failures(self) -> list:
        return [p for p in self.points if not p.passed]

    def worst_ratio(self) -> Fraction:
        ratios = [p.margin / p.bound for p in self.points if p.region != "free"]
        return max(ratios, default=Fraction(0))

    def summary(self) -> str:
        head = f"amplifier n={self.n} d={self.d} eps={self.eps}: "
        if not self.points:
            return head + "vacuous pass (empty grid)"
        if self.passed:
            return head + f"pass on {len(self.points)} points, worst margin/bound {float(self.worst_ratio()):.4f}"
        bad = self.failures[0]
        return (
            head
            + f"FAIL at t={bad.t}: value {float(bad.value):.6g}, margin {float(bad.margin):.6g} > bound {float(bad.bound):.6g}"
            + f" ({len(self.failures)} failing points)"
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["point", "value", "bound", "margin", "pass"])
        for p in self.points:
            w.writerow([str(p.t), str(p.value), str(p.bound), str(p.margin), int(p.passed)])
        return buf.getvalue()

    def to_text(self) -> str:
        lines = [self.summary()]
        for p in self.points:
            flag = "ok " if p.passed else "BAD"
            lines.append(f"{flag} t={p.t} region={p.region} margin={float(p.margin):.6g} bound={float(p.bound):.6g}")
        return "\n".join(lines) + "\n"


def selector_grid(n: int) -> list[Fraction]:
    """The points selector forms actually take: 0 and the integers 3..n."""
    return [Fraction(0)] + [Fraction(t) for t in range(3, n + 1)]


def default_grid(n: int, density: int = 10) -> list[Fraction]:
    pts = {Fraction(j, density) for j in range(density + 1)}
    pts.update(Fraction(t) for t in range(3, n + 1))
    return sorted(pts)


def _horner(coeffs: Sequence[int], t: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * t + c
    return acc


def check_points(poly: Polynomial, n: int, d: int, eps, grid: Iterable) -> ValidationReport:
    eps = Fraction(eps)
    scaled, C = clear_denominators(poly)
    coeffs = [int(c) for c in scaled.univariate_coeffs()]
    rep = ValidationReport(n, d, eps)
    grid = [Fraction(t) for t in grid]
    if not grid:
        rep.warning = "empty validation grid"
        warnings.warn(rep.warning)
    for t in grid:
        if not 0 <= t <= n:
            raise ValueError(f"grid point {t} outside [0, {n}]")
        v = _horner(coeffs, t) / C
        if t <= 1:
            margin, bound, region = abs(v - 1), eps, "near"
        elif t > 2:
            margin, bound, region = abs(v), eps / t**d, "far"
        else:
            margin, bound, region = abs(v), Fraction(0), "free"
        ok = region == "free" or margin <= bound
        rep.points.append(ValidationPoint(t, v, bound, margin, ok, region))
    return rep


# assembly


@dataclass
class Amplifier:
    params: AmplifierParams
    poly: Polynomial
    int_poly: Polynomial
    C: int
    validation: ValidationReport

    @property
    def degree(self) -> int:
        return self.poly.degree()

    def log2_weight(self) -> float:
        return math.log2(self.int_poly.weight())

    def __call__(self, t) -> Fraction:
        return self.poly(t)

    def values_at(self, ts: Iterable[int]) -> list[Fraction]:
        coeffs = [int(c) for c in self.int_poly.univariate_coeffs()]
        return [_horner(coeffs, Fraction(t)) / self.C for t in ts]


def assemble(params: AmplifierParams) -> Polynomial:
    """The rational polynomial ``p1**d * p2(p1) * p3``."""
    p1 = build_p1(params.n, params.d1, params.p1_anchor)
    p2 = build_p2(params.d, params.D)
    p3 = build_p3(params.n, params.d3, params.amp_scale, params.amp_lo, params.reading, params.inner_power)
    return power(p1, params.d) * compose(p2, p1) * p3


def build_amplifier(params: AmplifierParams, grid=None, *, strict: bool = False) -> Amplifier:
    """Build ``P`` and validate it.

    ``grid`` defaults to :func:`selector_grid`.  With ``strict`` a failed
    validation raises :class:`AmplifierValidationError`; otherwise the report
    is attached and the caller decides.
    """
    poly = assemble(params)
    int_poly, C = clear_denominators(poly)
    grid = selector_grid(params.n) if grid is None else grid
    rep = check_points(poly, params.n, params.d, params.eps, grid)
    amp = Amplifier(params, poly, int_poly, C, rep)
    if strict and not rep.passed:
        raise AmplifierValidationError(rep)
    return amp


def validate_amplifier(A: Amplifier, grid=None) -> ValidationReport:
    grid = default_grid(A.params.n) if grid is None else grid
    return check_points(A.poly, A.params.n, A.params.d, A.params.eps, grid)


# constants file


def _section(n: int, d: int, eps) -> str:
    return f"n={n} d={d} eps={Fraction(eps)}"


def _parse_section(name: str) -> tuple:
    kv = dict(part.split("=") for part in name.split())
    return int(kv["n"]), int(kv["d"]), Fraction(kv["eps"])


def constants_path() -> str | None:
    return os.environ.get(CONSTANTS_ENV) or None


def read_constants(text: str) -> dict:
    cp = configparser.ConfigParser()
    cp.optionxform = str
    cp.read_string(text)
    out = {}
    for name in cp.sections():
        n, d, eps = _parse_section(name)
        s = cp[name]
        out[(n, d, eps)] = AmplifierParams(
            n=n,
            d=d,
            eps=eps,
            d1=s.getint("d1"),
            D=s.getint("D"),
            d3=s.getint("d3"),
            amp_scale=Fraction(s.get("amp_scale")),
            amp_lo=s.getint("amp_lo"),
            reading=s.get("reading", "bernstein"),
            p1_anchor=s.getint("p1_anchor", 1),
            inner_power=s.getint("inner_power", 1),
        )
    return out


def write_constants(table: dict, extra: dict | None = None) -> str:
    cp = configparser.ConfigParser()
    cp.optionxform = str
    for key in sorted(table, key=lambda k: (k[1], -k[2], k[0])):
        params = table[key]
        sec = {k: str(v) for k, v in params.as_dict().items()}
        for k, v in (extra or {}).get(key, {}).items():
            sec[k] = str(v)
        cp[_section(*key)] = sec
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


@lru_cache(maxsize=8)
def _load_constants_cached(path: str | None) -> dict:
    if path:
        with open(path) as fh:
            return read_constants(fh.read())
    text = resources.files("ptfdl").joinpath("constants.txt").read_text()
    return read_constants(text)


def load_constants(path: str | None = None) -> dict:
    return _load_constants_cached(path or constants_path())


def params_for(n: int, d: int, eps, *, path: str | None = None, tune: bool = True) -> AmplifierParams:
    """Frozen constants for the bucket if present, else a fresh tuning run."""
    eps = Fraction(eps)
    table = load_constants(path)
    if (n, d, eps) in table:
        return table[(n, d, eps)]
    if tune:
        return tune_amplifier(n, d, eps)
    return AmplifierParams.defaults(n, d, eps)


@lru_cache(maxsize=256)
def amplifier_for(n: int, d: int, eps, path: str | None = None) -> Amplifier:
    """Validated amplifier on the selector grid; raises if the constants do not hold."""
    return build_amplifier(params_for(n, d, Fraction(eps), path=path), strict=True)


# parameter sweep


def _cheb_float(m: int, x: np.ndarray) -> np.ndarray:
    prev, cur = np.ones_like(x), x.copy()
    if m == 0:
        return prev
    for _ in range(m - 1):
        prev, cur = cur, 2 * x * cur - prev
    return cur


def screen_values(params: AmplifierParams, ts: np.ndarray) -> np.ndarray:
    """Floating-point values of ``P`` at ``ts``; used only to rank candidates."""
    n, a = params.n, params.p1_anchor
    m = params.d1 + 1
    top = 1 + 2 * a / (n - a)
    p1 = _cheb_float(m, 1 - 2 * (ts - a) / (n - a)) / _cheb_float(m, np.array([top]))[0]
    p2 = sum(comb(i + params.d - 1, i) * (1 - p1) ** i for i in range(params.D + 1))
    u = float(params.amp_scale) * _cheb_float(isqrt(n), 1 + (2 - ts) / n) ** params.inner_power
    B = np.zeros_like(ts)
    for i in range(params.amp_lo, params.d3 + 1):
        other = params.d3 - i if params.reading == "bernstein" else i
        B = B + comb(params.d3, i) * u**i * (1 - u) ** other
    return p1**params.d * p2 * B


def _screen_ok(params: AmplifierParams, ts: np.ndarray, slack: float) -> bool:
    v = screen_values(params, ts)
    eps = float(params.eps)
    near = ts <= 1
    far = ts > 2
    if np.any(np.abs(v[near] - 1) > slack * eps):
        return False
    return not np.any(np.abs(v[far]) * ts[far] ** params.d > slack * eps)


def sweep_candidates(
    n: int,
    d: int,
    eps,
    *,
    grid: str = "selector",
    d1_max: int | None = None,
    D_max: int = 4,
    d3_max: int = 6,
    scales: Sequence = (E7_RATIONAL, Fraction(1, 8), Fraction(1, 4), Fraction(1, 2)),
    lo_max: int = 2,
    reading: str = "bernstein",
    anchor: int = 1,
    inner_power: int = 1,
    slack: float = 0.8,
):
    """Yield screened parameter sets in order of increasing predicted degree."""
    eps = Fraction(eps)
    pts = selector_grid(n) if grid == "selector" else default_grid(n)
    ts = np.array([float(t) for t in pts])
    d1_max = d1_max or max(8, 4 * isqrt(n) + 12)
    found = []
    for D in range(D_max + 1):
        for d3 in range(1, d3_max + 1):
            for lo in range(0, min(d3, lo_max) + 1):
                if reading == "bernstein" and lo == 0 and d3 > 1:
                    continue  # p3 is identically 1 for every d3
                for s in scales:
                    s = Fraction(s)
                    if s >= 1:
                        continue
                    for d1 in range(1, d1_max + 1):
                        p = AmplifierParams(n, d, eps, d1, D, d3, s, lo, reading, anchor, inner_power)
                        if _screen_ok(p, ts, slack):
                            found.append(p)
                            break
    found.sort(key=lambda p: (p.predicted_degree(), p.D, p.d3, p.d1))
    return found


def tune_amplifier(n: int, d: int, eps, *, grid: str = "selector", **kw) -> AmplifierParams:
    """Lowest-degree screened parameters that also pass the exact check."""
    eps = Fraction(eps)
    exact_grid = selector_grid(n) if grid == "selector" else default_grid(n)
    for p in sweep_candidates(n, d, eps, grid=grid, **kw):
        if build_amplifier(p, exact_grid).validation.passed:
            return p
    raise RuntimeError(f"no parameters found for n={n} d={d} eps={eps}; widen the sweep")


def with_params(params: AmplifierParams, **changes) -> AmplifierParams:
    return replace(params, **changes)
