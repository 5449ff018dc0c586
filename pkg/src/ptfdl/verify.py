"""Exhaustive oracles over enumerable domains.

Values of a polynomial on every point of a cube or Hamming ball are computed
with a subset-sum (zeta) transform over the down-closed set of point masks:
after multilinearizing, the value at ``x`` is the sum of the coefficients of
the monomials whose variable set is contained in ``x``.  The inverse (Moebius)
transform interpolates the unique multilinear polynomial supported on the
domain from its values and is used by the constructions.
"""

from __future__ import annotations

import csv
import io
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Sequence

import numpy as np

from .dlist import (
    AnyList,
    Domain,
    FullCube,
    HammingBall,
    check_cap,
    domain_masks,
    mask_to_vector,
)
from .exactpoly import Polynomial


class DownSet:
    """A down-closed family of bit masks with vectorized subset-sum transforms."""

    def __init__(self, masks: Sequence[int], nbits: int):
        self.masks = list(masks)
        self.nbits = nbits
        self.index = {m: i for i, m in enumerate(self.masks)}
        arr = np.array(self.masks, dtype=np.int64)
        order = np.argsort(arr, kind="stable")
        srt = arr[order]
        self._pairs = []
        for b in range(nbits):
            bitv = np.int64(1) << b
            hi = np.nonzero(arr & bitv)[0]
            if hi.size == 0:
                continue
            pos = np.searchsorted(srt, arr[hi] ^ bitv)
            if np.any(pos >= srt.size) or np.any(srt[np.minimum(pos, srt.size - 1)] != (arr[hi] ^ bitv)):
                raise ValueError("mask family is not down-closed")
            self._pairs.append((hi, order[pos]))

    def __len__(self) -> int:
        return len(self.masks)

    def zeta(self, values) -> np.ndarray:
        """``out[m] = sum of values[s]`` over members ``s`` contained in ``m``."""
        a = np.array(values, dtype=object)
        for hi, lo in self._pairs:
            a[hi] = a[hi] + a[lo]
        return a

    def mobius(self, values) -> np.ndarray:
        a = np.array(values, dtype=object)
        for hi, lo in self._pairs:
            a[hi] = a[hi] - a[lo]
        return a


def domain_downset(dom: Domain, cap: int | None = None) -> DownSet:
    return DownSet(domain_masks(dom, cap), dom.n)


def subsets_upto(varmask: int, k: int) -> list[int]:
    """All submasks of ``varmask`` with at most ``k`` bits, by increasing popcount."""
    bits = [1 << b for b in range(varmask.bit_length()) if varmask >> b & 1]
    levels = [[0]]
    for _ in range(min(k, len(bits))):
        nxt = set()
        for m in levels[-1]:
            for b in bits:
                if not m & b:
                    nxt.add(m | b)
        levels.append(sorted(nxt))
    return [m for lvl in levels for m in lvl]


def monomial_mask(mono, n: int) -> int:
    m = 0
    for v, _ in mono:
        m |= 1 << (n - v)
    return m


def integer_scaled(p: Polynomial) -> tuple[dict, int]:
    """Multilinear coefficients keyed by mask (n = p.nvars), scaled to integers by ``D``."""
    D = 1
    for _, c in p.items():
        D = lcm(D, c.denominator)
    return {mono: int(c * D) for mono, c in p.items()}, D


def values_on(p: Polynomial, ds: DownSet, n: int) -> tuple[np.ndarray, int]:
    """``(V, D)`` with ``V[i]/D = p(point i)`` for each member of ``ds``."""
    coeffs, D = integer_scaled(p)
    a = [0] * len(ds)
    for mono, c in coeffs.items():
        m = monomial_mask(mono, n)
        i = ds.index.get(m)
        if i is None:
            # the monomial needs more ones than any point of the domain has
            continue
        a[i] += c
    return ds.zeta(a), D


def labels_on(L: AnyList, masks: Sequence[int]) -> np.ndarray:
    """``eval_list`` on every mask, vectorized."""
    n = L.n
    arr = np.array(masks, dtype=np.int64)
    out = np.full(arr.shape, L.default, dtype=np.int64)
    undecided = np.ones(arr.shape, dtype=bool)
    for lit, b in L.items:
        fires = (arr >> (n - lit.var) & 1).astype(bool) != lit.negated
        hit = undecided & fires
        out[hit] = b
        undecided &= ~fires
    return out


def fires_any(L: AnyList, masks: Sequence[int]) -> np.ndarray:
    n = L.n
    arr = np.array(masks, dtype=np.int64)
    any_ = np.zeros(arr.shape, dtype=bool)
    for lit, _ in L.items:
        any_ |= (arr >> (n - lit.var) & 1).astype(bool) != lit.negated
    return any_


# outcomes


@dataclass(frozen=True)
class Counterexample:
    point: tuple
    expected: int
    got: Fraction
    kind: str  # "sign", "zero" or "deviation"


@dataclass
class VerifyOutcome:
    passed: bool
    counterexample: Counterexample | None
    points_checked: int
    max_deviation: Fraction | None = None
    exhaustive: bool = True

    def __post_init__(self):
        if self.passed != (self.counterexample is None):
            raise ValueError("passed must hold exactly when there is no counterexample")

    def to_text(self) -> str:
        mode = "exhaustive" if self.exhaustive else "sampled"
        lines = [f"status={'pass' if self.passed else 'fail'}", f"points={self.points_checked}", f"mode={mode}"]
        if self.max_deviation is not None:
            lines.append(f"max_deviation={self.max_deviation}")
        if self.counterexample:
            ce = self.counterexample
            bits = "".join(map(str, ce.point))
            lines.append(f"counterexample={bits} kind={ce.kind} expected={ce.expected} got={ce.got}")
        return "\n".join(lines) + "\n"

    def csv_row(self) -> list:
        ce = self.counterexample
        return [
            int(self.passed),
            self.points_checked,
            "" if self.max_deviation is None else str(self.max_deviation),
            "" if ce is None else "".join(map(str, ce.point)),
            "" if ce is None else ce.kind,
        ]


CSV_HEADER = ["passed", "points", "max_deviation", "counterexample", "kind"]


def outcomes_csv(rows: list[VerifyOutcome]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow(r.csv_row())
    return buf.getvalue()


def _chunks(total: int, parts: int) -> list[range]:
    parts = max(1, min(parts, total or 1))
    step = -(-total // parts)
    return [range(s, min(s + step, total)) for s in range(0, total, step)]


def _first_bad(pred, total: int, threads: int) -> int | None:
    """Smallest index in ``range(total)`` where ``pred`` flags a failure."""
    chunks = _chunks(total, threads)

    def scan(r):
        for i in r:
            if pred(i):
                return i
        return None

    if threads <= 1:
        hits = [scan(r) for r in chunks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            hits = list(ex.map(scan, chunks))
    hits = [h for h in hits if h is not None]
    return min(hits) if hits else None


def _check_weight_bound(V: np.ndarray, D: int, p: Polynomial) -> None:
    # |p(x)| <= weight(p) on 0/1 points, in the D-scaled integers
    W = sum(abs(int(c * D)) for _, c in p.items())
    big = max((abs(int(v)) for v in V), default=0)
    if big > W:
        raise AssertionError("evaluation exceeded the weight bound; transform is inconsistent")


def verify_sign(
    p: Polynomial,
    L: AnyList,
    dom: Domain,
    *,
    cap: int | None = None,
    threads: int = 1,
) -> VerifyOutcome:
    """``sign(p(x)) == L(x)`` and ``p(x) != 0`` on every point of ``dom``."""
    ds = domain_downset(dom, cap)
    V, D = values_on(p, ds, dom.n)
    _check_weight_bound(V, D, p)
    labels = labels_on(L, ds.masks)

    def bad(i):
        v = V[i]
        return v == 0 or (v > 0) != (labels[i] > 0)

    i = _first_bad(bad, len(ds), threads)
    if i is None:
        return VerifyOutcome(True, None, len(ds))
    v = Fraction(int(V[i]), D)
    kind = "zero" if v == 0 else "sign"
    return VerifyOutcome(False, Counterexample(mask_to_vector(ds.masks[i], dom.n), int(labels[i]), v, kind), len(ds))


def verify_eps(
    p: Polynomial,
    L: AnyList,
    dom: Domain,
    eps,
    *,
    cap: int | None = None,
    threads: int = 1,
) -> VerifyOutcome:
    """``|L(x) - p(x)| <= eps`` on every point; reports the largest deviation seen."""
    eps = Fraction(eps)
    ds = domain_downset(dom, cap)
    V, D = values_on(p, ds, dom.n)
    _check_weight_bound(V, D, p)
    labels = labels_on(L, ds.masks)
    # |L*D - v| * eps.den <= eps.num * D
    lim = eps.numerator * D

    def dev(i):
        return abs(int(labels[i]) * D - int(V[i]))

    i = _first_bad(lambda j: dev(j) * eps.denominator > lim, len(ds), threads)
    worst = max((dev(j) for j in range(len(ds))), default=0)
    max_dev = Fraction(worst, D)
    if i is None:
        return VerifyOutcome(True, None, len(ds), max_dev)
    ce = Counterexample(mask_to_vector(ds.masks[i], dom.n), int(labels[i]), Fraction(int(V[i]), D), "deviation")
    return VerifyOutcome(False, ce, len(ds), max_dev)


def verify_sign_sampled(p: Polynomial, L: AnyList, dom: Domain, samples: int, seed: int = 0) -> VerifyOutcome:
    """Uniform sampling for domains beyond the cap; never a substitute for exhaustive runs."""
    rng = random.Random(seed)
    n = dom.n
    for _ in range(samples):
        if isinstance(dom, FullCube):
            x = tuple(rng.randint(0, 1) for _ in range(n))
        else:
            w = _sample_ball_weight(rng, dom)
            ones = set(rng.sample(range(n), w))
            x = tuple(1 if j in ones else 0 for j in range(n))
        v = p.evaluate(x)
        want = L(x)
        if v == 0 or (v > 0) != (want > 0):
            kind = "zero" if v == 0 else "sign"
            return VerifyOutcome(False, Counterexample(x, want, v, kind), samples, exhaustive=False)
    return VerifyOutcome(True, None, samples, exhaustive=False)


def _sample_ball_weight(rng: random.Random, dom: HammingBall) -> int:
    from math import comb

    sizes = [comb(dom.n, i) for i in range(dom.k + 1)]
    return rng.choices(range(dom.k + 1), weights=sizes)[0]


@dataclass(frozen=True)
class Measure:
    degree: int
    weight: Fraction
    terms: int


def measure(p: Polynomial) -> Measure:
    return Measure(p.degree(), p.weight(), len(p))


def values_table(p: Polynomial, dom: Domain, cap: int | None = None) -> tuple[list[int], list[Fraction]]:
    """Masks and exact values of ``p`` on the whole domain, in enumeration order."""
    check_cap(dom, cap)
    ds = domain_downset(dom, cap)
    V, D = values_on(p, ds, dom.n)
    return ds.masks, [Fraction(int(v), D) for v in V]


class PointEvaluator:
    """Exact values at single points by summing coefficients over submasks.

    Cost is ``2**|x|`` per point, which beats a full term scan for the
    low-weight inputs of a Hamming ball.
    """

    def __init__(self, p: Polynomial, n: int | None = None):
        self.n = n or p.nvars
        coeffs, self.D = integer_scaled(p)
        self.table: dict = {}
        for mono, c in coeffs.items():
            m = monomial_mask(mono, self.n)
            self.table[m] = self.table.get(m, 0) + c

    def at_mask(self, mask: int) -> Fraction:
        total = 0
        sub = mask
        while True:
            total += self.table.get(sub, 0)
            if sub == 0:
                break
            sub = (sub - 1) & mask
        return Fraction(total, self.D)

    def __call__(self, x: Sequence[int]) -> Fraction:
        m = 0
        for b in x:
            m = (m << 1) | (1 if b else 0)
        return self.at_mask(m)
