"""Winnow over all monomials of degree at most ``d`` (Expanded-Winnow).

Each monomial ``m`` contributes two features, ``m(x)`` and ``1 - m(x)``, so a
PTF with mixed-sign coefficients is representable with positive weights.
Weights stay exact rationals.  Prediction is +1 iff the weighted sum of
active features reaches the threshold; mistakes multiply (label +1) or
divide (label -1) the active weights by ``alpha``.
"""

from __future__ import annotations

import csv
import io
import math
import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import combinations
from typing import Sequence

import numpy as np

from .dlist import AnyList, Domain, enumerate_domain, eval_list


def monomials_upto(n: int, d: int) -> list[tuple]:
    """Variable sets of size ``<= d``, by size then lexicographically; ``()`` first."""
    if d > n:
        raise ValueError(f"expansion degree {d} exceeds n={n}")
    return [c for i in range(d + 1) for c in combinations(range(1, n + 1), i)]


def monomial_values(x: Sequence[int], monos: Sequence[tuple]) -> list[int]:
    return [1 if all(x[v - 1] for v in m) else 0 for m in monos]


def expand_features(x: Sequence[int], d: int) -> tuple:
    """Monomial values followed by their complements."""
    vals = monomial_values(x, monomials_upto(len(x), d))
    return tuple(vals + [1 - v for v in vals])


@dataclass
class LearnerState:
    n: int
    d: int
    monomials: list
    weights: list
    theta: Fraction
    alpha: Fraction

    @classmethod
    def fresh(cls, n: int, d: int, alpha=2, theta=None) -> "LearnerState":
        monos = monomials_upto(n, d)
        count = 2 * len(monos)
        theta = Fraction(count if theta is None else theta)
        return cls(n, d, monos, [Fraction(1)] * count, theta, Fraction(alpha))

    @property
    def feature_count(self) -> int:
        return len(self.weights)

    def active(self, x: Sequence[int]) -> list[int]:
        vals = monomial_values(x, self.monomials)
        F = len(vals)
        return [i for i, v in enumerate(vals) if v] + [F + i for i, v in enumerate(vals) if not v]

    def score(self, x: Sequence[int]) -> Fraction:
        return sum((self.weights[i] for i in self.active(x)), Fraction(0))

    def predict(self, x: Sequence[int]) -> int:
        return 1 if self.score(x) >= self.theta else -1


def winnow_step(state: LearnerState, x: Sequence[int], label: int) -> tuple[int, LearnerState]:
    """Predict, then update on a mistake.  A correct prediction returns ``state`` itself."""
    act = state.active(x)
    s = sum((state.weights[i] for i in act), Fraction(0))
    pred = 1 if s >= state.theta else -1
    if pred == label:
        return pred, state
    factor = state.alpha if label > 0 else 1 / state.alpha
    w = list(state.weights)
    for i in act:
        w[i] *= factor
    return pred, replace(state, weights=w)


@dataclass(frozen=True)
class MistakeRecord:
    index: int
    point: tuple
    label: int
    prediction: int
    mistake: bool
    cumulative: int


@dataclass
class MistakeLog:
    n: int
    d: int
    records: list = field(default_factory=list)
    converged: bool = False
    passes: int = 0
    final_state: LearnerState | None = None

    @property
    def mistakes(self) -> int:
        return sum(1 for r in self.records if r.mistake)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["example", "input", "label", "prediction", "mistake", "cumulative"])
        for r in self.records:
            w.writerow([r.index, "".join(map(str, r.point)), r.label, r.prediction, int(r.mistake), r.cumulative])
        return buf.getvalue()


def bound_constant(mistakes: int, W, d: int, n: int) -> float:
    """``c = mistakes / (W d^2 ln n)``, computed in logs so huge ``W`` is fine."""
    if mistakes == 0:
        return 0.0
    W = Fraction(W)
    lw = math.log(W.numerator) - math.log(W.denominator)
    return math.exp(math.log(mistakes) - lw - 2 * math.log(d) - math.log(math.log(n)))


def summary_csv(n: int, d: int, W, mistakes: int) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    W = Fraction(W)
    log2W = math.log2(W.numerator) - math.log2(W.denominator)
    log2_bound = log2W + 2 * math.log2(d) + math.log2(math.log(n))
    w.writerow(["n", "d", "log2_W", "mistakes", "log2_bound", "c"])
    w.writerow([n, d, f"{log2W:.4f}", mistakes, f"{log2_bound:.4f}", f"{bound_constant(mistakes, W, d, n):.6g}"])
    return buf.getvalue()


def _stream(points: list, order: str, seed: int, pass_no: int) -> list:
    if order == "enumeration":
        return points
    if order == "reverse":
        return points[::-1]
    if order == "shuffled":
        pts = list(points)
        random.Random(seed * 1_000_003 + pass_no).shuffle(pts)
        return pts
    raise ValueError(f"unknown order {order!r}")


class _ExponentScore:
    """Exact ``sum(alpha**e_i) >= theta`` tests for weights that are powers of ``alpha``."""

    def __init__(self, alpha: Fraction, theta: Fraction):
        self.a, self.b = alpha.numerator, alpha.denominator
        self.tn, self.td = theta.numerator, theta.denominator
        self._pa: dict = {}
        self._pb: dict = {}

    def _pow(self, cache: dict, base: int, k: int) -> int:
        v = cache.get(k)
        if v is None:
            v = cache[k] = base**k
        return v

    def reaches(self, exps: np.ndarray) -> bool:
        lo, hi = int(exps.min()), int(exps.max())
        counts = np.bincount(exps - lo)
        span = hi - lo
        # S = sum_j c_j a^(lo+j) b^-(lo+j) = S' a^lo / b^hi with S' = sum c_j a^j b^(span-j)
        sp = sum(int(c) * self._pow(self._pa, self.a, j) * self._pow(self._pb, self.b, span - j) for j, c in enumerate(counts) if c)
        lhs = sp * self.td * self._pow(self._pa, self.a, max(lo, 0)) * self._pow(self._pb, self.b, max(-hi, 0))
        rhs = self.tn * self._pow(self._pb, self.b, max(hi, 0)) * self._pow(self._pa, self.a, max(-lo, 0))
        return lhs >= rhs


def run_online(
    L: AnyList,
    dom: Domain,
    d: int,
    passes: int = 200,
    *,
    alpha=2,
    theta=None,
    order: str = "enumeration",
    seed: int = 0,
    cap: int | None = None,
) -> MistakeLog:
    """Cycle through ``dom`` until a full pass has no mistakes or ``passes`` run out.

    Weights start at 1 and only ever change by factors of ``alpha``, so each is
    tracked as an integer exponent and scores are compared exactly.
    """
    points = list(enumerate_domain(dom, cap))
    state = LearnerState.fresh(L.n, d, alpha, theta)
    labels = {x: eval_list(L, x) for x in points}
    active = {x: np.array(state.active(x), dtype=np.int64) for x in points}
    exps = np.zeros(state.feature_count, dtype=np.int64)
    scorer = _ExponentScore(state.alpha, state.theta)
    log = MistakeLog(L.n, d)
    count = 0
    idx = 0
    for p in range(passes):
        clean = True
        for x in _stream(points, order, seed, p):
            act = active[x]
            pred = 1 if scorer.reaches(exps[act]) else -1
            lab = labels[x]
            miss = pred != lab
            if miss:
                clean = False
                count += 1
                exps[act] += 1 if lab > 0 else -1
            log.records.append(MistakeRecord(idx, x, lab, pred, miss, count))
            idx += 1
        log.passes = p + 1
        if clean:
            log.converged = True
            break
    log.final_state = replace(state, weights=[state.alpha ** int(e) for e in exps])
    return log
