"""Integer PTFs for decision lists on the cube and on Hamming balls.

A modified list ``(l_1,b_1),...,(l_h,b_h),0`` is approximated by

    p(x) = sum_i b_i * l~_i(x) * P(A_i(x)),    A_i = 3 * sum_{j<i} l~_j,

where ``P`` is the amplifier on the range of the selectors.  The list is
split into blocks, each block is integerized by its constant, and the blocks
are stacked with powers of three so that the first firing block dominates:

    H(x) = sum_i 3**(r-i+1) * p_i(x) + C * default.

Sublist polynomials are stored multilinear.  They are obtained by
interpolating the values of the formula above on the down-closed set of
supports the block can see (all subsets of its variables on the cube, those
of size at most ``k`` on a ball).  By uniqueness of multilinear interpolation
this is exactly the multilinear reduction of the formal composition on the
cube and its degree-``k`` truncation on the ball, which agrees with it at
every ball point.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .amplifier import Amplifier, amplifier_for
from .dlist import (
    AnyList,
    DecisionList,
    Domain,
    FullCube,
    HammingBall,
    Literal,
    ModifiedDecisionList,
    bit,
)
from .exactpoly import (
    Polynomial,
    affine,
    clear_denominators,
    compose,
    multilinearize,
    sum_polys,
)
from .verify import DownSet, domain_downset, fires_any, labels_on, subsets_upto, values_on

DEFAULT_EPS = Fraction(1, 100)
DECAY = 2


# arithmetization and selectors


def arithmetize(lit: Literal) -> Polynomial:
    return affine(1, -1, lit.var) if lit.negated else Polynomial.var(lit.var)


@dataclass(frozen=True)
class SelectorForm:
    i: int
    linear: Polynomial

    def __call__(self, x) -> Fraction:
        return self.linear.evaluate(x)


def selector(L: AnyList, i: int) -> SelectorForm:
    """``A_i = 3 * sum_{j<i} l~_j`` (1-based ``i``)."""
    if not 1 <= i <= max(len(L), 1):
        raise ValueError(f"selector index {i} outside [1, {len(L)}]")
    parts = [arithmetize(lit) for lit in L.literals[: i - 1]]
    return SelectorForm(i, sum_polys(parts).scale(3) if parts else Polynomial.const(0, L.n))


def feasible_on_ball(L: AnyList, i: int, k: int) -> bool:
    """Is there a point with at most ``k`` ones where ``l_1..l_{i-1}`` are all false?"""
    must_zero, must_one = set(), set()
    for lit in L.literals[: i - 1]:
        (must_one if lit.negated else must_zero).add(lit.var)
    if must_zero & must_one:
        return False
    return len(must_one) <= k


def max_selector_on_ball(L: AnyList, i: int, k: int) -> int:
    """Exact maximum of ``A_i`` over points with at most ``k`` ones."""
    gain: dict = {}
    base = 0
    for lit in L.literals[: i - 1]:
        if lit.negated:
            base += 1
            gain[lit.var] = gain.get(lit.var, 0) - 1
        else:
            gain[lit.var] = gain.get(lit.var, 0) + 1
    best = sorted((g for g in gain.values() if g > 0), reverse=True)[:k]
    return 3 * (base + sum(best))


# sublist approximation


def _varmask(L: AnyList) -> int:
    m = 0
    for lit in L.literals:
        m |= bit(L.n, lit.var)
    return m


def _mask_poly(coeffs: Sequence, masks: Sequence[int], n: int, scale: int = 1) -> Polynomial:
    terms = {}
    for c, m in zip(coeffs, masks):
        if c:
            mono = tuple((n - b, 1) for b in reversed(range(n)) if m >> b & 1)
            terms[mono] = Fraction(int(c), scale)
    return Polynomial(terms, n)


@dataclass
class SublistBuild:
    source: ModifiedDecisionList
    poly: Polynomial  # rational, multilinear
    amplifier: Amplifier | None
    amp_range: int
    kept: tuple
    eps: Fraction
    formal_degree: int

    @property
    def degree(self) -> int:
        return self.poly.degree()


def _amp_range_cube(L: AnyList) -> int:
    return max(3, 3 * len(L))


def _amp_range_ball(L: AnyList, k: int, kept: Sequence[bool]) -> int:
    top = max((max_selector_on_ball(L, i + 1, k) for i, keep in enumerate(kept) if keep), default=0)
    return max(3, 6 * k, top)


def sublist_plan(L: AnyList, eps=DEFAULT_EPS, dom: Domain | None = None) -> tuple:
    """``(kept, amp_range)`` without building any polynomial."""
    if isinstance(dom, HammingBall) and dom.k < dom.n:
        kept = tuple(feasible_on_ball(L, i + 1, dom.k) for i in range(len(L)))
        return kept, _amp_range_ball(L, dom.k, kept)
    return tuple(True for _ in L.items), _amp_range_cube(L)


def build_sublist(L: AnyList, eps=DEFAULT_EPS, dom: Domain | None = None) -> SublistBuild:
    """Approximate the modified list ``L`` to within ``eps`` on ``dom``.

    On a ball, terms whose prefix cannot be falsified within the ball are
    dropped and the amplifier range covers the largest selector value of the
    remaining terms (never below ``6k``).
    """
    eps = Fraction(eps)
    L = L if isinstance(L, ModifiedDecisionList) else ModifiedDecisionList(L.n, L.items)
    n = L.n
    dom = dom or FullCube(n)
    k = dom.k if isinstance(dom, HammingBall) else n
    kept, rng = sublist_plan(L, eps, dom)
    if not any(kept):
        return SublistBuild(L, Polynomial({}, n), None, rng, kept, eps, 0)
    amp = amplifier_for(rng, DECAY, eps / 2)
    steps = rng // 3 + 1
    pvals = amp.values_at(range(0, 3 * steps, 3))
    Dp = math.lcm(*(v.denominator for v in pvals))
    N = np.array([int(v * Dp) for v in pvals], dtype=object)

    masks = subsets_upto(_varmask(L), k)
    arr = np.array(masks, dtype=np.int64)
    cnt = np.zeros(arr.shape, dtype=np.int64)
    acc = np.zeros(arr.shape, dtype=object)
    for (lit, b), keep in zip(L.items, kept):
        fire = (arr >> (n - lit.var) & 1).astype(bool) != lit.negated
        if keep:
            idx = np.nonzero(fire)[0]
            acc[idx] = acc[idx] + b * N[cnt[idx]]
        cnt += fire
    coeffs = DownSet(masks, n).mobius(acc)
    poly = _mask_poly(coeffs, masks, n, Dp)
    return SublistBuild(L, poly, amp, rng, kept, eps, 1 + amp.degree)


def sublist_approx(L: AnyList, eps=DEFAULT_EPS, dom: Domain | None = None) -> Polynomial:
    return build_sublist(L, eps, dom).poly


def sublist_approx_formal(L: AnyList, eps=DEFAULT_EPS, *, reduce=multilinearize) -> Polynomial:
    """Direct composition ``sum b_i l~_i P(A_i)`` on the cube; slow, for cross-checks."""
    eps = Fraction(eps)
    amp = amplifier_for(_amp_range_cube(L), DECAY, eps / 2)
    out = []
    for i, (lit, b) in enumerate(L.items, start=1):
        inner = compose(amp.poly, selector(L, i).linear, reduce=reduce)
        term = inner * arithmetize(lit)
        out.append(reduce(term).scale(b) if reduce else term.scale(b))
    return sum_polys(out)


@dataclass
class SublistPTF:
    source: ModifiedDecisionList
    poly: Polynomial  # integer coefficients
    C: int
    eps_inner: Fraction
    formal_degree: int
    amp_range: int
    amplifier: Amplifier | None = None
    kept: tuple = ()


def sublist_ptf(L: AnyList, dom: Domain | None = None, eps_inner=DEFAULT_EPS) -> SublistPTF:
    b = build_sublist(L, eps_inner, dom)
    ip, C = clear_denominators(b.poly)
    return SublistPTF(b.source, ip, C, Fraction(eps_inner), b.formal_degree, b.amp_range, b.amplifier, b.kept)


# outer assembly


def decompose(L: DecisionList, h: int) -> tuple[list[ModifiedDecisionList], int]:
    if h < 1:
        raise ValueError("block size h must be >= 1")
    items = list(L.items)
    blocks = [ModifiedDecisionList(L.n, items[s : s + h]) for s in range(0, len(items), h)]
    return blocks, L.default


def recombine_sign(blocks: Sequence[AnyList], default: int, x) -> int:
    """Sign of ``sum 3**(r-i+1) f_i(x) + default`` for exact block values ``f_i``."""
    r = len(blocks)
    total = sum(3 ** (r - i) * blk(x) for i, blk in enumerate(blocks)) + default
    return 1 if total > 0 else -1


@dataclass
class PTFReport:
    kind: str
    n: int
    size: int  # h on the cube, k on the ball
    blocks: int
    degree: int
    formal_degree: int
    log2_weight: float
    C: int
    terms: int
    amp_ranges: tuple
    amp_params: tuple
    validated: bool

    def bound_expression(self) -> float:
        if self.kind == "cube":
            h = self.size
            return self.n / h + math.sqrt(h) * math.log2(h) if h > 1 else float(self.n)
        return math.sqrt(self.size) * math.log2(self.n)

    def row(self) -> list:
        return [
            self.kind,
            self.n,
            self.size,
            self.blocks,
            self.degree,
            self.formal_degree,
            f"{self.log2_weight:.4f}",
            f"{self.bound_expression():.4f}",
            self.terms,
            int(self.validated),
        ]


REPORT_HEADER = ["kind", "n", "h_or_k", "blocks", "degree", "formal_degree", "log2_weight", "bound_expr", "terms", "validated"]


def reports_csv(reports: Sequence[PTFReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_HEADER)
    for r in reports:
        w.writerow(r.row())
    return buf.getvalue()


@dataclass
class AssembledPTF:
    source: DecisionList
    domain: Domain
    size: int
    poly: Polynomial
    C: int
    blocks: list = field(default_factory=list)  # SublistPTF, each rescaled to the shared C
    report: PTFReport | None = None

    @property
    def default(self) -> int:
        return self.source.default


def _assemble(L: DecisionList, dom: Domain, h: int, size: int, kind: str, eps) -> AssembledPTF:
    subs, default = decompose(L, h)
    parts = [sublist_ptf(s, dom, eps) for s in subs]
    C = math.lcm(*(p.C for p in parts)) if parts else 1
    r = len(parts)
    shared = []
    for p in parts:
        q = p.poly.scale(C // p.C)
        shared.append(SublistPTF(p.source, q, C, p.eps_inner, p.formal_degree, p.amp_range, p.amplifier, p.kept))
    H = sum_polys([q.poly.scale(3 ** (r - i)) for i, q in enumerate(shared)] + [Polynomial.const(C * default, L.n)])
    amps = [p.amplifier for p in parts if p.amplifier is not None]
    rep = PTFReport(
        kind=kind,
        n=L.n,
        size=size,
        blocks=r,
        degree=H.degree(),
        formal_degree=max((p.formal_degree for p in parts), default=0),
        log2_weight=math.log2(H.weight()),
        C=C,
        terms=len(H),
        amp_ranges=tuple(p.amp_range for p in parts),
        amp_params=tuple(sorted({(a.params.n, a.params.d1, a.params.D, a.params.d3) for a in amps})),
        validated=all(a.validation.passed for a in amps),
    )
    return AssembledPTF(L, dom, size, H, C, shared, rep)


def assemble_cube_ptf(L: DecisionList, h: int, eps=DEFAULT_EPS) -> AssembledPTF:
    h = min(h, max(len(L), 1))
    return _assemble(L, FullCube(L.n), h, h, "cube", eps)


def assemble_ball_ptf(L: DecisionList, k: int, h: int | None = None, eps=DEFAULT_EPS) -> AssembledPTF:
    """Ball construction; a single block over the whole list unless ``h`` is given."""
    if k < 1:
        raise ValueError("k must be >= 1")
    h = h or max(len(L), 1)
    return _assemble(L, HammingBall(L.n, k), h, k, "ball", eps)


def formal_degree_plan(L: DecisionList, h: int, eps=DEFAULT_EPS, dom: Domain | None = None) -> int:
    """Formal degree the construction would have, building only the amplifiers."""
    subs, _ = decompose(L, min(h, max(len(L), 1)))
    best = 0
    for s in subs:
        kept, rng = sublist_plan(s, eps, dom)
        if any(kept):
            best = max(best, 1 + amplifier_for(rng, DECAY, Fraction(eps) / 2).degree)
    return best


# dominance bookkeeping


@dataclass
class DominanceOutcome:
    passed: bool
    points_checked: int
    first_violation: tuple | None = None
    min_slack: Fraction | None = None  # smallest (C*3**(r-i+1) - lhs) / C over firing points


def check_dominance(ptf: AssembledPTF, cap: int | None = None) -> DominanceOutcome:
    """At every point whose first fired block is ``i``:

    |sum_{j>i} 3**(r-j+1) p_j| + C*3**(r-i+1)/100 + C < C*3**(r-i+1),
    |3**(r-i+1) p_i - 3**(r-i+1) C b| <= C*3**(r-i+1)/100.
    """
    dom = ptf.domain
    n = dom.n
    ds = domain_downset(dom, cap)
    r = len(ptf.blocks)
    C = ptf.C
    vals = []
    for blk in ptf.blocks:
        V, D = values_on(blk.poly, ds, n)
        assert D == 1
        vals.append(V)
    fired = [fires_any(blk.source, ds.masks) for blk in ptf.blocks]
    first = np.full(len(ds), -1, dtype=np.int64)
    for i in reversed(range(r)):
        first[fired[i]] = i
    labs = [labels_on(blk.source, ds.masks) for blk in ptf.blocks]
    eps_in = ptf.blocks[0].eps_inner if ptf.blocks else DEFAULT_EPS
    min_slack = None
    for idx in range(len(ds)):
        i = int(first[idx])
        if i < 0:
            continue
        w = 3 ** (r - i)
        tail = sum(3 ** (r - j) * int(vals[j][idx]) for j in range(i + 1, r))
        lhs = abs(tail) + C * w * eps_in + C
        env = abs(w * int(vals[i][idx]) - w * C * int(labs[i][idx]))
        slack = (C * w - lhs) / C
        min_slack = slack if min_slack is None else min(min_slack, slack)
        if not (lhs < C * w and env <= C * w * eps_in):
            pt = tuple((ds.masks[idx] >> (n - 1 - j)) & 1 for j in range(n))
            return DominanceOutcome(False, idx + 1, pt, min_slack)
    return DominanceOutcome(True, len(ds), None, min_slack)


def fit_constant(rows: Sequence[PTFReport]) -> float:
    """Smallest single ``c`` with ``log2_weight <= c * bound_expression`` on every row."""
    return max(r.log2_weight / r.bound_expression() for r in rows)
