"""Witness chains certifying weight lower bounds for ODD-MAX-BIT PTFs.

Start from ``y_0 = 1^t 0^(n-t)``.  To extend ``y_i`` into block ``i+1``, the
positions of one parity in that block become fresh variables ``z_j``; setting
``z_j = 1`` switches that position on and switches off the ``j``-th lowest
1 of ``y_i``, so the number of ones never grows.  All ``2^m`` fillings are
searched in lexicographic order for one whose value has the opposite sign
and magnitude at least ``2^(i+1)``.  A chain of length ``m`` proves
``weight(p) >= 2^m`` because ``|p(x)| <= weight(p)`` on 0/1 inputs.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .dlist import EnumerationCapError, HammingBall, check_cap, odd_max_bit
from .exactpoly import Polynomial, from_records, to_records
from .verify import PointEvaluator, verify_sign

FORMAT = "ptfdl-witness-chain"
RULES = ("power", "ratio")


class WitnessError(ValueError):
    pass


class CertificateError(ValueError):
    pass


@dataclass(frozen=True)
class BlockPlan:
    n: int
    d: int
    k: int
    t: int

    def __post_init__(self):
        if self.t < 2 or self.t % 2:
            raise ValueError("block size t must be even and >= 2")
        if self.k < self.t:
            raise ValueError("need k >= t")
        if self.n <= self.t:
            raise ValueError("need n > t so that at least one block can be filled")

    @classmethod
    def for_degree(cls, n: int, d: int, k: int | None = None, t: int | None = None) -> "BlockPlan":
        """``t`` defaults to the smallest even integer >= 4d^2, ``k`` to ``t``."""
        if t is None:
            t = 4 * d * d
            t += t % 2
        return cls(n=n, d=d, k=t if k is None else k, t=t)

    @property
    def r(self) -> int:
        """Number of non-empty extension blocks after the seed block (the last may be short)."""
        return -(-(self.n - self.t) // self.t)

    def block(self, j: int) -> range:
        """1-based positions of extension block ``j`` (``1 <= j <= r``)."""
        lo = j * self.t + 1
        return range(lo, min((j + 1) * self.t, self.n) + 1)

    def as_dict(self) -> dict:
        return {"n": self.n, "d": self.d, "k": self.k, "t": self.t, "r": self.r}


@dataclass
class WitnessChain:
    plan: BlockPlan
    chain: list = field(default_factory=list)  # 0/1 tuples y_0..y_m
    values: list = field(default_factory=list)  # exact p(y_i)
    rule: str = "power"
    complete: bool = False
    conditional: bool = False
    stopped: str = ""

    @property
    def length(self) -> int:
        return max(len(self.chain) - 1, 0)


def _bits(y: Sequence[int]) -> str:
    return "".join(str(int(b)) for b in y)


def _sign(v) -> int:
    return (v > 0) - (v < 0)


def seed_witness(p: Polynomial, plan: BlockPlan, evaluator: PointEvaluator | None = None) -> tuple:
    y0 = tuple([1] * plan.t + [0] * (plan.n - plan.t))
    ev = evaluator or PointEvaluator(p, plan.n)
    v = ev(y0)
    if v == 0:
        raise WitnessError("p vanishes on the seed input; it is not a valid integer PTF for the seed")
    if v.denominator != 1:
        raise WitnessError("p must have integer coefficients")
    return y0, v


def fillings(plan: BlockPlan, y: Sequence[int], i: int, target: int) -> tuple[list, list]:
    """Fresh positions in block ``i+1`` and the 1s they retire, both 1-based."""
    parity = 1 if target < 0 else 0
    fresh = [q for q in plan.block(i + 1) if q % 2 == parity]
    ones = [q for q, b in enumerate(y, start=1) if b]
    m = min(len(fresh), len(ones))
    return fresh[:m], ones[:m]


def _apply(y: Sequence[int], z: int, m: int, fresh, retire) -> tuple:
    out = list(y)
    for j in range(m):
        if z >> (m - 1 - j) & 1:
            out[fresh[j] - 1] = 1
            out[retire[j] - 1] = 0
    return tuple(out)


def _threshold(rule: str, i: int, prev) -> Fraction:
    return Fraction(2 ** (i + 1)) if rule == "power" else 2 * abs(Fraction(prev))


def extend_witness(
    p: Polynomial,
    plan: BlockPlan,
    y: Sequence[int],
    i: int,
    value=None,
    *,
    rule: str = "power",
    evaluator: PointEvaluator | None = None,
    threads: int = 1,
):
    """Next witness ``(y_{i+1}, value)`` or ``None`` when no filling qualifies.

    ``rule="power"`` asks for ``|p(y_{i+1})| >= 2**(i+1)``; ``rule="ratio"``
    asks for ``|p(y_{i+1})| >= 2*|p(y_i)|``.
    """
    if rule not in RULES:
        raise ValueError(f"rule must be one of {RULES}")
    if i + 1 > plan.r:
        raise ValueError("no block left to fill")
    ev = evaluator or PointEvaluator(p, plan.n)
    value = ev(y) if value is None else Fraction(value)
    target = -_sign(value)
    fresh, retire = fillings(plan, y, i, target)
    m = len(fresh)
    need = _threshold(rule, i, value)
    cands = [_apply(y, z, m, fresh, retire) for z in range(1, 1 << m)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            vals = list(ex.map(ev, cands))
        for cand, v in zip(cands, vals):
            if _sign(v) == target and abs(v) >= need:
                return cand, v
        return None
    for cand in cands:
        v = ev(cand)
        if _sign(v) == target and abs(v) >= need:
            return cand, v
    return None


def run_adversary(
    p: Polynomial,
    plan: BlockPlan,
    *,
    rule: str = "power",
    cap: int | None = None,
    check_correct: bool = True,
    threads: int = 1,
) -> WitnessChain:
    """Longest chain the search reaches; ``complete`` when all ``r`` blocks got filled."""
    conditional = False
    if check_correct:
        dom = HammingBall(plan.n, plan.k)
        try:
            check_cap(dom, cap)
        except EnumerationCapError:
            conditional = True
        else:
            out = verify_sign(p, odd_max_bit(plan.n), dom, cap=cap)
            if not out.passed:
                raise WitnessError(f"p does not compute ODD-MAX-BIT on the ball: {out.counterexample}")
    else:
        conditional = True
    ev = PointEvaluator(p, plan.n)
    y, v = seed_witness(p, plan, ev)
    wc = WitnessChain(plan, [y], [v], rule, conditional=conditional)
    for i in range(plan.r):
        nxt = extend_witness(p, plan, y, i, v, rule=rule, evaluator=ev, threads=threads)
        if nxt is None:
            wc.stopped = f"no filling of block {i + 1} qualifies (degree above d or t too small)"
            return wc
        y, v = nxt
        wc.chain.append(y)
        wc.values.append(v)
    wc.complete = True
    return wc


def check_chain(wc: WitnessChain, p: Polynomial | None = None) -> None:
    """Structural and numeric invariants; raises :class:`CertificateError`."""
    plan = wc.plan
    if len(wc.chain) != len(wc.values) or not wc.chain:
        raise CertificateError("chain and values disagree in length")
    ev = PointEvaluator(p, plan.n) if p is not None else None
    for i, (y, v) in enumerate(zip(wc.chain, wc.values)):
        if len(y) != plan.n:
            raise CertificateError(f"y_{i} has wrong length")
        if sum(y) > plan.k:
            raise CertificateError(f"y_{i} has more than k ones")
        limit = min((i + 1) * plan.t, plan.n)
        if any(y[q] for q in range(limit, plan.n)):
            raise CertificateError(f"y_{i} has ones outside the first {i} blocks")
        if abs(v) < 2**i:
            raise CertificateError(f"|p(y_{i})| < 2^{i}")
        if ev is not None and ev(y) != v:
            raise CertificateError(f"recorded value of y_{i} does not match p")
        if i and _sign(v) != -_sign(wc.values[i - 1]):
            raise CertificateError(f"sign did not alternate at y_{i}")
        if i and wc.rule == "ratio" and abs(v) < 2 * abs(wc.values[i - 1]):
            raise CertificateError(f"|p(y_{i})| < 2|p(y_{i - 1})|")


def weight_certificate(wc: WitnessChain, p: Polynomial) -> int:
    check_chain(wc, p)
    return 2**wc.length


# serialization


def chain_document(wc: WitnessChain, p: Polynomial) -> dict:
    return {
        "format": FORMAT,
        "plan": wc.plan.as_dict(),
        "rule": wc.rule,
        "conditional": wc.conditional,
        "complete": wc.complete,
        "chain": [_bits(y) for y in wc.chain],
        "values": [str(v) for v in wc.values],
        "certificate": str(2**wc.length),
        "poly": to_records(p),
    }


def dumps_chain(wc: WitnessChain, p: Polynomial) -> str:
    # compact separators keep the C encoder in play; chains embed large polynomials
    return json.dumps(chain_document(wc, p), sort_keys=True, separators=(",", ":")) + "\n"


def loads_chain(text: str) -> tuple[WitnessChain, Polynomial]:
    doc = json.loads(text)
    if doc.get("format") != FORMAT:
        raise CertificateError("not a witness chain document")
    pl = doc["plan"]
    plan = BlockPlan(int(pl["n"]), int(pl["d"]), int(pl["k"]), int(pl["t"]))
    wc = WitnessChain(
        plan,
        [tuple(int(c) for c in s) for s in doc["chain"]],
        [Fraction(v) for v in doc["values"]],
        doc["rule"],
        bool(doc["complete"]),
        bool(doc["conditional"]),
    )
    return wc, from_records(doc["poly"])


def recheck_document(text: str) -> int:
    """Stand-alone re-verification of a serialized chain; returns the certified bound.

    Uses nothing but the JSON text: every ``p(y_i)`` is recomputed term by
    term from the stored coefficients.
    """
    doc = json.loads(text)
    n, k, t = (int(doc["plan"][key]) for key in ("n", "k", "t"))
    terms = [([int(v) for v, _ in rec["vars"]], Fraction(int(rec["num"]), int(rec["den"]))) for rec in doc["poly"]["terms"]]
    chain, values = doc["chain"], [Fraction(v) for v in doc["values"]]
    if len(chain) != len(values) or not chain:
        raise CertificateError("malformed chain")
    prev = None
    for i, (bits, claimed) in enumerate(zip(chain, values)):
        if len(bits) != n or set(bits) - {"0", "1"}:
            raise CertificateError(f"y_{i} is not an n-bit string")
        if bits.count("1") > k:
            raise CertificateError(f"y_{i} has more than k ones")
        if "1" in bits[min((i + 1) * t, n):]:
            raise CertificateError(f"y_{i} has ones beyond block {i}")
        got = sum((c for vs, c in terms if all(bits[v - 1] == "1" for v in vs)), Fraction(0))
        if got != claimed:
            raise CertificateError(f"p(y_{i}) is {got}, file claims {claimed}")
        if abs(got) < 2**i:
            raise CertificateError(f"|p(y_{i})| < 2^{i}")
        if prev is not None and (got > 0) == (prev > 0):
            raise CertificateError(f"sign did not alternate at y_{i}")
        prev = got
    bound = 2 ** (len(chain) - 1)
    if str(bound) != doc["certificate"]:
        raise CertificateError("certificate does not match chain length")
    return bound
