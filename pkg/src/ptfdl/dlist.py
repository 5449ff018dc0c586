"""Decision lists over 0/1 inputs, the domains they are checked on, and instance generators.

Bit vectors are tuples of 0/1 ints; ``x[i-1]`` is the value of ``x_i``.
Internally a point is also encoded as an integer mask where ``x_1`` is the
most significant of ``n`` bits, so increasing mask order is lexicographic
order of the vectors.
"""

from __future__ import annotations

import json
import os
import random
from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import Iterator, Sequence, Union

DEFAULT_CAP = 1 << 22


class EnumerationCapError(RuntimeError):
    """Raised when a domain is larger than the enumeration cap."""


def enumeration_cap() -> int:
    return int(os.environ.get("PTFDL_CAP", DEFAULT_CAP))


@dataclass(frozen=True)
class Literal:
    var: int
    negated: bool = False

    def __post_init__(self):
        if self.var < 1:
            raise ValueError(f"literal variable must be >= 1, got {self.var}")

    def holds(self, x: Sequence[int]) -> bool:
        return bool(x[self.var - 1]) != self.negated

    def __str__(self) -> str:
        return f"~x{self.var}" if self.negated else f"x{self.var}"


@dataclass(frozen=True)
class DecisionList:
    """``(l_1, b_1), ..., (l_h, b_h), default``; value is the output of the first true literal."""

    n: int
    items: tuple = ()
    default: int = 1

    def __post_init__(self):
        object.__setattr__(self, "items", tuple((lit, int(b)) for lit, b in self.items))
        for lit, b in self.items:
            if not 1 <= lit.var <= self.n:
                raise ValueError(f"literal {lit} outside [1, {self.n}]")
            if b not in (-1, 1):
                raise ValueError(f"outputs must be +-1, got {b}")
        self._check_default()

    def _check_default(self):
        if self.default not in (-1, 1):
            raise ValueError(f"default must be +-1, got {self.default}")

    def __len__(self) -> int:
        return len(self.items)

    @property
    def literals(self) -> list[Literal]:
        return [lit for lit, _ in self.items]

    @property
    def outputs(self) -> list[int]:
        return [b for _, b in self.items]

    def first_fired(self, x: Sequence[int]) -> int | None:
        """0-based position of the first true literal, or None."""
        for i, (lit, _) in enumerate(self.items):
            if lit.holds(x):
                return i
        return None

    def __call__(self, x: Sequence[int]) -> int:
        return eval_list(self, x)

    def __str__(self) -> str:
        body = ", ".join(f"({lit},{b:+d})" for lit, b in self.items)
        return f"[{body}; {self.default:+d}]"


@dataclass(frozen=True)
class ModifiedDecisionList(DecisionList):
    """A decision list whose default output is 0."""

    default: int = 0

    def _check_default(self):
        if self.default != 0:
            raise ValueError("a modified decision list has default 0")


AnyList = Union[DecisionList, ModifiedDecisionList]


def eval_list(L: AnyList, x: Sequence[int]) -> int:
    if len(x) != L.n:
        raise ValueError(f"input has length {len(x)}, list expects {L.n}")
    i = L.first_fired(x)
    return L.default if i is None else L.items[i][1]


def odd_max_bit(n: int) -> DecisionList:
    """``(-1)**i`` for ``i`` the largest index holding a 1, and +1 on the zero vector."""
    if n < 1:
        raise ValueError("n must be >= 1")
    items = [(Literal(i), (-1) ** i) for i in range(n, 0, -1)]
    return DecisionList(n, items, 1)


def random_list(n: int, h: int, seed: int, *, modified: bool = False) -> AnyList:
    """Uniform variables (repeats allowed), negations, outputs and default."""
    rng = random.Random(seed)
    items = []
    for _ in range(h):
        var = rng.randint(1, n)
        neg = rng.random() < 0.5
        out = rng.choice((-1, 1))
        items.append((Literal(var, neg), out))
    default = rng.choice((-1, 1))
    if modified:
        return ModifiedDecisionList(n, items)
    return DecisionList(n, items, default)


def to_modified(L: AnyList) -> ModifiedDecisionList:
    return ModifiedDecisionList(L.n, L.items)


# domains


@dataclass(frozen=True)
class FullCube:
    n: int

    def size(self) -> int:
        return 1 << self.n

    @property
    def k(self) -> int:
        return self.n

    def describe(self) -> str:
        return f"cube(n={self.n})"


@dataclass(frozen=True)
class HammingBall:
    n: int
    k: int

    def __post_init__(self):
        if not 0 <= self.k <= self.n:
            raise ValueError(f"need 0 <= k <= n, got k={self.k}, n={self.n}")

    def size(self) -> int:
        return sum(comb(self.n, i) for i in range(self.k + 1))

    def describe(self) -> str:
        return f"ball(n={self.n},k={self.k})"


Domain = Union[FullCube, HammingBall]


def check_cap(dom: Domain, cap: int | None = None) -> None:
    cap = enumeration_cap() if cap is None else cap
    if dom.size() > cap:
        raise EnumerationCapError(
            f"{dom.describe()} has {dom.size()} points, above the cap {cap}; "
            "raise the cap or use sampling mode"
        )


def bit(n: int, var: int) -> int:
    """Mask bit of ``x_var``; ``x_1`` is the most significant."""
    return 1 << (n - var)


def mask_to_vector(mask: int, n: int) -> tuple:
    return tuple((mask >> (n - 1 - j)) & 1 for j in range(n))


def vector_to_mask(x: Sequence[int]) -> int:
    m = 0
    for b in x:
        m = (m << 1) | (1 if b else 0)
    return m


def domain_masks(dom: Domain, cap: int | None = None) -> list[int]:
    """All points of ``dom`` as masks, in enumeration order."""
    check_cap(dom, cap)
    n = dom.n
    if isinstance(dom, FullCube):
        return list(range(1 << n))
    out = []
    for w in range(dom.k + 1):
        # combinations of positions in increasing order give decreasing masks
        level = [sum(1 << (n - 1 - p) for p in c) for c in combinations(range(n), w)]
        out.extend(reversed(level))
    return out


def enumerate_domain(dom: Domain, cap: int | None = None) -> Iterator[tuple]:
    n = dom.n
    for m in domain_masks(dom, cap):
        yield mask_to_vector(m, n)


def weight_of(x: Sequence[int]) -> int:
    return sum(1 for b in x if b)


# serialization


def list_to_dict(L: AnyList) -> dict:
    return {
        "n": L.n,
        "items": [{"var": lit.var, "negated": lit.negated, "output": b} for lit, b in L.items],
        "default": L.default,
    }


def list_from_dict(d: dict) -> AnyList:
    items = [(Literal(int(it["var"]), bool(it["negated"])), int(it["output"])) for it in d["items"]]
    if int(d["default"]) == 0:
        return ModifiedDecisionList(int(d["n"]), items)
    return DecisionList(int(d["n"]), items, int(d["default"]))


def dumps_list(L: AnyList) -> str:
    return json.dumps(list_to_dict(L), indent=1, sort_keys=True) + "\n"


def loads_list(s: str) -> AnyList:
    return list_from_dict(json.loads(s))
