"""Exact sparse multivariate polynomials with rational coefficients.

A monomial is a sorted tuple of ``(var, exp)`` pairs with ``var >= 1`` and
``exp >= 1``; the empty tuple is the constant monomial.  A polynomial maps
monomials to non-zero :class:`fractions.Fraction` coefficients.  Nothing in
this module ever rounds.

Representation is formal (``x1**2`` and ``x1`` are different monomials).
:func:`multilinearize` is the explicit reduction ``x**e -> x`` that is
value-preserving on 0/1 inputs.
"""

from __future__ import annotations

import json
from fractions import Fraction
from math import lcm
from typing import Iterable, Mapping, Sequence, Tuple, Union

Monomial = Tuple[Tuple[int, int], ...]
Number = Union[int, Fraction]

ONE: Monomial = ()


class PolynomialError(ValueError):
    pass


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    exps = dict(a)
    for v, e in b:
        exps[v] = exps.get(v, 0) + e
    return tuple(sorted(exps.items()))


def mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def _mono_key(m: Monomial):
    return (mono_degree(m), m)


class Polynomial:
    """Immutable sparse polynomial over the rationals."""

    __slots__ = ("_terms", "_nvars", "_hash")

    def __init__(self, terms: Mapping[Monomial, Number] | None = None, nvars: int = 0):
        clean = {}
        top = 0
        for mono, c in (terms or {}).items():
            c = Fraction(c)
            if c == 0:
                continue
            for v, e in mono:
                if v < 1 or e < 1:
                    raise PolynomialError(f"bad monomial {mono!r}")
                top = max(top, v)
            clean[mono] = c
        self._terms = clean
        self._nvars = max(nvars, top)
        self._hash = None

    # construction helpers

    @classmethod
    def const(cls, c: Number, nvars: int = 0) -> "Polynomial":
        return cls({ONE: c}, nvars)

    @classmethod
    def var(cls, i: int, nvars: int = 0) -> "Polynomial":
        if i < 1:
            raise PolynomialError("variable indices start at 1")
        return cls({((i, 1),): 1}, nvars)

    @classmethod
    def from_coeffs(cls, coeffs: Sequence[Number], var: int = 1) -> "Polynomial":
        """Univariate polynomial ``sum(coeffs[e] * x_var**e)``."""
        return cls({(((var, e),) if e else ONE): c for e, c in enumerate(coeffs)}, var)

    # basic accessors

    @property
    def terms(self) -> Mapping[Monomial, Fraction]:
        return dict(self._terms)

    @property
    def nvars(self) -> int:
        return self._nvars

    def items(self):
        return self._terms.items()

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def coefficient(self, mono: Monomial) -> Fraction:
        return self._terms.get(tuple(sorted(mono)), Fraction(0))

    def variables(self) -> frozenset:
        return frozenset(v for mono in self._terms for v, _ in mono)

    def is_univariate(self) -> bool:
        return len(self.variables()) <= 1

    def degree(self) -> int:
        # zero polynomial has degree 0 by convention
        return max((mono_degree(m) for m in self._terms), default=0)

    def weight(self) -> Fraction:
        return sum((abs(c) for c in self._terms.values()), Fraction(0))

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self._terms.values())

    def univariate_coeffs(self) -> list[Fraction]:
        """Dense coefficient list (constant first) of a univariate polynomial."""
        if not self.is_univariate():
            raise PolynomialError("polynomial is not univariate")
        out = [Fraction(0)] * (self.degree() + 1)
        for mono, c in self._terms.items():
            out[mono_degree(mono)] = c
        return out

    # arithmetic

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            return other
        if isinstance(other, (int, Fraction)):
            return Polynomial.const(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for m, c in other._terms.items():
            out[m] = out.get(m, 0) + c
        return Polynomial(out, max(self._nvars, other._nvars))

    __radd__ = __add__

    def __neg__(self):
        return Polynomial({m: -c for m, c in self._terms.items()}, self._nvars)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        out: dict = {}
        for ma, ca in self._terms.items():
            for mb, cb in other._terms.items():
                m = _mono_mul(ma, mb)
                out[m] = out.get(m, 0) + ca * cb
        return Polynomial(out, max(self._nvars, other._nvars))

    def __rmul__(self, other):
        return self * other

    def scale(self, c: Number) -> "Polynomial":
        c = Fraction(c)
        return Polynomial({m: c * v for m, v in self._terms.items()}, self._nvars)

    def __pow__(self, e: int) -> "Polynomial":
        return power(self, e)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Polynomial.const(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    # evaluation

    def evaluate(self, x: Sequence[Number]) -> Fraction:
        """Exact value at the assignment ``x`` (``x[i-1]`` is the value of ``x_i``)."""
        need = max(self.variables(), default=0)
        if len(x) < need:
            raise PolynomialError(f"assignment has {len(x)} values, polynomial uses x{need}")
        total = Fraction(0)
        for mono, c in self._terms.items():
            term = c
            for v, e in mono:
                term *= Fraction(x[v - 1]) ** e
                if not term:
                    break
            total += term
        return total

    def __call__(self, t: Number) -> Fraction:
        """Evaluate a univariate polynomial at ``t`` by Horner's rule."""
        acc = Fraction(0)
        t = Fraction(t)
        for c in reversed(self.univariate_coeffs()):
            acc = acc * t + c
        return acc

    # display

    def sorted_terms(self) -> list[tuple[Monomial, Fraction]]:
        return sorted(self._terms.items(), key=lambda kv: _mono_key(kv[0]))

    def __repr__(self) -> str:
        if not self._terms:
            return "Polynomial(0)"
        return f"Polynomial({to_text(self)!r})"


def power(p: Polynomial, e: int) -> Polynomial:
    if e < 0:
        raise PolynomialError("negative exponent")
    result = Polynomial.const(1, p.nvars)
    base = p
    while e:
        if e & 1:
            result = result * base
        e >>= 1
        if e:
            base = base * base
    return result


def compose(outer: Polynomial, inner: Polynomial, *, reduce=None) -> Polynomial:
    """Substitute ``inner`` for the single variable of ``outer``.

    ``reduce`` is applied after every Horner step; passing
    :func:`multilinearize` computes the composition modulo ``x_i**2 = x_i``.
    """
    if not outer.is_univariate():
        raise PolynomialError("outer polynomial must be univariate")
    acc = Polynomial.const(0, inner.nvars)
    for c in reversed(outer.univariate_coeffs()):
        acc = acc * inner + c
        if reduce is not None:
            acc = reduce(acc)
    return acc


def multilinearize(p: Polynomial) -> Polynomial:
    out: dict = {}
    for mono, c in p.items():
        m = tuple((v, 1) for v, _ in mono)
        out[m] = out.get(m, 0) + c
    return Polynomial(out, p.nvars)


def clear_denominators(p: Polynomial) -> tuple[Polynomial, int]:
    """Return ``(C*p, C)`` with ``C`` the lcm of the coefficient denominators."""
    C = 1
    for c in p._terms.values():
        C = lcm(C, c.denominator)
    return p.scale(C), C


def chebyshev(d: int, var: int = 1) -> Polynomial:
    """Chebyshev polynomial of the first kind ``T_d`` in ``x_var``."""
    if d < 0:
        raise PolynomialError("negative Chebyshev index")
    prev, cur = [1], [0, 1]
    if d == 0:
        return Polynomial.from_coeffs(prev, var)
    for _ in range(d - 1):
        nxt = [0] + [2 * c for c in cur]
        for i, c in enumerate(prev):
            nxt[i] -= c
        prev, cur = cur, nxt
    return Polynomial.from_coeffs(cur, var)


def chebyshev_value(d: int, x: Number) -> Fraction:
    """``T_d(x)`` by the three-term recurrence, without building the polynomial."""
    x = Fraction(x)
    prev, cur = Fraction(1), x
    if d == 0:
        return prev
    for _ in range(d - 1):
        prev, cur = cur, 2 * x * cur - prev
    return cur


def affine(a: Number, b: Number, var: int = 1) -> Polynomial:
    """``a + b*x_var``."""
    return Polynomial({ONE: a, ((var, 1),): b}, var)


# serialization


def _fmt_coeff(c: Fraction) -> str:
    return f"{c.numerator}/{c.denominator}"


def to_text(p: Polynomial) -> str:
    """One term per line: ``num/den * x<i>^<e> * ...``; ``0`` for the zero polynomial."""
    if not p:
        return "0"
    lines = []
    for mono, c in p.sorted_terms():
        parts = [_fmt_coeff(c)] + [f"x{v}^{e}" for v, e in mono]
        lines.append(" * ".join(parts))
    return "\n".join(lines)


def from_text(text: str, nvars: int = 0) -> Polynomial:
    text = text.strip()
    if text == "0":
        return Polynomial({}, nvars)
    terms: dict = {}
    for line in text.splitlines():
        parts = [s.strip() for s in line.split("*")]
        coeff = Fraction(parts[0])
        mono = []
        for factor in parts[1:]:
            if not factor.startswith("x") or "^" not in factor:
                raise PolynomialError(f"cannot parse factor {factor!r}")
            v, e = factor[1:].split("^")
            mono.append((int(v), int(e)))
        key = tuple(sorted(mono))
        terms[key] = terms.get(key, 0) + coeff
    return Polynomial(terms, nvars)


def to_records(p: Polynomial) -> dict:
    return {
        "nvars": p.nvars,
        "terms": [
            {"vars": [[v, e] for v, e in mono], "num": str(c.numerator), "den": str(c.denominator)}
            for mono, c in p.sorted_terms()
        ],
    }


def from_records(rec: Mapping) -> Polynomial:
    terms = {}
    for t in rec["terms"]:
        mono = tuple(sorted((int(v), int(e)) for v, e in t["vars"]))
        terms[mono] = Fraction(int(t["num"]), int(t["den"]))
    return Polynomial(terms, int(rec.get("nvars", 0)))


def dumps(p: Polynomial) -> str:
    return json.dumps(to_records(p), sort_keys=True, separators=(",", ":")) + "\n"


def loads(s: str) -> Polynomial:
    return from_records(json.loads(s))


def linear_form(coeffs: Mapping[int, Number], const: Number = 0, nvars: int = 0) -> Polynomial:
    terms: dict = {ONE: Fraction(const)}
    for v, c in coeffs.items():
        terms[((v, 1),)] = terms.get(((v, 1),), 0) + Fraction(c)
    return Polynomial(terms, nvars)


def sum_polys(polys: Iterable[Polynomial]) -> Polynomial:
    out: dict = {}
    nv = 0
    for p in polys:
        nv = max(nv, p.nvars)
        for m, c in p.items():
            out[m] = out.get(m, 0) + c
    return Polynomial(out, nv)
