from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ptfdl.exactpoly import (
    Polynomial,
    PolynomialError,
    affine,
    chebyshev,
    chebyshev_value,
    clear_denominators,
    compose,
    dumps,
    from_records,
    from_text,
    loads,
    multilinearize,
    power,
    to_records,
    to_text,
)

x1, x2, x3 = (Polynomial.var(i) for i in (1, 2, 3))
t = Polynomial.var(1)


def test_add_cancels():
    assert (x1 + 1) + (x1 - 1) == 2 * x1


def test_difference_of_squares():
    assert (x1 + x2) * (x1 - x2) == x1**2 - x2**2


def test_zero_annihilates():
    assert Polynomial() * (x1 + 3 * x2) == Polynomial()
    assert not Polynomial()


def test_power_examples():
    assert power(x1 + 1, 2) == x1**2 + 2 * x1 + 1
    assert power(x2 + x1, 0) == Polynomial.const(1)
    p = power(2 * x1, 3)
    assert p == 8 * x1**3
    assert p.weight() == (2 * x1).weight() ** 3


def test_compose_examples():
    sq = compose(t**2, x1 + x2)
    assert sq == x1**2 + 2 * x1 * x2 + x2**2
    assert sq.weight() == 4
    assert compose(chebyshev(2), x1) == 2 * x1**2 - 1
    assert compose(t + 1, 3 * x1 - 2) == 3 * x1 - 1


def test_compose_rejects_multivariate_outer():
    with pytest.raises(PolynomialError):
        compose(x1 * x2, x1)


def test_evaluate_examples():
    assert (2 * x1 - 1).evaluate([0]) == -1
    p = x1 * x2 + x2
    assert p.evaluate([1, 1]) == 2 == p.weight()


def test_evaluate_missing_variable():
    with pytest.raises(PolynomialError):
        (x1 * x3).evaluate([1, 1])


def test_weight_and_degree():
    assert (3 * x1**2 * x2 - 2 * x1 + 1).weight() == 6
    assert chebyshev(4) == 8 * t**4 - 8 * t**2 + 1
    assert chebyshev(4).weight() == 17 <= 2**8
    assert Polynomial().degree() == 0


def test_clear_denominators():
    p, C = clear_denominators(t * F(1, 2) + F(1, 3))
    assert (p, C) == (3 * t + 2, 6)
    q = 4 * x1 - x2
    assert clear_denominators(q) == (q, 1)


def test_chebyshev_small():
    assert chebyshev(0) == Polynomial.const(1)
    assert chebyshev(1) == t
    assert chebyshev(2) == 2 * t**2 - 1
    c5 = chebyshev(5)
    assert c5 == 16 * t**5 - 20 * t**3 + 5 * t
    assert (c5.degree(), c5.weight(), len(c5)) == (5, 41, 3)


@pytest.mark.parametrize("d", range(0, 25))
def test_chebyshev_matches_numpy_basis(d):
    # independent expansion: numpy's Chebyshev-to-power-basis conversion
    ref = np.polynomial.chebyshev.cheb2poly([0] * d + [1])
    coeffs = chebyshev(d).univariate_coeffs()
    assert [float(c) for c in coeffs] == pytest.approx(list(ref), rel=0, abs=0.5)
    assert all(c.denominator == 1 for c in coeffs)


@pytest.mark.parametrize("d", range(0, 65))
def test_chebyshev_weight_bound(d):
    assert chebyshev(d).weight() <= 4**d


def test_chebyshev_value_agrees_with_polynomial():
    for d in range(12):
        for x in (F(0), F(1), F(-1), F(3, 2), F(7, 5)):
            assert chebyshev_value(d, x) == chebyshev(d)(x)


def test_multilinearize_examples():
    assert multilinearize(x1**2) == x1
    assert multilinearize(x1**2 + 2 * x1 * x2 + x2**2) == x1 + 2 * x1 * x2 + x2
    sq = (x1 - 1) ** 2
    assert sq.weight() == 4
    assert multilinearize(sq) == 1 - x1
    assert multilinearize(sq).weight() == 2


def test_affine():
    assert affine(2, 3) == 3 * t + 2
    assert affine(0, F(1, 2), var=2) == Polynomial.var(2) * F(1, 2)


def test_text_round_trip():
    p = 3 * x1**2 * x2 - F(2, 7) * x1 + 1
    assert from_text(to_text(p)) == p
    assert to_text(Polynomial()) == "0"
    assert from_text("0") == Polynomial()


# random sparse polynomials over up to four variables

coef = st.fractions(min_value=-20, max_value=20, max_denominator=12)
mono = st.lists(st.tuples(st.integers(1, 4), st.integers(1, 3)), max_size=3, unique_by=lambda ve: ve[0]).map(
    lambda vs: tuple(sorted(vs))
)
polys = st.dictionaries(mono, coef, max_size=6).map(lambda d: Polynomial(d, nvars=4))
points01 = st.lists(st.integers(0, 1), min_size=4, max_size=4)
univ = st.lists(coef, min_size=1, max_size=5).map(lambda cs: Polynomial.from_coeffs(cs))


@given(polys, points01)
def test_value_within_weight(p, x):
    assert abs(p.evaluate(x)) <= p.weight()


@given(polys, points01)
def test_multilinearize_preserves_cube_values(p, x):
    assert multilinearize(p).evaluate(x) == p.evaluate(x)


@given(univ, polys, points01)
def test_compose_evaluates_pointwise(outer, inner, x):
    assert compose(outer, inner).evaluate(x) == outer(inner.evaluate(x))


@given(univ, polys)
@settings(max_examples=50)
def test_compose_weight_bound(outer, inner):
    # |||q(p)||| <= sum_j |a_j| |||p|||^j
    bound = sum(abs(a) * inner.weight() ** j for j, a in enumerate(outer.univariate_coeffs()))
    assert compose(outer, inner).weight() <= bound


@given(polys, polys, points01)
def test_ring_homomorphism(p, q, x):
    assert (p * q).evaluate(x) == p.evaluate(x) * q.evaluate(x)
    assert (p - q).evaluate(x) == p.evaluate(x) - q.evaluate(x)


@given(polys)
def test_serialization_round_trips(p):
    assert loads(dumps(p)) == p
    assert dumps(loads(dumps(p))) == dumps(p)
    assert from_records(to_records(p)) == p
    assert from_text(to_text(p), nvars=4) == p


@given(polys)
def test_clear_denominators_integral(p):
    q, C = clear_denominators(p)
    assert q.is_integral()
    assert q == p.scale(C)
