import math
import warnings
from fractions import Fraction as F
from math import isqrt

import pytest

from ptfdl.amplifier import (
    CONSTANTS_ENV,
    AmplifierParams,
    AmplifierValidationError,
    build_amplifier,
    build_p1,
    build_p2,
    build_p3,
    check_points,
    default_grid,
    load_constants,
    p1_denominator,
    params_for,
    read_constants,
    selector_grid,
    validate_amplifier,
    write_constants,
)
from ptfdl.exactpoly import Polynomial, affine

t = Polynomial.var(1)
EPS = F(1, 100)


def test_p2_examples():
    assert build_p2(2, 0) == Polynomial.const(1, 1)
    s = affine(1, -1)
    assert build_p2(2, 2) == 1 + 2 * s + 3 * s * s


@pytest.mark.parametrize("d,D", [(1, 3), (2, 4), (3, 2)])
def test_p2_truncates_inverse_power(d, D):
    # sum_i C(i+d-1,i)(1-y)^i = y^-d, so the truncation times y^d stays in (0, 1]
    p2 = build_p2(d, D)
    for j in range(1, 21):
        y = F(j, 20)
        v = y**d * p2(y)
        assert 0 < v <= 1
    assert p2(F(1)) == 1


@pytest.mark.parametrize("n", [3, 9, 16, 25])
def test_p1_shape(n):
    d1 = isqrt(2 * (n - 1))
    p1 = build_p1(n, d1)
    den = p1_denominator(n, d1)
    assert p1.degree() == d1 + 1
    assert p1(F(0)) == 1
    assert p1(F(1)) == 1 / den
    for j in range(4, 4 * n + 1):
        assert abs(p1(F(j, 4))) <= 1 / den


@pytest.mark.parametrize("n", range(3, 65))
def test_p1_denominator_range_at_default_degree(n):
    den = p1_denominator(n, AmplifierParams.defaults(n, 2, EPS).d1)
    assert 5 <= den <= 55


def test_p3_degenerate_round_count_is_one():
    for n in (4, 16, 36):
        for d3 in (1, 2, 4):
            assert build_p3(n, d3, F(1, 1097), 0) == Polynomial.const(1, 1)


def test_p3_values_in_unit_range():
    p = params_for(16, 2, EPS, tune=False)
    p3 = build_p3(16, p.d3, p.amp_scale, p.amp_lo, p.reading, p.inner_power)
    for j in range(0, 16 * 4 + 1):
        assert 0 <= p3(F(j, 4)) <= 1 + EPS / 4


def test_frozen_n16_passes_on_selector_points():
    A = build_amplifier(params_for(16, 2, EPS, tune=False))
    assert A.validation.passed, A.validation.summary()
    assert A(F(0)) == 1
    assert A.degree <= 10 * math.sqrt(16)


@pytest.mark.xfail(strict=True, reason="P(1) is next to 0 for the frozen constants; see the decisions ledger")
def test_frozen_n16_full_integer_grid():
    A = build_amplifier(params_for(16, 2, EPS, tune=False))
    grid = [F(0), F(1)] + [F(j) for j in range(3, 17)]
    assert validate_amplifier(A, grid).passed


def test_every_frozen_bucket_is_valid_on_selector_points():
    table = load_constants()
    assert len(table) >= 100
    for (n, d, eps), params in table.items():
        A = build_amplifier(params)
        assert A.validation.passed, (n, eps, A.validation.summary())
        assert A.degree == params.predicted_degree()
        assert A.int_poly.is_integral()
        assert A.int_poly == A.poly.scale(A.C)


def test_values_at_matches_polynomial():
    A = build_amplifier(params_for(9, 2, EPS, tune=False))
    ts = list(range(0, 10))
    assert A.values_at(ts) == [A.poly(F(x)) for x in ts]


def test_failure_report_names_point():
    bad = AmplifierParams(n=16, d=2, eps=EPS, d1=1, D=0, d3=1)
    A = build_amplifier(bad)
    rep = A.validation
    assert not rep.passed
    first = rep.failures[0]
    assert f"t={first.t}" in rep.summary()
    assert "BAD" in rep.to_text()
    with pytest.raises(AmplifierValidationError) as exc:
        build_amplifier(bad, strict=True)
    assert exc.value.report.failures


def test_validation_csv():
    A = build_amplifier(params_for(9, 2, EPS, tune=False))
    lines = A.validation.to_csv().splitlines()
    assert lines[0] == "point,value,bound,margin,pass"
    assert len(lines) == 1 + len(selector_grid(9))
    assert all(line.endswith(",1") for line in lines[1:])


def test_empty_grid_vacuous_pass():
    with pytest.warns(UserWarning):
        rep = check_points(Polynomial.const(1, 1), 9, 2, EPS, [])
    assert rep.passed
    assert "vacuous" in rep.summary()


def test_grid_outside_range_rejected():
    with pytest.raises(ValueError):
        check_points(Polynomial.const(1, 1), 9, 2, EPS, [F(10)])


def test_grids():
    assert selector_grid(5) == [0, 3, 4, 5]
    g = default_grid(5)
    assert F(1, 10) in g and F(1) in g and F(3) in g and F(2) not in g


def test_constants_round_trip(tmp_path, monkeypatch):
    table = load_constants()
    text = write_constants(table)
    assert read_constants(text) == table
    small = {(12, 2, EPS): table[(12, 2, EPS)]}
    path = tmp_path / "c.txt"
    path.write_text(write_constants(small))
    monkeypatch.setenv(CONSTANTS_ENV, str(path))
    assert load_constants() == small


def test_unlisted_bucket_is_tuned():
    p = params_for(10, 2, F(1, 50))
    assert build_amplifier(p).validation.passed
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert params_for(10, 2, F(1, 50), tune=False) == AmplifierParams.defaults(10, 2, F(1, 50))


def test_params_validation():
    with pytest.raises(ValueError):
        AmplifierParams(n=2, d=2, eps=EPS, d1=1, D=0, d3=1)
    with pytest.raises(ValueError):
        AmplifierParams(n=9, d=2, eps=F(3, 2), d1=1, D=0, d3=1)
    with pytest.raises(ValueError):
        AmplifierParams(n=9, d=2, eps=EPS, d1=1, D=0, d3=1, reading="other")
