from fractions import Fraction as F

import pytest

from ptfdl.dlist import DecisionList, FullCube, Literal, enumerate_domain, odd_max_bit, random_list
from ptfdl.ptfbuild import assemble_cube_ptf
from ptfdl.winnow import (
    LearnerState,
    bound_constant,
    expand_features,
    monomials_upto,
    run_online,
    summary_csv,
    winnow_step,
)

# mistakes of the omb(8) run at alpha=11/10, d=4, recorded from the first run
GOLDEN_OMB8_MISTAKES = 439


def test_monomials_and_features():
    assert monomials_upto(3, 1) == [(), (1,), (2,), (3,)]
    assert len(monomials_upto(5, 2)) == 1 + 5 + 10
    assert expand_features((1, 0), 1) == (1, 1, 0, 0, 0, 1)
    with pytest.raises(ValueError):
        monomials_upto(2, 3)


def test_fresh_state():
    s = LearnerState.fresh(4, 2)
    assert s.feature_count == 2 * 11
    assert s.theta == 22
    assert all(w == 1 for w in s.weights)
    # exactly one of m(x), 1 - m(x) is active per monomial
    assert len(s.active((1, 0, 1, 1))) == 11


def test_correct_prediction_leaves_state():
    s = LearnerState.fresh(3, 1)
    pred, s2 = winnow_step(s, (1, 0, 0), -1)
    assert pred == -1 and s2 is s


def test_promotion_and_demotion():
    s = LearnerState.fresh(1, 0, theta=1)  # one monomial (), features [1, 1 - 1]
    pred, s2 = winnow_step(s, (0,), -1)
    assert pred == 1
    assert s2.weights == [F(1, 2), 1]
    s = LearnerState.fresh(1, 0, theta=3)
    pred, s3 = winnow_step(s, (1,), 1)
    assert pred == -1 and s3.weights == [2, 1]


def test_learns_single_literal():
    L = DecisionList(4, [(Literal(1), 1)], default=-1)
    log = run_online(L, FullCube(4), 1, passes=200)
    assert log.converged
    assert log.mistakes > 0
    for x in enumerate_domain(FullCube(4)):
        assert log.final_state.predict(x) == L(x)


@pytest.mark.parametrize("b", [1, -1])
def test_constant_list_at_most_one_mistake_per_input(b):
    L = DecisionList(4, [], default=b)
    log = run_online(L, FullCube(4), 1)
    assert log.converged
    per_input = {}
    for r in log.records:
        per_input[r.point] = per_input.get(r.point, 0) + r.mistake
    assert max(per_input.values()) <= 1
    if b < 0:
        assert log.mistakes == 0


def test_odd_max_bit_8_golden():
    L = odd_max_bit(8)
    ptf = assemble_cube_ptf(L, 4)
    d = min(ptf.poly.degree(), 8)
    log = run_online(L, FullCube(8), d, passes=300, alpha=F(11, 10))
    assert log.converged
    assert log.mistakes == GOLDEN_OMB8_MISTAKES
    for x in enumerate_domain(FullCube(8)):
        assert log.final_state.predict(x) == L(x)


def test_non_convergence_is_reported():
    L = odd_max_bit(8)
    log = run_online(L, FullCube(8), 4, passes=20)
    assert not log.converged and log.passes == 20


@pytest.mark.parametrize("order", ["reverse", "shuffled"])
def test_other_orders_converge(order):
    L = random_list(6, 5, 4)
    log = run_online(L, FullCube(6), 3, passes=300, alpha=F(11, 10), order=order, seed=2)
    assert log.converged


def test_log_and_summary_csv():
    L = DecisionList(3, [(Literal(2), 1)], default=-1)
    log = run_online(L, FullCube(3), 1)
    lines = log.to_csv().splitlines()
    assert lines[0] == "example,input,label,prediction,mistake,cumulative"
    assert len(lines) == 1 + 8 * log.passes
    assert int(lines[-1].split(",")[-1]) == log.mistakes
    s = summary_csv(3, 1, 5, log.mistakes).splitlines()
    assert s[0] == "n,d,log2_W,mistakes,log2_bound,c"


def test_bound_constant_handles_huge_weights():
    assert bound_constant(0, 10, 2, 8) == 0
    c = bound_constant(100, F(10**250), 4, 8)
    assert 0 < c < 1e-240
    assert bound_constant(10, 5, 1, 3) == pytest.approx(10 / (5 * 1.0986122886681098))
