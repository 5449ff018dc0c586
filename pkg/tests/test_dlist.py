import itertools
import json
from math import comb

import pytest
from hypothesis import given, strategies as st

from ptfdl.dlist import (
    DecisionList,
    EnumerationCapError,
    FullCube,
    HammingBall,
    Literal,
    ModifiedDecisionList,
    check_cap,
    domain_masks,
    dumps_list,
    enumerate_domain,
    eval_list,
    list_from_dict,
    list_to_dict,
    loads_list,
    mask_to_vector,
    odd_max_bit,
    random_list,
    to_modified,
    vector_to_mask,
)

GOLDEN_RANDOM_8_8_1 = "[(x3,-1), (~x5,+1), (x8,-1), (~x2,+1), (x7,-1), (~x8,-1), (x2,-1), (~x1,-1); +1]"


def omb_reference(x):
    ones = [i for i, b in enumerate(x, start=1) if b]
    return 1 if not ones else (-1) ** max(ones)


def test_first_true_literal_decides():
    L = DecisionList(2, [(Literal(1), 1), (Literal(2), -1)], default=-1)
    assert eval_list(L, (0, 1)) == -1
    assert eval_list(L, (1, 1)) == 1
    assert eval_list(L, (0, 0)) == -1


def test_modified_list_defaults_to_zero():
    L = ModifiedDecisionList(3, [(Literal(1), 1), (Literal(2, negated=True), -1)])
    assert eval_list(L, (0, 1, 1)) == 0


def test_negated_literal_true_at_zero():
    L = DecisionList(1, [(Literal(1, negated=True), 1)], default=-1)
    assert eval_list(L, (0,)) == 1
    assert eval_list(L, (1,)) == -1


def test_length_mismatch():
    with pytest.raises(ValueError):
        eval_list(odd_max_bit(4), (0, 1))


@pytest.mark.parametrize("bits,want", [("0000", 1), ("0110", -1), ("0001", 1), ("1000", -1)])
def test_odd_max_bit_examples(bits, want):
    assert odd_max_bit(4)(tuple(map(int, bits))) == want


@pytest.mark.parametrize("n", range(1, 15))
def test_odd_max_bit_exhaustive(n):
    L = odd_max_bit(n)
    for x in enumerate_domain(FullCube(n)):
        assert eval_list(L, x) == omb_reference(x)


def test_random_list_deterministic_and_golden():
    assert random_list(8, 8, 1) == random_list(8, 8, 1)
    assert str(random_list(8, 8, 1)) == GOLDEN_RANDOM_8_8_1
    assert random_list(8, 8, 2) != random_list(8, 8, 1)


def test_empty_list_is_its_default():
    L = random_list(5, 0, 3)
    assert len(L) == 0
    assert {eval_list(L, x) for x in enumerate_domain(FullCube(5))} == {L.default}


def test_to_modified_zeroes_fallthrough():
    L = random_list(6, 4, 7)
    M = to_modified(L)
    for x in enumerate_domain(FullCube(6)):
        want = 0 if L.first_fired(x) is None else L(x)
        assert M(x) == want


def test_domain_sizes():
    assert len(list(enumerate_domain(FullCube(3)))) == 8
    assert len(list(enumerate_domain(HammingBall(5, 2)))) == 16


@pytest.mark.parametrize("n", range(0, 21))
def test_ball_counts(n):
    ks = range(n + 1) if n <= 14 else (0, 1, 2, 3, 4, n // 2)
    for k in ks:
        masks = domain_masks(HammingBall(n, k))
        assert len(masks) == sum(comb(n, i) for i in range(k + 1)) == HammingBall(n, k).size()
        assert len(set(masks)) == len(masks)
        assert all(bin(m).count("1") <= k for m in masks)


def test_ball_order_weight_then_lexicographic():
    pts = list(enumerate_domain(HammingBall(4, 2)))
    weights = [sum(x) for x in pts]
    assert weights == sorted(weights)
    for w in range(3):
        level = [x for x in pts if sum(x) == w]
        assert level == sorted(level)
    assert pts[:3] == [(0, 0, 0, 0), (0, 0, 0, 1), (0, 0, 1, 0)]


def test_full_ball_is_cube():
    assert sorted(domain_masks(HammingBall(6, 6))) == domain_masks(FullCube(6))


def test_cap_error_mentions_sampling():
    with pytest.raises(EnumerationCapError, match="sampl"):
        check_cap(FullCube(30), cap=1 << 20)
    with pytest.raises(EnumerationCapError):
        list(enumerate_domain(FullCube(12), cap=100))


def test_cap_from_environment(monkeypatch):
    monkeypatch.setenv("PTFDL_CAP", "10")
    with pytest.raises(EnumerationCapError):
        check_cap(FullCube(4))


@given(st.lists(st.integers(0, 1), min_size=1, max_size=16))
def test_mask_vector_round_trip(x):
    x = tuple(x)
    assert mask_to_vector(vector_to_mask(x), len(x)) == x


def test_mask_convention_x1_most_significant():
    assert vector_to_mask((1, 0, 0)) == 0b100


@pytest.mark.parametrize("seed", range(10))
def test_json_round_trip(seed):
    for L in (random_list(7, 5, seed), random_list(7, 5, seed, modified=True), odd_max_bit(5)):
        text = dumps_list(L)
        assert loads_list(text) == L
        assert dumps_list(loads_list(text)) == text
        assert list_from_dict(json.loads(json.dumps(list_to_dict(L)))) == L
    assert isinstance(loads_list(dumps_list(random_list(4, 2, seed, modified=True))), ModifiedDecisionList)


def test_bad_literals_rejected():
    with pytest.raises(ValueError):
        Literal(0)
    with pytest.raises(ValueError):
        DecisionList(2, [(Literal(3), 1)], default=1)
    with pytest.raises(ValueError):
        DecisionList(2, [(Literal(1), 2)], default=1)
