import itertools

from realsyn.assertions import (
    FAIL,
    CheckCounter,
    VerificationCondition,
    pred_join,
    pred_leq,
    pred_meet,
    sel_leq,
    sel_witness,
)

Q1, Q2, Q3 = frozenset({1}), frozenset({2}), frozenset({3})
EMPTY = frozenset()


def test_pred_leq_examples():
    assert pred_leq(Q1, FAIL)
    assert pred_leq(EMPTY, Q1)
    assert not pred_leq(FAIL, Q1)
    assert pred_leq(FAIL, FAIL)


def test_empty_predicate_is_not_fail():
    assert EMPTY != FAIL
    assert len({EMPTY, FAIL, frozenset({EMPTY})}) == 3


def test_pred_join_examples():
    assert pred_join([FAIL, Q1]) is FAIL
    assert pred_join([Q1, Q2]) == frozenset({1, 2})
    assert pred_join([Q1]) == Q1
    assert pred_join([]) == EMPTY


def test_pred_meet_examples():
    assert pred_meet([FAIL]) is FAIL
    assert pred_meet([FAIL, frozenset({1, 2})]) == frozenset({1, 2})
    assert pred_meet([frozenset({1, 2}), frozenset({2, 3})]) == Q2


def test_sel_leq_examples():
    assert sel_leq(frozenset({Q1}), frozenset())
    assert sel_leq(frozenset(), frozenset())
    assert sel_leq(frozenset({EMPTY}), frozenset({Q1, FAIL}))
    assert sel_leq(frozenset({Q1}), frozenset({frozenset({1, 2})}))
    assert not sel_leq(frozenset(), frozenset({FAIL}))


def test_witness_names_first_unjustified_target():
    counter = CheckCounter()
    lhs = (Q1,)
    rhs = (frozenset({1, 2}), Q2, Q3)
    assert sel_witness(lhs, rhs, pred_leq, counter) == (Q2,)
    assert counter.count == 2


def test_counter_wrap_counts_calls():
    counter = CheckCounter()
    leq = counter.wrap(pred_leq)
    subsets = [frozenset(c) for n in range(3) for c in itertools.combinations((1, 2), n)]
    for a, b in itertools.product(subsets, repeat=2):
        leq(a, b)
    assert counter.count == len(subsets) ** 2


def test_vc_identity_ignores_origin():
    a = VerificationCondition((Q1,), (Q1,), "0.0 command x=1")
    b = VerificationCondition((Q1,), (Q1,), "0.1 choice")
    assert a == b and a.key == b.key
