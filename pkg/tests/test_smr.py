import itertools

import pytest

from realsyn.assertions import FAIL
from realsyn.parser import parse_sketch
from realsyn.sketch import Seq, render
from realsyn.smr import (
    ACTIVE,
    E_INV,
    E_ISU,
    SAFE,
    TOP,
    AbstractSmrDomain,
    ConcreteSmrDomain,
    PointerVar,
    abs_leq,
    alpha_pred,
    auto_invariant,
    build_ac,
    gamma_pred,
    treiber_benchmarks,
)

TOS = PointerVar("TOS", shared=True, active=True)
TOP_VAR = PointerVar("top", protectable=True)
VARS = [TOP_VAR, TOS]
D = AbstractSmrDomain(VARS)
Q4 = 1 << 4


def cmd(op, *args, atomic=False):
    return D.command(op, *args, atomic=atomic)


def test_hazard_pointer_walkthrough():
    a = D.transfer(cmd("copy", "top", "TOS"), D.top())
    assert a == (TOP, TOP)
    a = D.transfer(cmd("protect", "top"), a)
    assert a == (E_INV, TOP)
    a = D.transfer(cmd("reprotect", "top"), a)
    assert a == (E_ISU, TOP)
    a = D.transfer(cmd("atomic_begin"), a)
    a = D.transfer(cmd("inv", "TOS", atomic=True), a)
    assert a == (E_ISU, ACTIVE)
    a = D.transfer(cmd("assume_eq", "top", "TOS", atomic=True), a)
    assert a == (Q4, Q4)
    assert Q4 == E_ISU & ACTIVE and Q4 & ~SAFE == 0
    a = D.transfer(cmd("atomic_end"), a)
    # the active guarantee is lost for top, TOS loses everything
    assert a == (SAFE, TOP)
    assert D.transfer(cmd("access", "top"), a) != FAIL


def test_unsafe_access_fails():
    assert D.transfer(cmd("access", "top"), D.top()) is FAIL
    assert D.transfer(cmd("access", "top"), FAIL) is FAIL


def test_protecting_another_pointer_cancels():
    d = AbstractSmrDomain([PointerVar("a", protectable=True), PointerVar("b", protectable=True)])
    a = d.transfer(d.command("protect", "a", atomic=True), d.top())
    a = d.transfer(d.command("reprotect", "a", atomic=True), a)
    b = d.transfer(d.command("protect", "b", atomic=True), a)
    # b may alias a, so a keeps its states or drops back to unprotected ones
    assert b[0] & 0b11 and not abs_leq(b, a)
    assert d.transfer(d.command("unprotect", atomic=True), a) == (0b11, 0b11)


def test_abs_leq_examples():
    a = (E_ISU, ACTIVE)
    assert abs_leq(a, FAIL)
    assert abs_leq(a, a)
    assert abs_leq((Q4, Q4), a)
    assert not abs_leq(FAIL, a)


def test_bottom_is_canonical():
    assert D.make((0, TOP)) == (0, 0)
    assert D.join([]) == (0, 0)
    assert D.transfer(cmd("assume_eq", "top", "TOS", atomic=True), (1, 2)) == (0, 0)


def test_alpha_gamma_examples():
    t1, t2, t = 1, 2, 4
    r = frozenset({(t1, t), (t2, t)})
    assert alpha_pred(r) == (0b110, 1 << t)
    assert alpha_pred(FAIL) is FAIL
    assert alpha_pred(frozenset({(3, 5)})) == (1 << 3, 1 << 5)
    assert gamma_pred((0b110,)) == {(1,), (2,)}
    assert gamma_pred(FAIL) is FAIL
    assert gamma_pred((0,)) == frozenset()
    assert alpha_pred(frozenset(), 2) == (0, 0)


def test_galois_insertion_one_variable():
    for m in range(TOP + 1):
        assert alpha_pred(gamma_pred((m,)), 1) == (m,)
    for bits in range(1 << 7):
        r = frozenset((q,) for q in range(7) if bits >> q & 1)
        assert r <= gamma_pred(alpha_pred(r, 1))


def test_transfer_matches_concrete_one_variable():
    for shared, atomic in itertools.product((False, True), repeat=2):
        v = [PointerVar("p", shared=shared, protectable=True, active=True)]
        ad, cd = AbstractSmrDomain(v), ConcreteSmrDomain(v)
        coms = [ad.command(op, *args, atomic=atomic) for op, args in [
            ("skip", ()), ("havoc", ("p",)), ("access", ("p",)), ("protect", ("p",)),
            ("reprotect", ("p",)), ("unprotect", ()), ("inv", ("p",)), ("atomic_begin", ()), ("atomic_end", ())]]
        for com in coms:
            for m in range(TOP + 1):
                want = cd.transfer(com, gamma_pred((m,)))
                assert ad.transfer(com, (m,)) == alpha_pred(want, 1), (com, m)


def test_build_ac_orders_skip_protect_annotation():
    prods = build_ac(VARS)
    assert [render(p) for p in prods] == [
        "skip", "in:protect(top); re:protect(top)", "atomic { @inv active(TOS) }",
    ]
    assert [render(p) for p in build_ac(VARS, atomic=True)][2] == "@inv active(TOS)"
    assert [render(p) for p in build_ac([])] == ["skip"]
    assert [render(p) for p in build_ac([PointerVar("v")])] == ["skip"]


def test_auto_invariant_examples():
    t = frozenset({D.top()})
    assert auto_invariant(t) == t
    assert auto_invariant(frozenset()) == frozenset()
    two = frozenset({D.top(), (E_ISU, TOP)})
    assert auto_invariant(two) == two


def test_treiber_benchmarks_load():
    benches = dict(treiber_benchmarks())
    assert set(benches) == {"treiber_pop", "treiber_push"}
    for f in benches.values():
        assert FAIL not in f.pre and FAIL not in f.post
        assert f.ac_insert


def test_re_protect_without_argument():
    f = parse_sketch("domain smr; ptrs top protectable; sketch { in:protect(top); re:protect() }")
    assert isinstance(f.sketch, Seq)
    assert f.sketch.second.command.op == "reprotect" and f.sketch.second.command.args == ("top",)
    with pytest.raises(Exception, match="re:protect"):
        parse_sketch("domain smr; ptrs top protectable; sketch { re:protect() }")


def test_cas_compares_both_pointers():
    f = parse_sketch("domain smr; ptrs TOS shared, top, nxt; sketch { atomic { assume(CAS(TOS, top, nxt)) } }")
    d = f.domain
    com = f.sketch.second.first.command
    assert com.op == "cas" and com.args == ("TOS", "top", "nxt")
    assert d.transfer(com, d.top()) is FAIL
