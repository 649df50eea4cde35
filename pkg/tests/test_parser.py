from pathlib import Path

import pytest

from realsyn.assertions import FAIL
from realsyn.parser import ParseError, load_sketch, parse_sketch
from realsyn.sketch import Choice, Com, Hole, Seq, Star, holes, preorder

DATA = Path(__file__).parents[1] / "src" / "realsyn" / "data"


def test_intro_file():
    f = load_sketch(DATA / "intro.sk")
    d = f.domain
    assert f.pre == {d.top()}
    assert f.targets == [frozenset({(1, 1)}), FAIL]
    assert [h.name for h in holes(f.sketch)] == ["M", "N"]


def test_factorial_invariant_is_one_element():
    f = load_sketch(DATA / "factorial.sk")
    star = next(n for _, _, n in preorder(f.sketch) if isinstance(n, Star))
    assert len(star.invariant) == 1
    (inv,) = star.invariant
    assert len(inv) == 6


def test_choice_syntax():
    f = parse_sketch("domain finite; vars x:0..1; sketch { (x = 0 [] x = 1 [] skip) }")
    sk = f.sketch
    assert isinstance(sk, Choice) and isinstance(sk.right, Choice)


def test_empty_production_is_a_parse_error():
    with pytest.raises(ParseError, match="empty production set"):
        parse_sketch("domain finite; vars x:0..1; grammar N ::= ; sketch { N }")


def test_undeclared_nonterminal():
    with pytest.raises(ParseError, match="undeclared nonterminal"):
        parse_sketch("domain finite; vars x:0..1; grammar N ::= M; sketch { N }")


def test_error_reports_position():
    with pytest.raises(ParseError) as info:
        parse_sketch("domain finite;\nvars x:0..1;\nsketch { x = = 1 }")
    assert "3:" in str(info.value)


def test_finite_loops_need_invariants():
    with pytest.raises(ParseError, match="invariant"):
        parse_sketch("domain finite; vars x:0..1; sketch { loop { x = 0 } }")


def test_undeclared_variable():
    with pytest.raises(ParseError, match="undeclared variable"):
        parse_sketch("domain finite; vars x:0..1; sketch { y = 0 }")


def test_ac_insert_places_nonterminals():
    f = parse_sketch(
        "domain smr; ptrs TOS shared active, top local protectable; ac-insert;"
        "sketch { top := TOS; atomic { top := TOS; assume(top == TOS) }; access(top) }"
    )
    names = [h.name for h in holes(f.sketch)]
    # one after the first read, one at the atomic start, one after each atomic
    # statement, one after the block, one after the access
    assert names == ["AC", "ACA", "ACA", "ACA", "AC", "AC"]
    kinds = [n.command.op for _, _, n in preorder(f.sketch) if isinstance(n, Com)]
    assert kinds == ["copy", "atomic_begin", "copy", "assume_eq", "atomic_end", "access"]


def test_smr_predicate_literals():
    f = parse_sketch(
        "domain smr; ptrs TOS shared, top local; pre { (top: Eisu, TOS: A), fail } sketch { skip }"
    )
    d = f.domain
    assert FAIL in f.pre
    (a,) = [p for p in f.pre if p is not FAIL]
    assert d.show(a) == "(TOS: A, top: Eisu)"


def test_unknown_section():
    with pytest.raises(ParseError, match="unknown section"):
        parse_sketch("domain finite; vars x:0..1; bogus { } sketch { skip }")


def test_sequence_shape():
    f = parse_sketch("domain finite; vars x:0..1; grammar N ::= x = 0; sketch { N; x = 1; N }")
    assert isinstance(f.sketch, Seq) and isinstance(f.sketch.first, Hole)
