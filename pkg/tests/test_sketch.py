import pytest

from realsyn.finite import FiniteDomain
from realsyn.parser import parse_sketch
from realsyn.sketch import (
    Choice,
    Com,
    Grammar,
    GrammarError,
    Hole,
    Seq,
    Star,
    derivable_programs,
    executions,
    is_program,
    oracle_programs,
    preorder,
    render,
    seq,
)

C, C1, C2, C3 = (Com(name) for name in ("c", "c1", "c2", "c3"))


def test_oracle_first_two_factorial_programs():
    d = FiniteDomain({"x": (0, 5), "y": (0, 120)})
    g = Grammar({"N": [Com(d.assign("y", "y + x")), Com(d.assign("y", "y * x"))]})
    assert [render(p) for p in oracle_programs(g, "N", 2)] == ["y=y+x", "y=y*x"]
    assert oracle_programs(g, "N", 5) == oracle_programs(g, "N", 2)


def test_oracle_zero_and_recursive_unrolling():
    g = Grammar({"N": [C, Seq(C, Hole("N"))]})
    assert oracle_programs(g, "N", 0) == []
    assert oracle_programs(g, "N", 3) == [C, Seq(C, C), Seq(C, Seq(C, C))]


def test_oracle_prefix_stable():
    g = Grammar({"N": [C1, Seq(Hole("N"), Hole("M"))], "M": [C2, C3]})
    longest = oracle_programs(g, "N", 12)
    for j in range(13):
        assert oracle_programs(Grammar(g.productions), "N", j) == longest[:j]


def test_executions_examples():
    assert executions(Seq(Choice(C1, C2), C), 3) == {("c1", "c"), ("c2", "c")}
    assert executions(Star(C), 2) == {(), ("c",), ("c", "c")}
    assert executions(Choice(Seq(C1, Star(C2)), C3), 1) == {("c1",), ("c1", "c2"), ("c3",)}


def test_executions_grow_with_bound():
    p = Seq(Star(Choice(C1, C2)), C3)
    for b in range(4):
        assert executions(p, b) <= executions(p, b + 1)


def test_derivable_examples():
    g = Grammar({"N": [C1, C2]})
    assert derivable_programs(g, Seq(Hole("N"), C), 1) == [Seq(C1, C), Seq(C2, C)]
    assert derivable_programs(g, Seq(C1, C), 0) == [Seq(C1, C)]
    rec = Grammar({"N": [C, Seq(C, Hole("N"))]})
    assert derivable_programs(rec, Hole("N"), 2) == [C, Seq(C, C)]
    assert all(is_program(p) for p in derivable_programs(rec, Hole("N"), 4))


def test_empty_production_set_rejected():
    with pytest.raises(GrammarError, match="empty production set"):
        Grammar({"N": []})


def test_recursive_names():
    g = Grammar({"N": [C, Seq(C, Hole("N"))], "M": [Hole("N")], "K": [Hole("L")], "L": [Hole("K")]})
    assert g.recursive_names() == ["K", "L", "N"]


def test_preorder_paths():
    sk = Seq(Hole("M"), Seq(Choice(C1, C2), Star(C3)))
    paths = [p for _, p, _ in preorder(sk)]
    assert paths == ["0", "0.0", "0.1", "0.1.0", "0.1.0.l", "0.1.0.r", "0.1.1", "0.1.1.b"]
    assert len(set(paths)) == len(paths)


def test_render_elides_skip():
    sk = seq([Com("x=1"), Com("skip"), Com("y=1")])
    assert render(sk) == "x=1; skip; y=1"
    assert render(sk, elide_skip=True) == "x=1; y=1"
    assert render(Com("skip"), elide_skip=True) == "skip"


def test_intro_sketch_has_three_statements():
    f = parse_sketch((__import__("pathlib").Path(__file__).parents[1] / "src/realsyn/data/intro.sk").read_text())
    top = f.sketch
    assert isinstance(top, Seq) and isinstance(top.first, Hole) and isinstance(top.second, Seq)
    assert isinstance(top.second.first, Hole) and isinstance(top.second.second, Com)
