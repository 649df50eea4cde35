"""Random finite-domain instances shared by the property and acceptance tests."""

from __future__ import annotations

import random
from dataclasses import dataclass

from realsyn.assertions import FAIL
from realsyn.finite import FiniteDomain
from realsyn.sketch import Choice, Com, Grammar, Hole, Seq, Sketch, Star, preorder


@dataclass
class Instance:
    dom: FiniteDomain
    grammar: Grammar
    sketch: Sketch
    pre: frozenset
    post: frozenset


def random_domain(rng: random.Random) -> FiniteDomain:
    n = rng.randint(1, 3)
    return FiniteDomain({name: (0, rng.randint(1, 2)) for name in "xyz"[:n]})


def random_command(rng: random.Random, dom: FiniteDomain):
    v = rng.choice(dom.names)
    lo, hi = dom.ranges[v]
    c = rng.randint(lo, hi)
    kind = rng.randrange(8)
    if kind == 0:
        return dom.skip()
    if kind == 1:
        return dom.assign(v, str(c))
    if kind == 2:
        return dom.assign(v, f"{v} + 1")
    if kind == 3:
        return dom.assign(v, f"{v} - 1")
    if kind == 4:
        return dom.assign(v, rng.choice(dom.names))
    if kind == 5:
        return dom.assume(f"{v} == {c}")
    if kind == 6:
        return dom.assume(f"{v} != {c}")
    return dom.assert_(f"{v} != {c}")


def random_predicate(rng: random.Random, dom: FiniteDomain, fail_rate: float = 0.1):
    if rng.random() < fail_rate:
        return FAIL
    if rng.random() < 0.2:
        return dom.top()
    return frozenset(s for s in dom.states if rng.random() < 0.5)


def random_selection(rng: random.Random, dom: FiniteDomain, lo: int = 1, hi: int = 3, fail_rate: float = 0.1):
    return frozenset(random_predicate(rng, dom, fail_rate) for _ in range(rng.randint(lo, hi)))


def random_grammar(rng: random.Random, dom: FiniteDomain) -> Grammar:
    g = Grammar()
    for name in ("N", "M"):
        prods: list[Sketch] = []
        for _ in range(rng.randint(2, 3)):
            com = Com(random_command(rng, dom))
            prods.append(com if rng.random() < 0.7 else Seq(com, Com(random_command(rng, dom))))
        if name == "M" and rng.random() < 0.3:
            prods.append(Seq(Com(random_command(rng, dom)), Hole("M")))
        g.add(name, prods)
    return g


def random_sketch(rng: random.Random, dom: FiniteDomain, budget: int = 12) -> Sketch:
    """Tree with at most ``budget`` nodes."""
    if budget <= 2:
        return Com(random_command(rng, dom)) if rng.random() < 0.6 else Hole(rng.choice("NM"))
    kind = rng.randrange(10)
    if kind < 3:
        return Com(random_command(rng, dom))
    if kind < 5:
        return Hole(rng.choice("NM"))
    if kind < 7:
        left = rng.randint(1, budget - 2)
        return Seq(random_sketch(rng, dom, left), random_sketch(rng, dom, budget - 1 - left))
    if kind < 9:
        left = rng.randint(1, budget - 2)
        return Choice(random_sketch(rng, dom, left), random_sketch(rng, dom, budget - 1 - left))
    inv = random_selection(rng, dom, 1, 2, fail_rate=0.0) | ({dom.top()} if rng.random() < 0.5 else set())
    return Star(random_sketch(rng, dom, budget - 1), frozenset(inv))


def node_count(sk: Sketch) -> int:
    return sum(1 for _ in preorder(sk))


def weaken(rng: random.Random, dom: FiniteDomain, r):
    if r is FAIL or rng.random() < 0.05:
        return FAIL
    return frozenset(r | {s for s in dom.states if rng.random() < 0.3})


def random_instance(rng: random.Random) -> Instance:
    dom = random_domain(rng)
    g = random_grammar(rng, dom)
    sk = random_sketch(rng, dom, rng.randint(1, 12))
    pre = random_selection(rng, dom, 1, 3, fail_rate=0.05)
    post = random_selection(rng, dom, 0, 3)
    return Instance(dom, g, sk, pre, post)


def stronger_selection(rng: random.Random, dom: FiniteDomain, sel: frozenset) -> frozenset:
    """A selection at least as versatile as ``sel``."""
    out = set()
    for r in sel:
        if r is FAIL:
            out.add(random_predicate(rng, dom, 0.3))
        else:
            out.add(frozenset(s for s in r if rng.random() < 0.7))
    if rng.random() < 0.5:
        out.add(random_predicate(rng, dom))
    return frozenset(out)
