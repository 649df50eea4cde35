"""Brute-force ground truth: exhaustive executions and exhaustive derivations.

Nothing here touches the analysis engine.  Loops are unrolled up to a bound,
so a ``True`` from :func:`brute_force_hoare` is exact only for loop-free
programs (or loops whose variant is exhausted within the bound); a ``False``
is always a genuine counterexample.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .assertions import Predicate
from .sketch import Choice, Com, Grammar, Seq, Sketch, Star, derivable_programs, executions

__all__ = ["OracleConfig", "brute_force_hoare", "brute_force_realizability", "outcomes", "realizing_programs"]


@dataclass(frozen=True)
class OracleConfig:
    unroll_bound: int = 6
    derivation_depth: int = 4

    def __post_init__(self):
        if self.unroll_bound < 0 or self.derivation_depth < 0:
            raise ValueError("oracle bounds must be non-negative")


def outcomes(dom, r: Predicate, p: Sketch, unroll_bound: int) -> set:
    """Final predicates of every execution of ``p`` from ``r``.

    Same result as evaluating each element of ``executions(p, unroll_bound)``
    separately, but shares common prefixes.
    """
    return _outcomes(dom, frozenset((r,)), p, unroll_bound)


def _outcomes(dom, starts: frozenset, p: Sketch, bound: int) -> frozenset:
    if isinstance(p, Com):
        return frozenset(dom.transfer(p.command, r) for r in starts)
    if isinstance(p, Seq):
        return _outcomes(dom, _outcomes(dom, starts, p.first, bound), p.second, bound)
    if isinstance(p, Choice):
        return _outcomes(dom, starts, p.left, bound) | _outcomes(dom, starts, p.right, bound)
    if isinstance(p, Star):
        seen = set(starts)
        layer = starts
        for _ in range(bound):
            layer = _outcomes(dom, layer, p.body, bound)
            seen |= layer
        return frozenset(seen)
    raise TypeError(f"not a program: nonterminal {p.name}")


def brute_force_hoare(dom, r: Predicate, p: Sketch, s: Predicate, cfg: OracleConfig | None = None,
                      enumerate_paths: bool = False) -> bool:
    """Every bounded execution of ``p`` from ``r`` ends inside ``s``.

    ``enumerate_paths`` walks the explicit execution set instead of the
    shared-prefix evaluation; both give the same answer.
    """
    cfg = cfg or OracleConfig()
    if enumerate_paths:
        finals: Iterable[Predicate] = (dom.eval_exec(e, r) if hasattr(dom, "eval_exec") else _run(dom, e, r)
                                       for e in executions(p, cfg.unroll_bound))
    else:
        finals = outcomes(dom, r, p, cfg.unroll_bound)
    return all(dom.leq(t, s) for t in finals)


def _run(dom, execution, r):
    for com in execution:
        r = dom.transfer(com, r)
    return r


def realizing_programs(dom, g: Grammar | None, R: Iterable[Predicate], sk: Sketch, S: Iterable[Predicate],
                       cfg: OracleConfig | None = None) -> dict:
    """For each target, the first ``(r, program)`` found with ``{r} program {s}``, or ``None``."""
    cfg = cfg or OracleConfig()
    programs = derivable_programs(g or Grammar(), sk, cfg.derivation_depth)
    pres = sorted(R, key=dom.key)
    found: dict = {}
    for s in sorted(S, key=dom.key):
        found[s] = next(((r, p) for p in programs for r in pres if brute_force_hoare(dom, r, p, s, cfg)), None)
    return found


def brute_force_realizability(dom, g: Grammar | None, R: Iterable[Predicate], sk: Sketch, S: Iterable[Predicate],
                              cfg: OracleConfig | None = None) -> bool:
    """Each target in ``S`` is met by some ``r`` in ``R`` and some derivable program."""
    return all(w is not None for w in realizing_programs(dom, g, R, sk, S, cfg).values())
