"""Predicates, selections and the orders between them.

A predicate is either the distinguished :data:`FAIL` element or a
``frozenset`` of domain states.  A selection is a ``frozenset`` of
predicates.  Domain plugins with their own predicate representation (the
SMR domain, for instance) reuse :data:`FAIL` and plug their own ``leq`` into
:func:`sel_leq`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Iterable, Protocol

__all__ = [
    "FAIL",
    "CheckCounter",
    "ExplicitLattice",
    "SemanticDomain",
    "VerificationCondition",
    "is_fail",
    "pred_join",
    "pred_key",
    "pred_leq",
    "pred_meet",
    "sel_leq",
    "sel_witness",
]


class _Fail:
    """Singleton marking a crashed execution; the top predicate."""

    __slots__ = ()
    _instance: "_Fail | None" = None

    def __new__(cls) -> "_Fail":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "fail"

    # A fixed hash keeps set iteration order identical between runs.
    def __hash__(self) -> int:
        return 0x5EED

    def __eq__(self, other: object) -> bool:
        return other is self

    def __reduce__(self):
        return (_Fail, ())


FAIL = _Fail()

Predicate = Any  # FAIL or a domain-specific hashable value
Selection = frozenset


def is_fail(r: Predicate) -> bool:
    return r is FAIL


def pred_leq(r: Predicate, s: Predicate) -> bool:
    """``r`` is at least as precise as ``s``; fail sits on top."""
    if s is FAIL:
        return True
    if r is FAIL:
        return False
    return r <= s


def pred_join(rs: Iterable[Predicate]) -> Predicate:
    acc: set = set()
    for r in rs:
        if r is FAIL:
            return FAIL
        acc |= r
    return frozenset(acc)


def pred_meet(rs: Iterable[Predicate]) -> Predicate:
    rs = list(rs)
    if not rs:
        raise ValueError("meet of an empty collection is undefined")
    sets = [r for r in rs if r is not FAIL]
    if not sets:
        return FAIL
    acc = set(sets[0])
    for r in sets[1:]:
        acc &= r
    return frozenset(acc)


def pred_key(r: Predicate) -> tuple:
    """Canonical sort key for explicit predicates; fail sorts last."""
    if r is FAIL:
        return (1, ())
    return (0, len(r), tuple(sorted(r)))


@dataclass
class CheckCounter:
    """Counts predicate-level comparisons made on behalf of one engine."""

    count: int = 0

    def wrap(self, leq: Callable[[Predicate, Predicate], bool]) -> Callable[[Predicate, Predicate], bool]:
        def counted(r: Predicate, s: Predicate) -> bool:
            self.count += 1
            return leq(r, s)

        return counted


def sel_witness(
    lhs: Iterable[Predicate],
    rhs: Iterable[Predicate],
    leq: Callable[[Predicate, Predicate], bool] = pred_leq,
    counter: CheckCounter | None = None,
):
    """Return ``(s,)`` for the first ``s`` in ``rhs`` without a more precise element of ``lhs``.

    ``None`` means the versatility inequality holds.  Iteration follows the
    order of the given iterables, so callers that care about reproducible
    counts pass canonically sorted sequences.
    """
    lhs = tuple(lhs)
    for s in rhs:
        found = False
        for r in lhs:
            if counter is not None:
                counter.count += 1
            if leq(r, s):
                found = True
                break
        if not found:
            return (s,)
    return None


def sel_leq(
    lhs: Iterable[Predicate],
    rhs: Iterable[Predicate],
    leq: Callable[[Predicate, Predicate], bool] = pred_leq,
    counter: CheckCounter | None = None,
) -> bool:
    """Versatility order: every element of ``rhs`` has a witness in ``lhs``."""
    return sel_witness(lhs, rhs, leq, counter) is None


@dataclass(frozen=True)
class VerificationCondition:
    """Claim ``lhs`` is at least as versatile as ``rhs``.

    Both sides are stored as canonically ordered tuples.  ``origin`` names the
    sketch node (by path) and the rule that produced the condition.
    """

    lhs: tuple
    rhs: tuple
    origin: str = field(default="", compare=False)

    @property
    def key(self) -> tuple:
        return (self.lhs, self.rhs)


class SemanticDomain(Protocol):
    """What the engines need from a semantic domain."""

    def leq(self, r: Predicate, s: Predicate) -> bool: ...

    def join(self, rs: Iterable[Predicate]) -> Predicate: ...

    def transfer(self, com: Hashable, r: Predicate) -> Predicate: ...

    def key(self, r: Predicate) -> tuple: ...

    def show(self, r: Predicate) -> str: ...


class ExplicitLattice:
    """Mixin for domains whose predicates are frozensets of states."""

    def leq(self, r: Predicate, s: Predicate) -> bool:
        return pred_leq(r, s)

    def join(self, rs: Iterable[Predicate]) -> Predicate:
        return pred_join(rs)

    def key(self, r: Predicate) -> tuple:
        return pred_key(r)
