"""Backward extraction of a single program from a proof outline."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable

from .assertions import FAIL, CheckCounter, Predicate
from .realizability import (
    ChoiceOutline,
    ComOutline,
    HoleOutline,
    Outline,
    OutlineStore,
    SeqOutline,
    StarOutline,
)
from .sketch import Choice, Com, Hole, Seq, Sketch, Star

__all__ = [
    "OutlineMismatch",
    "SynResult",
    "dump_outline",
    "extract_program",
    "gather",
    "gather_all",
    "outl",
    "outline_size",
    "syn",
]


@dataclass
class SynResult:
    pre: Predicate
    program: Sketch | None
    checks: int
    # (node path, nonterminal, index of the chosen child, chosen program)
    resolutions: list = field(default_factory=list)
    backtracks: int = 0
    aborted: str | None = None

    @property
    def ok(self) -> bool:
        return self.program is not None


def outl(store: OutlineStore, node: str, r: Predicate, s: Predicate, counter: CheckCounter | None = None):
    """Sub-outlines memoized for ``(node, r)`` with their post narrowed to ``{s}``.

    Returns ``None`` (abort) when the pair was never visited or when no
    element of the memoized post is at least as precise as ``s``.
    """
    entry = store.get(node, r)
    if entry is None:
        return None
    if s not in entry.post:
        leq = store.domain.leq
        for t in store.order(entry.post):
            if counter is not None:
                counter.count += 1
            if leq(t, s):
                break
        else:
            return None
    narrowed = frozenset((s,))
    return tuple(replace(part, post=narrowed) for part in entry.parts)


class _Synthesizer:
    def __init__(self, store: OutlineStore):
        self.store = store
        self.dom = store.domain
        self.counter = CheckCounter()
        self.resolutions: list = []
        self.backtracks = 0
        self.abort_at: str | None = None

    def leq(self, r, s) -> bool:
        self.counter.count += 1
        return self.dom.leq(r, s)

    def order(self, sel):
        return self.store.order(sel)

    def justify(self, post: frozenset, s: Predicate):
        """Element of ``post`` at least as precise as ``s``, membership first."""
        if s in post:
            return s
        for t in self.order(post):
            if self.leq(t, s):
                return t
        return None

    def note_abort(self, po: Outline, s: Predicate) -> None:
        if self.abort_at is None:
            self.abort_at = f"node {po.key}: no witness for {self.dom.show(s)}"

    def run(self, po: Outline, s: Predicate):
        if not po.pre:
            return None
        if isinstance(po, ComOutline):
            for r in self.order(po.pre):
                if r is FAIL:
                    continue
                if self.leq(self.dom.transfer(po.command, r), s):
                    return r, Com(po.command)
            self.note_abort(po, s)
            return None
        if isinstance(po, SeqOutline):
            second = self.run(po.second, s)
            if second is None:
                return None
            first = self.run(po.first, second[0])
            if first is None:
                return None
            return first[0], Seq(first[1], second[1])
        if isinstance(po, HoleOutline):
            for k, child in enumerate(po.children):
                t = self.justify(child.post, s)
                if t is None:
                    continue
                mark = len(self.resolutions)
                found = self.run(child, t)
                if found is not None:
                    self.resolutions.insert(mark, (po.key, po.name, k, found[1]))
                    return found
                del self.resolutions[mark:]
                self.backtracks += 1
            self.note_abort(po, s)
            return None
        if isinstance(po, ChoiceOutline):
            for r in self.order(po.pre):
                if r is FAIL:
                    continue
                parts = outl(self.store, po.key, r, s, self.counter)
                if parts is None:
                    continue
                mark = len(self.resolutions)
                left = self.run(parts[0], s)
                right = self.run(parts[1], s) if left is not None else None
                if left is not None and right is not None:
                    return r, Choice(left[1], right[1])
                del self.resolutions[mark:]
                self.backtracks += 1
            self.note_abort(po, s)
            return None
        if isinstance(po, StarOutline):
            for i in self.order(po.reach):
                if not self.leq(i, s):
                    continue
                parts = outl(self.store, po.key, i, i, self.counter)
                if parts is None:
                    continue
                mark = len(self.resolutions)
                body = self.run(parts[0], i)
                if body is not None:
                    for r in self.order(po.pre):
                        if r is not FAIL and self.leq(r, i):
                            return r, Star(body[1], po.invariant)
                del self.resolutions[mark:]
                self.backtracks += 1
            self.note_abort(po, s)
            return None
        raise TypeError(f"not an outline node: {po!r}")


def syn(po: Outline, store: OutlineStore, s: Predicate) -> SynResult:
    """Extract ``(r, program)`` with ``{r} program {s}`` from the outline."""
    worker = _Synthesizer(store)
    found = worker.run(po, s)
    if found is None:
        reason = worker.abort_at or ("empty precondition" if not po.pre else f"no witness for {store.domain.show(s)}")
        return SynResult(FAIL, None, worker.counter.count, [], worker.backtracks, reason)
    return SynResult(found[0], found[1], worker.counter.count, worker.resolutions, worker.backtracks)


def extract_program(po: Outline) -> Sketch:
    """Erase every selection, giving back the underlying sketch."""
    if isinstance(po, ComOutline):
        return Com(po.command)
    if isinstance(po, SeqOutline):
        return Seq(extract_program(po.first), extract_program(po.second))
    if isinstance(po, ChoiceOutline):
        return Choice(extract_program(po.left), extract_program(po.right))
    if isinstance(po, StarOutline):
        return Star(extract_program(po.body), po.declared)
    if isinstance(po, HoleOutline):
        return Hole(po.name)
    raise TypeError(f"not an outline node: {po!r}")


class OutlineMismatch(ValueError):
    pass


def gather(po1: Outline, po2: Outline) -> Outline:
    """Pointwise union of two outlines over the same sketch."""
    if extract_program(po1) != extract_program(po2):
        raise OutlineMismatch("gather needs outlines over the same sketch")
    return _gather(po1, po2)


def _gather(a: Outline, b: Outline) -> Outline:
    if a is b:
        return a
    pre, post = a.pre | b.pre, a.post | b.post
    if isinstance(a, ComOutline):
        return ComOutline(a.key, pre, post, a.command)
    if isinstance(a, SeqOutline):
        return SeqOutline(a.key, pre, post, _gather(a.first, b.first), _gather(a.second, b.second))
    if isinstance(a, ChoiceOutline):
        return ChoiceOutline(a.key, pre, post, _gather(a.left, b.left), _gather(a.right, b.right))
    if isinstance(a, StarOutline):
        return StarOutline(a.key, pre, post, _gather(a.body, b.body), a.invariant | b.invariant,
                           a.reach | b.reach, a.declared)
    if isinstance(a, HoleOutline):
        # child keys name the production they analyse, so equal keys mean
        # equal programs
        children = list(a.children)
        slot = {c.key: k for k, c in enumerate(children)}
        for c in b.children:
            k = slot.get(c.key)
            if k is None:
                slot[c.key] = len(children)
                children.append(c)
            else:
                children[k] = _gather(children[k], c)
        return HoleOutline(a.key, pre, post, a.name, tuple(children), max(a.j, b.j))
    raise TypeError(f"not an outline node: {a!r}")


def gather_all(outlines: Iterable[Outline]) -> Outline:
    outlines = list(outlines)
    acc = outlines[0]
    for po in outlines[1:]:
        acc = _gather(acc, po)
    return acc


def outline_size(po: Outline, store: OutlineStore) -> int:
    """Number of predicate occurrences in the outline.

    Choice and loop nodes count the memoized per-predicate sub-outlines
    instead of their gathered branches, once per occurrence.
    """
    memo: dict[int, int] = {}

    def size(node: Outline) -> int:
        hit = memo.get(id(node))
        if hit is not None:
            return hit
        n = len(node.pre) + len(node.post)
        if isinstance(node, SeqOutline):
            n += size(node.first) + size(node.second)
        elif isinstance(node, HoleOutline):
            n += sum(size(c) for c in node.children)
        elif isinstance(node, ChoiceOutline):
            for r in node.pre:
                entry = store.get(node.key, r)
                if entry is not None:
                    n += len(entry.post) + sum(size(p) for p in entry.parts)
        elif isinstance(node, StarOutline):
            n += len(node.invariant) + len(node.reach)
            for i in node.invariant:
                entry = store.get(node.key, i)
                if entry is not None:
                    n += len(entry.post) + sum(size(p) for p in entry.parts)
        memo[id(node)] = n
        return n

    return size(po)


def dump_outline(po: Outline, show, render_command=str) -> dict:
    """JSON-ready rendering: node path, pre, post, invariant, explored productions."""
    from .sketch import render

    def sel(s):
        return sorted(show(p) for p in s)

    out: dict = {"node": po.key, "kind": type(po).__name__.replace("Outline", "").lower(),
                 "pre": sel(po.pre), "post": sel(po.post)}
    if isinstance(po, ComOutline):
        out["command"] = render_command(po.command)
    elif isinstance(po, SeqOutline):
        out["first"] = dump_outline(po.first, show, render_command)
        out["second"] = dump_outline(po.second, show, render_command)
    elif isinstance(po, ChoiceOutline):
        out["left"] = dump_outline(po.left, show, render_command)
        out["right"] = dump_outline(po.right, show, render_command)
    elif isinstance(po, StarOutline):
        out["invariant"] = sel(po.invariant)
        out["body"] = dump_outline(po.body, show, render_command)
    elif isinstance(po, HoleOutline):
        out["nonterminal"] = po.name
        out["oracle_j"] = po.j
        out["productions"] = [
            {"program": render(extract_program(c)), "outline": dump_outline(c, show, render_command)}
            for c in po.children
        ]
    return out
