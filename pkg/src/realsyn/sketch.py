"""Sketch syntax trees, grammars, derivation and bounded executions."""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Iterator, Union

__all__ = [
    "Choice",
    "Com",
    "Grammar",
    "GrammarError",
    "Hole",
    "Seq",
    "Sketch",
    "Star",
    "derivable_programs",
    "executions",
    "flatten",
    "holes",
    "is_program",
    "oracle_programs",
    "preorder",
    "render",
    "seq",
]


@dataclass(frozen=True)
class Com:
    command: Any


@dataclass(frozen=True)
class Seq:
    first: "Sketch"
    second: "Sketch"


@dataclass(frozen=True)
class Choice:
    left: "Sketch"
    right: "Sketch"


@dataclass(frozen=True)
class Star:
    body: "Sketch"
    # ``None`` asks the engine to take the loop-entry selection.
    invariant: frozenset | None = None


@dataclass(frozen=True)
class Hole:
    """A nonterminal occurrence, optionally annotated with a transformer."""

    name: str
    transformer: Callable[[frozenset], frozenset] | None = field(default=None, compare=False)


Sketch = Union[Com, Seq, Choice, Star, Hole]


class GrammarError(ValueError):
    pass


def seq(parts: Iterable[Sketch]) -> Sketch:
    """Right-nested sequence of ``parts``."""
    parts = list(parts)
    if not parts:
        raise ValueError("empty sequence")
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = Seq(p, out)
    return out


def flatten(sk: Sketch) -> list[Sketch]:
    if isinstance(sk, Seq):
        return flatten(sk.first) + flatten(sk.second)
    return [sk]


def children(sk: Sketch) -> tuple:
    if isinstance(sk, Seq):
        return (sk.first, sk.second)
    if isinstance(sk, Choice):
        return (sk.left, sk.right)
    if isinstance(sk, Star):
        return (sk.body,)
    return ()


def preorder(sk: Sketch, path: str = "0") -> Iterator[tuple[int, str, Sketch]]:
    """Yield ``(id, path, node)`` in preorder.

    Paths are the node identifiers used for provenance and memoization by the
    engines; ids are the preorder positions.
    """
    counter = itertools.count()
    stack = [(path, sk)]
    while stack:
        p, node = stack.pop()
        yield next(counter), p, node
        kids = children(node)
        tags = {Seq: ("0", "1"), Choice: ("l", "r"), Star: ("b",)}.get(type(node), ())
        for tag, kid in reversed(list(zip(tags, kids))):
            stack.append((f"{p}.{tag}", kid))


def holes(sk: Sketch) -> list[Hole]:
    return [n for _, _, n in preorder(sk) if isinstance(n, Hole)]


def is_program(sk: Sketch) -> bool:
    return not holes(sk)


class Grammar:
    """Nonterminal names mapped to ordered, nonempty production lists."""

    def __init__(self, productions: dict[str, Iterable[Sketch]] | None = None):
        self.productions: dict[str, tuple[Sketch, ...]] = {}
        self._oracle_cache: dict[str, tuple[list, Iterator]] = {}
        for name, prods in (productions or {}).items():
            self.add(name, prods)

    def add(self, name: str, prods: Iterable[Sketch]) -> None:
        prods = tuple(prods)
        if not prods:
            raise GrammarError(f"nonterminal {name}: empty production set")
        self.productions[name] = prods
        self._oracle_cache.clear()

    def __contains__(self, name: str) -> bool:
        return name in self.productions

    def __getitem__(self, name: str) -> tuple[Sketch, ...]:
        try:
            return self.productions[name]
        except KeyError:
            raise GrammarError(f"undeclared nonterminal {name}") from None

    def names(self) -> list[str]:
        return list(self.productions)

    def merged(self, other: "Grammar") -> "Grammar":
        out = Grammar(self.productions)
        for name, prods in other.productions.items():
            out.add(name, prods)
        return out

    def check_references(self, extra: Iterable[Sketch] = ()) -> None:
        for sk in itertools.chain(*self.productions.values(), extra):
            for h in holes(sk):
                if h.name not in self.productions:
                    raise GrammarError(f"undeclared nonterminal {h.name}")

    def recursive_names(self) -> list[str]:
        """Nonterminals lying on a derivation cycle; diagnostics only."""
        import networkx as nx

        graph = nx.DiGraph()
        for name, prods in self.productions.items():
            graph.add_node(name)
            for p in prods:
                for h in holes(p):
                    graph.add_edge(name, h.name)
        out = set()
        for comp in nx.strongly_connected_components(graph):
            if len(comp) > 1 or any(graph.has_edge(n, n) for n in comp):
                out |= comp
        return sorted(out)


def _replace_leftmost(sk: Sketch, prod: Sketch) -> tuple[Sketch, bool]:
    if isinstance(sk, Hole):
        return prod, True
    if isinstance(sk, Com):
        return sk, False
    if isinstance(sk, Star):
        body, done = _replace_leftmost(sk.body, prod)
        return (Star(body, sk.invariant), True) if done else (sk, False)
    a, b = children(sk)
    a2, done = _replace_leftmost(a, prod)
    if done:
        return type(sk)(a2, b), True
    b2, done = _replace_leftmost(b, prod)
    return (type(sk)(a, b2), True) if done else (sk, False)


def _leftmost_hole(sk: Sketch) -> Hole | None:
    for _, _, n in preorder(sk):
        if isinstance(n, Hole):
            return n
    return None


def _enumerate(g: Grammar, name: str, max_forms: int = 200_000) -> Iterator[Sketch]:
    """Programs derivable from ``name`` in breadth-first rewrite order."""
    queue: deque[Sketch] = deque([Hole(name)])
    seen_forms = {Hole(name)}
    emitted: set = set()
    explored = 0
    while queue and explored < max_forms:
        form = queue.popleft()
        explored += 1
        hole = _leftmost_hole(form)
        if hole is None:
            if form not in emitted:
                emitted.add(form)
                yield form
            continue
        for prod in g[hole.name]:
            nxt, _ = _replace_leftmost(form, prod)
            if nxt not in seen_forms:
                seen_forms.add(nxt)
                queue.append(nxt)


def oracle_programs(g: Grammar, name: str, j: int) -> list[Sketch]:
    """First ``j`` programs derivable from ``name``.

    Programs come in order of total rewrite count, ties broken by production
    index and then by position, so every result is a prefix of the result
    for a larger ``j``.
    """
    if j <= 0:
        return []
    produced, gen = g._oracle_cache.setdefault(name, ([], _enumerate(g, name)))
    while len(produced) < j:
        try:
            produced.append(next(gen))
        except StopIteration:
            break
    return produced[:j]


def derivable_programs(g: Grammar, sk: Sketch, depth: int) -> list[Sketch]:
    """Programs reachable with at most ``depth`` nested rewriting levels.

    Returned in derivation order without duplicates.
    """
    memo: dict = {}

    def go(node: Sketch, d: int) -> list[Sketch]:
        key = (node, d)
        if key in memo:
            return memo[key]
        if isinstance(node, Com):
            out = [node]
        elif isinstance(node, Hole):
            out = []
            if d > 0:
                for p in g[node.name]:
                    out.extend(go(p, d - 1))
        elif isinstance(node, Star):
            out = [Star(b, node.invariant) for b in go(node.body, d)]
        else:
            a, b = children(node)
            out = [type(node)(x, y) for x in go(a, d) for y in go(b, d)]
        out = list(dict.fromkeys(out))
        memo[key] = out
        return out

    return go(sk, depth)


def executions(p: Sketch, unroll_bound: int) -> frozenset:
    """Command sequences of ``p``: choices resolved, loops unrolled 0..bound times."""
    if isinstance(p, Com):
        return frozenset({(p.command,)})
    if isinstance(p, Seq):
        xs, ys = executions(p.first, unroll_bound), executions(p.second, unroll_bound)
        return frozenset(x + y for x in xs for y in ys)
    if isinstance(p, Choice):
        return executions(p.left, unroll_bound) | executions(p.right, unroll_bound)
    if isinstance(p, Star):
        body = executions(p.body, unroll_bound)
        out = {()}
        layer = {()}
        for _ in range(unroll_bound):
            layer = {x + y for x in layer for y in body}
            out |= layer
        return frozenset(out)
    raise TypeError(f"not a program: nonterminal {p.name}")


def _command_text(com: Any) -> str:
    return str(com)


def render(sk: Sketch, show: Callable[[Any], str] = _command_text, elide_skip: bool = False) -> str:
    """Statement syntax for ``sk``.

    With ``elide_skip`` set, ``skip`` statements inside a longer sequence are
    left out of the text.
    """
    parts = []
    for node in flatten(sk):
        if isinstance(node, Com):
            text = show(node.command)
        elif isinstance(node, Choice):
            text = f"({render(node.left, show, elide_skip)} [] {render(node.right, show, elide_skip)})"
        elif isinstance(node, Star):
            text = f"loop {{ {render(node.body, show, elide_skip)} }}"
        else:
            text = node.name
        parts.append(text)
    if elide_skip and len(parts) > 1:
        kept = [t for t in parts if t != "skip"]
        parts = kept or ["skip"]
    out = ""
    for i, text in enumerate(parts):
        if i and not (parts[i - 1].endswith("{") or text == "}"):
            out += "; "
        elif i:
            out += " "
        out += text
    return out
