"""Forward analysis over selections.

:class:`Engine` computes strongest posts, emits verification conditions and
assembles the proof outline in a single pass.  Whenever the analysis
descends into a choice branch or a loop body with a singleton precondition
it records the resulting sub-outline in an :class:`OutlineStore`, which is
what the extraction phase later reads back.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .assertions import CheckCounter, Predicate, SemanticDomain, VerificationCondition, sel_witness
from .sketch import Choice, Com, Grammar, Hole, Seq, Sketch, Star, derivable_programs, oracle_programs

__all__ = [
    "ChoiceOutline",
    "ComOutline",
    "Engine",
    "EngineConfig",
    "HoleOutline",
    "Outline",
    "OutlineStore",
    "SeqOutline",
    "StarOutline",
    "StoreEntry",
    "UnjustifiedAnnotation",
    "VcReport",
    "check_annotation_loop",
    "check_annotation_nonterminal",
    "discharge",
    "gen_vcs",
    "strongest_post",
]


@dataclass
class EngineConfig:
    oracle_budget: int = 64
    unroll: int = 8
    # nested rewriting levels used by the default nonterminal transformer
    depth: int = 3
    discharge: bool = True


class UnjustifiedAnnotation(Exception):
    def __init__(self, node: str, name: str, budget: int):
        self.node, self.name, self.budget = node, name, budget
        super().__init__(
            f"node {node}: transformer annotation of {name} not justified within budget {budget}"
        )


@dataclass(frozen=True, eq=False)
class Outline:
    key: str
    pre: frozenset
    post: frozenset


@dataclass(frozen=True, eq=False)
class ComOutline(Outline):
    command: object


@dataclass(frozen=True, eq=False)
class SeqOutline(Outline):
    first: Outline
    second: Outline


@dataclass(frozen=True, eq=False)
class ChoiceOutline(Outline):
    # branch outlines obtained by gathering the per-predicate sub-outlines
    left: Outline
    right: Outline


@dataclass(frozen=True, eq=False)
class StarOutline(Outline):
    body: Outline
    invariant: frozenset
    # invariant elements implied by the precondition
    reach: frozenset
    declared: frozenset | None = None


@dataclass(frozen=True, eq=False)
class HoleOutline(Outline):
    name: str
    children: tuple
    j: int = 0


@dataclass(frozen=True)
class StoreEntry:
    post: frozenset
    parts: tuple
    vcs: tuple = ()


class OutlineStore:
    """Sub-outlines keyed by (node path, singleton precondition)."""

    def __init__(self, domain: SemanticDomain):
        self.domain = domain
        self.entries: dict[tuple[str, Predicate], StoreEntry] = {}
        self._order: dict[frozenset, tuple] = {}

    def get(self, key: str, r: Predicate) -> StoreEntry | None:
        return self.entries.get((key, r))

    def put(self, key: str, r: Predicate, entry: StoreEntry) -> None:
        self.entries[(key, r)] = entry

    def __len__(self) -> int:
        return len(self.entries)

    def order(self, sel: Iterable[Predicate]) -> tuple:
        """Canonical iteration order of a selection."""
        if not isinstance(sel, frozenset):
            sel = frozenset(sel)
        hit = self._order.get(sel)
        if hit is None:
            hit = self._order[sel] = tuple(sorted(sel, key=self.domain.key))
        return hit


@dataclass
class VcReport:
    conditions: list[VerificationCondition] = field(default_factory=list)
    # unique (lhs, rhs) -> None when valid, else the unjustified rhs predicate
    results: dict = field(default_factory=dict)
    checks: int = 0
    verdict: bool | None = None
    oracle_j: dict[str, int] = field(default_factory=dict)
    store: OutlineStore | None = None

    @property
    def raw_count(self) -> int:
        return len(self.conditions)

    @property
    def unique_count(self) -> int:
        return len({vc.key for vc in self.conditions})

    def failures(self) -> list[tuple[VerificationCondition, Predicate]]:
        out, seen = [], set()
        for vc in self.conditions:
            wit = self.results.get(vc.key)
            if wit is not None and vc.key not in seen:
                seen.add(vc.key)
                out.append((vc, wit[0]))
        return out


def _describe(sk: Sketch) -> str:
    if isinstance(sk, Com):
        return f"command {sk.command}"
    if isinstance(sk, Hole):
        return f"nonterminal {sk.name}"
    return type(sk).__name__.lower()


class Engine:
    def __init__(self, domain: SemanticDomain, grammar: Grammar | None = None, config: EngineConfig | None = None):
        self.dom = domain
        self.grammar = grammar or Grammar()
        self.config = config or EngineConfig()
        self.store = OutlineStore(domain)
        self.counter = CheckCounter()
        self.vcs: list[VerificationCondition] = []
        self.oracle_j: dict[str, int] = {}
        self._hole_cache: dict = {}
        self._program_cache: dict = {}
        self._defaults: dict[str, list[Sketch]] = {}

    # helpers

    def order(self, sel) -> tuple:
        return self.store.order(sel)

    def sel_leq(self, lhs, rhs) -> bool:
        return sel_witness(self.order(lhs), self.order(rhs), self.dom.leq, self.counter) is None

    def _emit(self, lhs, rhs, origin: str) -> None:
        self.vcs.append(VerificationCondition(self.order(lhs), self.order(rhs), origin))

    # the pass

    def analyze(self, R: frozenset, node: Sketch, S: frozenset | None = None, key: str = "0"):
        """Return ``(sp(R, node), outline)``, emitting the conditions of ``vc(R, node, S)``.

        With ``S`` omitted the strongest post itself is the claimed post.
        """
        R = frozenset(R)
        if isinstance(node, Com):
            post = frozenset(self.dom.transfer(node.command, r) for r in R)
            claimed = post if S is None else S
            self._emit(post, claimed, f"{key} {_describe(node)}")
            return post, ComOutline(key, R, claimed, node.command)
        if isinstance(node, Seq):
            mid, first = self.analyze(R, node.first, None, key + ".0")
            post, second = self.analyze(mid, node.second, S, key + ".1")
            return post, SeqOutline(key, R, post if S is None else S, first, second)
        if isinstance(node, Choice):
            return self._choice(R, node, S, key)
        if isinstance(node, Star):
            return self._star(R, node, S, key)
        if isinstance(node, Hole):
            return self._hole(R, node, S, key)
        raise TypeError(f"not a sketch node: {node!r}")

    def _choice(self, R, node: Choice, S, key):
        post: set = set()
        lefts, rights = [], []
        for r in self.order(R):
            entry = self.store.get(key, r)
            if entry is None:
                mark = len(self.vcs)
                p1, o1 = self.analyze(frozenset((r,)), node.left, None, key + ".l")
                p2, o2 = self.analyze(frozenset((r,)), node.right, None, key + ".r")
                joined = frozenset(self.dom.join((a, b)) for a in p1 for b in p2)
                entry = StoreEntry(joined, (o1, o2), tuple(self.vcs[mark:]))
                self.store.put(key, r, entry)
            else:
                self.vcs.extend(entry.vcs)
            post |= entry.post
            lefts.append(_with_post(entry.parts[0], entry.post))
            rights.append(_with_post(entry.parts[1], entry.post))
        post = frozenset(post)
        claimed = post if S is None else S
        self._emit(post, claimed, f"{key} choice")
        if lefts:
            from .realization import gather_all

            left, right = gather_all(lefts), gather_all(rights)
        else:
            _, left = self.analyze(frozenset(), node.left, None, key + ".l")
            _, right = self.analyze(frozenset(), node.right, None, key + ".r")
        return post, ChoiceOutline(key, R, claimed, left, right)

    def _star(self, R, node: Star, S, key):
        from .realization import gather_all

        inv = node.invariant if node.invariant is not None else frozenset(R)
        reach = frozenset(i for i in self.order(inv) if self.sel_leq(R, (i,)))
        claimed = reach if S is None else S
        origin = f"{key} loop exit" + ("" if reach or not claimed else " (no invariant element reachable)")
        self._emit(reach, claimed, origin)
        bodies = []
        for i in self.order(inv):
            entry = self.store.get(key, i)
            if entry is None:
                mark = len(self.vcs)
                single = frozenset((i,))
                _, body = self.analyze(single, node.body, single, key + ".b")
                entry = StoreEntry(single, (body,), tuple(self.vcs[mark:]))
                self.store.put(key, i, entry)
            else:
                self.vcs.extend(entry.vcs)
            bodies.append(entry.parts[0])
        if bodies:
            body = gather_all(bodies)
        else:
            _, body = self.analyze(frozenset(), node.body, frozenset(), key + ".b")
        return reach, StarOutline(key, R, claimed, body, inv, reach, node.invariant)

    def _program(self, R, prog: Sketch, key: str):
        ck = (key, R)
        hit = self._program_cache.get(ck)
        if hit is None:
            mark = len(self.vcs)
            post, outline = self.analyze(R, prog, None, key)
            hit = self._program_cache[ck] = (post, outline, tuple(self.vcs[mark:]))
            del self.vcs[mark:]
        return hit

    def default_programs(self, name: str) -> list[Sketch]:
        progs = self._defaults.get(name)
        if progs is None:
            progs = derivable_programs(self.grammar, Hole(name), self.config.depth)
            progs = self._defaults[name] = progs[: self.config.oracle_budget]
        return progs

    def _hole(self, R, node: Hole, S, key):
        ck = (node.name, id(node.transformer) if node.transformer else None, R)
        hit = self._hole_cache.get(ck)
        if hit is None:
            hit = self._hole_cache[ck] = self._resolve_hole(R, node, key)
        gamma, j, children, vcs = hit
        self.vcs.extend(vcs)
        self.oracle_j[key] = j
        claimed = gamma if S is None else S
        self._emit(gamma, claimed, f"{key} nonterminal {node.name}")
        return gamma, HoleOutline(key, R, claimed, node.name, children, j)

    def _resolve_hole(self, R, node: Hole, key):
        if node.transformer is None:
            progs = self.default_programs(node.name)
            results = [self._program(R, p, f"{node.name}#d{k}") for k, p in enumerate(progs)]
            gamma = frozenset().union(*(res[0] for res in results))
            j = len(results)
            if self.config.discharge:
                j = self._min_j(results, gamma)
        else:
            gamma = frozenset(node.transformer(R))
            results, j = [], None
            for jj in range(self.config.oracle_budget + 1):
                if jj:
                    progs = oracle_programs(self.grammar, node.name, jj)
                    if len(progs) < jj:
                        break  # language exhausted; a larger j cannot help
                    results.append(self._program(R, progs[-1], f"{node.name}#o{jj - 1}"))
                if self._covers(results, gamma):
                    j = jj
                    break
            if j is None:
                raise UnjustifiedAnnotation(key, node.name, self.config.oracle_budget)
        chosen = results[:j]
        vcs = tuple(vc for res in chosen for vc in res[2])
        return gamma, j, tuple(res[1] for res in chosen), vcs

    def _covers(self, results, gamma) -> bool:
        union = frozenset().union(*(res[0] for res in results)) if results else frozenset()
        return self.sel_leq(union, gamma)

    def _min_j(self, results, gamma) -> int:
        for j in range(len(results) + 1):
            if self._covers(results[:j], gamma):
                return j
        return len(results)

    # entry points

    def run(self, R: frozenset, sketch: Sketch, S: frozenset):
        _, outline = self.analyze(frozenset(R), sketch, frozenset(S))
        report = VcReport(list(self.vcs), checks=self.counter.count, oracle_j=dict(self.oracle_j), store=self.store)
        if self.config.discharge:
            discharge(report, self.dom, self.counter)
        return report, outline


def _with_post(outline: Outline, post: frozenset) -> Outline:
    from dataclasses import replace

    return outline if outline.post == post else replace(outline, post=post)


def discharge(report: VcReport, domain: SemanticDomain | None = None, counter: CheckCounter | None = None) -> bool:
    """Check every distinct condition once; record witnesses for failures."""
    if domain is None:
        if report.store is None:
            if report.conditions:
                raise ValueError("discharge needs the semantic domain")
            report.verdict = True
            return True
        domain = report.store.domain
    counter = counter or CheckCounter(report.checks)
    for vc in report.conditions:
        if vc.key in report.results:
            continue
        report.results[vc.key] = sel_witness(vc.lhs, vc.rhs, domain.leq, counter)
    report.checks = counter.count
    report.verdict = all(w is None for w in report.results.values())
    return report.verdict


def gen_vcs(domain: SemanticDomain, grammar: Grammar | None, triple: tuple, config: EngineConfig | None = None):
    """Verification conditions and proof outline for ``(R, sketch, S)``.

    Conditions are discharged when ``config.discharge`` is set (the default).
    """
    R, sketch, S = triple
    return Engine(domain, grammar, config).run(R, sketch, S)


def strongest_post(domain: SemanticDomain, grammar: Grammar | None, R: frozenset, sketch: Sketch,
                   config: EngineConfig | None = None) -> frozenset:
    post, _ = Engine(domain, grammar, config).analyze(frozenset(R), sketch)
    return post


def check_annotation_loop(domain: SemanticDomain, grammar: Grammar | None, invariant: frozenset, body: Sketch,
                          config: EngineConfig | None = None) -> list[VerificationCondition]:
    eng = Engine(domain, grammar, config)
    for i in eng.order(invariant):
        single = frozenset((i,))
        eng.analyze(single, body, single, "0.b")
    return eng.vcs


def check_annotation_nonterminal(domain: SemanticDomain, grammar: Grammar, R: frozenset, name: str,
                                 transformer=None, config: EngineConfig | None = None):
    """Return ``(conditions, j)`` for the nonterminal annotation check."""
    eng = Engine(domain, grammar, config)
    gamma, j, _, vcs = eng._resolve_hole(frozenset(R), Hole(name, transformer), "0")
    return list(vcs), j
