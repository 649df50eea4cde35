"""Hazard-pointer guarantees as a Cartesian abstract domain.

Every tracked pointer variable is mapped to a set of states of the
hazard-pointer automaton, stored as a 7-bit mask over ``q0..q6``.  The
forbidden state ``qf`` is never stored: reaching it is reported as FAIL.

Automaton states, from the point of view of the executing thread and the
cell a variable points to::

    q0  cell not retired, no protection
    q1  cell retired, no protection
    q2  protect invoked, cell not retired
    q3  protect invoked, cell retired
    q4  protect issued, cell not retired since
    q5  protect issued, cell was retired (protection invalid)
    q6  protect issued and valid, cell retired since

Guarantee zones chosen for the encoding::

    L = A = {q0, q2, q4}        not retired
    S     = {q4, q6}            validly protected
    E_inv = {q2, ..., q6}       protect invoked
    E_isu = {q4, q5, q6}        protect issued

A dereference is safe when every state of the variable lies in
``L | A | S = {q0, q2, q4, q6}``.  The automaton edges used:

* ``in:protect(p)`` moves ``q0 -> q2`` and ``q1 -> q3`` for ``p``.
* protecting another cell, or unprotecting, moves ``q2, q4 -> q0`` and
  ``q3, q5, q6 -> q1``.
* ``re:protect(p)`` moves ``q2 -> q4`` and ``q3 -> q5``.
* other threads retire (``q0 -> q1``, ``q2 -> q3``, ``q4 -> q6``,
  ``q5 -> q6``) and reuse a retired cell (``q1 -> q0``, ``q3 -> q2``,
  ``q5 -> q4``).  A validly protected cell is not freed, so ``q6`` is
  closed under interference.

Other variables of the thread may alias the protected one, so a protect
acts on them with both the same-cell and the other-cell edge.  Interference
runs after every command outside an atomic block and at the end of an
atomic block; shared variables lose every guarantee there.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable

from .assertions import FAIL, ExplicitLattice, Predicate
from .lexer import Token, TokenStream
from .sketch import Com, Grammar, Sketch, seq

__all__ = [
    "ACTIVE",
    "E_INV",
    "E_ISU",
    "LOCAL",
    "SAFE",
    "TOP",
    "AbstractSmrDomain",
    "ConcreteSmrDomain",
    "PointerVar",
    "SmrCommand",
    "abs_leq",
    "alpha_pred",
    "auto_invariant",
    "build_ac",
    "gamma_pred",
    "treiber_benchmarks",
]

NSTATES = 7
TOP = (1 << NSTATES) - 1


def _mask(*qs: int) -> int:
    return sum(1 << q for q in qs)


LOCAL = ACTIVE = _mask(0, 2, 4)
SAFE = _mask(4, 6)
E_INV = _mask(2, 3, 4, 5, 6)
E_ISU = _mask(4, 5, 6)
DEREF_OK = LOCAL | ACTIVE | SAFE

_ZONES = {"T": TOP, "⊤": TOP, "A": ACTIVE, "L": LOCAL, "S": SAFE, "Einv": E_INV, "Eisu": E_ISU}
_ZONE_NAMES = [("⊤", TOP), ("A", ACTIVE), ("S", SAFE), ("Einv", E_INV), ("Eisu", E_ISU)]

# per-state successor under a thread-local event
PROTECT_SAME = (2, 3, 2, 3, 4, 5, 6)
RELEASE = (0, 1, 0, 1, 0, 1, 1)
REPROTECT_SAME = (0, 1, 4, 5, 4, 5, 6)
# reflexive-transitive closure of other threads' retire/reuse edges
INTERFERE = (_mask(0, 1), _mask(0, 1), _mask(2, 3), _mask(2, 3), _mask(4, 6), _mask(4, 5, 6), _mask(6))


def _image_table(step) -> tuple[int, ...]:
    out = []
    for m in range(TOP + 1):
        acc = 0
        for q in range(NSTATES):
            if m >> q & 1:
                acc |= step(q)
        out.append(acc)
    return tuple(out)


_IMG_PROTECT = _image_table(lambda q: 1 << PROTECT_SAME[q])
_IMG_RELEASE = _image_table(lambda q: 1 << RELEASE[q])
_IMG_REPROTECT = _image_table(lambda q: 1 << REPROTECT_SAME[q])
_IMG_INTERFERE = _image_table(lambda q: INTERFERE[q])


@dataclass(frozen=True)
class PointerVar:
    name: str
    shared: bool = False
    protectable: bool = False
    active: bool = False


@dataclass(frozen=True)
class SmrCommand:
    """One SMR-relevant statement.

    ``op`` is one of skip, copy, havoc, access, load, protect, reprotect,
    unprotect, inv, assume_eq, cas, atomic_begin, atomic_end.  ``text`` is
    the statement as written and is what programs render to.
    """

    op: str
    args: tuple = ()
    atomic: bool = False
    text: str = ""

    def __str__(self) -> str:
        return self.text or self.op


def _join_tokens(tokens: Iterable[Token]) -> str:
    out = ""
    prev = ""
    for tok in tokens:
        t = tok.text
        tight = (
            not out
            or t in (")", ",", ".", "(")
            or prev in ("(", ".", "!")
        )
        if out and not tight:
            out += " "
        out += t
        prev = t
    return out


class _SmrBase:
    def __init__(self, variables: Iterable[PointerVar]):
        self.variables = tuple(variables)
        self.names = tuple(v.name for v in self.variables)
        self.index = {v.name: i for i, v in enumerate(self.variables)}
        self.shared = tuple(v.shared for v in self.variables)
        self._last_protect: str | None = None

    def var(self, name: str) -> PointerVar:
        return self.variables[self.index[name]]

    def tracked(self, name: str) -> bool:
        return name in self.index

    # command construction

    def command(self, op: str, *args: str, atomic: bool = False, text: str | None = None) -> SmrCommand:
        for a in args:
            if a is not None and a not in self.index:
                raise ValueError(f"untracked pointer {a}")
        if text is None:
            text = _default_text(op, args)
        return SmrCommand(op, tuple(args), atomic, text)

    def parse_command(self, ts: TokenStream, atomic: bool = False) -> SmrCommand | None:
        start = ts.peek
        toks = ts.balanced_until(";", "[]", "|")
        if not toks:
            return None
        text = _join_tokens(toks)
        words = [t.text for t in toks]
        try:
            return self._classify(words, text, atomic)
        except ValueError as exc:
            ts.fail(str(exc), start)

    def _classify(self, w: list[str], text: str, atomic: bool) -> SmrCommand:
        mk = lambda op, *args: self.command(op, *args, atomic=atomic, text=text)  # noqa: E731
        head = w[0]
        if w == ["skip"]:
            return mk("skip")
        if head == "in:protect" and len(w) == 4:
            self._last_protect = w[2]
            return mk("protect", w[2])
        if head == "re:protect":
            target = w[2] if len(w) == 4 else self._last_protect
            if target is None:
                raise ValueError("re:protect() without a preceding in:protect")
            return mk("reprotect", target)
        if head in ("unprotect", "in:unprotect"):
            return mk("unprotect")
        if head == "@inv":
            if len(w) != 5 or w[1] != "active":
                raise ValueError("expected @inv active(<ptr>)")
            return mk("inv", w[3])
        if head == "access" and len(w) == 4:
            return mk("access", w[2])
        if head == "assume" and len(w) > 3 and w[1] == "(" and w[-1] == ")":
            inner = w[2:-1]
            if len(inner) == 3 and inner[1] == "==" and self.tracked(inner[0]) and self.tracked(inner[2]):
                return mk("assume_eq", inner[0], inner[2])
            if inner[:2] == ["CAS", "("]:
                return self._cas(inner, mk)
            return mk("skip")
        if head == "CAS":
            return self._cas(w, mk)
        if len(w) >= 3 and w[1] == ":=":
            dst, rhs = w[0], w[2:]
            if len(rhs) == 1 and self.tracked(rhs[0]) and self.tracked(dst):
                return mk("copy", dst, rhs[0])
            if len(rhs) == 3 and rhs[1] == "." and self.tracked(rhs[0]):
                return mk("load", dst if self.tracked(dst) else None, rhs[0])
            return mk("havoc", dst) if self.tracked(dst) else mk("skip")
        if len(w) >= 5 and w[1] == "." and w[3] == ":=" and self.tracked(w[0]):
            return mk("access", w[0])
        if len(w) == 1 and w[0] in ("atomic_begin", "atomic_end"):
            return mk(w[0])
        return mk("skip")

    def _cas(self, w: list[str], mk) -> SmrCommand:
        args = [t for t in w[2:-1] if t != ","]
        if len(args) != 3:
            raise ValueError("CAS expects three arguments")
        dst, expected, new = args
        if not (self.tracked(dst) and self.tracked(expected)):
            raise ValueError("CAS compares untracked pointers")
        return mk("cas", dst, expected, new if self.tracked(new) else None)

    def parse_predicate(self, ts: TokenStream) -> Predicate:
        if ts.accept("fail"):
            return FAIL
        comps = [TOP] * len(self.variables)
        if ts.accept("*"):
            return self.make(comps)
        ts.expect("(")
        while not ts.at(")"):
            name = ts.ident()
            if name.text not in self.index:
                ts.fail(f"untracked pointer {name.text}", name)
            ts.expect(":")
            comps[self.index[name.text]] = self._parse_zone(ts)
            if not ts.accept(","):
                break
        ts.expect(")")
        return self.make(comps)

    def _parse_zone(self, ts: TokenStream) -> int:
        acc = TOP
        while True:
            if ts.accept("{"):
                m = 0
                while not ts.at("}"):
                    tok = ts.ident()
                    if not (tok.text.startswith("q") and tok.text[1:].isdigit() and int(tok.text[1:]) < NSTATES):
                        ts.fail(f"unknown automaton state {tok.text}", tok)
                    m |= 1 << int(tok.text[1:])
                    ts.accept(",")
                ts.expect("}")
            else:
                tok = ts.next()
                if tok.text not in _ZONES:
                    ts.fail(f"unknown guarantee {tok.text}", tok)
                m = _ZONES[tok.text]
            acc &= m
            if not ts.accept("&&"):
                return acc

    def make(self, comps: Iterable[int]):
        comps = tuple(comps)
        return comps if all(comps) else (0,) * len(comps)


def _default_text(op: str, args: tuple) -> str:
    a = args
    if op == "copy":
        return f"{a[0]} := {a[1]}"
    if op == "havoc":
        return f"{a[0]} := *"
    if op == "load":
        return f"{a[0]} := {a[1]}.next" if a[0] else f"access({a[1]})"
    if op in ("access", "protect", "reprotect"):
        name = {"access": "access", "protect": "in:protect", "reprotect": "re:protect"}[op]
        return f"{name}({a[0]})"
    if op == "inv":
        return f"@inv active({a[0]})"
    if op == "assume_eq":
        return f"assume({a[0]} == {a[1]})"
    if op == "cas":
        return f"CAS({a[0]}, {a[1]}, {a[2] or 'NULL'})"
    return {"unprotect": "unprotect()", "atomic_begin": "atomic {", "atomic_end": "}"}.get(op, "skip")


def _deref_targets(com: SmrCommand) -> tuple:
    if com.op == "access":
        return com.args[:1]
    if com.op == "load":
        return com.args[1:2]
    if com.op == "cas":
        return com.args[:2]
    return ()


def abs_leq(a: Predicate, b: Predicate) -> bool:
    if b is FAIL:
        return True
    if a is FAIL:
        return False
    return all(x & ~y == 0 for x, y in zip(a, b))


class AbstractSmrDomain(_SmrBase):
    """Predicates are FAIL or tuples of state masks, one per tracked pointer."""

    name = "smr"

    def __init__(self, variables: Iterable[PointerVar]):
        super().__init__(variables)
        self._memo: dict = {}

    def top(self):
        return (TOP,) * len(self.variables)

    def bottom(self):
        return (0,) * len(self.variables)

    def leq(self, a: Predicate, b: Predicate) -> bool:
        return abs_leq(a, b)

    def join(self, preds: Iterable[Predicate]) -> Predicate:
        acc = [0] * len(self.variables)
        for p in preds:
            if p is FAIL:
                return FAIL
            acc = [x | y for x, y in zip(acc, p)]
        return self.make(acc)

    def key(self, a: Predicate) -> tuple:
        # Weakest first: a precondition with fewer guarantees needs fewer
        # insertions upstream, so ties resolve towards skip.
        if a is FAIL:
            return (1, ())
        return (0, -sum(bin(m).count("1") for m in a), tuple(-m for m in a))

    def transfer(self, com: SmrCommand, a: Predicate) -> Predicate:
        if a is FAIL:
            return FAIL
        key = (com, a)
        hit = self._memo.get(key)
        if hit is None:
            hit = self._memo[key] = self._transfer(com, a)
        return hit

    def _transfer(self, com: SmrCommand, a: Predicate) -> Predicate:
        if not all(a):
            return a
        c = list(a)
        op, args = com.op, com.args
        ix = self.index
        for name in _deref_targets(com):
            if c[ix[name]] & ~DEREF_OK:
                return FAIL
        if op == "copy":
            c[ix[args[0]]] = c[ix[args[1]]]
        elif op == "havoc":
            c[ix[args[0]]] = TOP
        elif op == "load" and args[0] is not None:
            c[ix[args[0]]] = TOP
        elif op == "cas":
            c[ix[args[0]]] = c[ix[args[2]]] if args[2] is not None else TOP
        elif op == "protect":
            p = ix[args[0]]
            c = [_IMG_PROTECT[m] if i == p else _IMG_PROTECT[m] | _IMG_RELEASE[m] for i, m in enumerate(c)]
        elif op == "reprotect":
            p = ix[args[0]]
            c = [_IMG_REPROTECT[m] if i == p else m | _IMG_REPROTECT[m] for i, m in enumerate(c)]
        elif op == "unprotect":
            c = [_IMG_RELEASE[m] for m in c]
        elif op == "inv":
            c[ix[args[0]]] &= ACTIVE
        elif op == "assume_eq":
            m = c[ix[args[0]]] & c[ix[args[1]]]
            c[ix[args[0]]] = c[ix[args[1]]] = m
        if not all(c):
            return self.bottom()
        if not com.atomic and op != "atomic_begin":
            c = [TOP if sh else _IMG_INTERFERE[m] for m, sh in zip(c, self.shared)]
        return self.make(c)

    def gamma(self, a: Predicate) -> Predicate:
        return gamma_pred(a)

    def show(self, a: Predicate) -> str:
        if a is FAIL:
            return "fail"
        return "(" + ", ".join(f"{n}: {show_mask(m)}" for n, m in zip(self.names, a)) + ")"


def show_mask(m: int) -> str:
    for name, z in _ZONE_NAMES:
        if m == z:
            return name
    if m == E_ISU & SAFE & ACTIVE:
        return "{q4}"
    return "{" + ",".join(f"q{q}" for q in range(NSTATES) if m >> q & 1) + "}"


class ConcreteSmrDomain(_SmrBase, ExplicitLattice):
    """Explicit states: one automaton state per tracked pointer."""

    name = "smr-concrete"

    def __init__(self, variables: Iterable[PointerVar]):
        super().__init__(variables)
        self.states = tuple(itertools.product(range(NSTATES), repeat=len(self.variables)))

    def top(self) -> frozenset:
        return frozenset(self.states)

    def successors(self, com: SmrCommand, st: tuple):
        """Set of successor states of one concrete state, or FAIL."""
        ix = self.index
        op, args = com.op, com.args
        for name in _deref_targets(com):
            if not DEREF_OK >> st[ix[name]] & 1:
                return FAIL
        choices: list[tuple[int, ...]] = [(q,) for q in st]
        if op == "copy":
            choices[ix[args[0]]] = (st[ix[args[1]]],)
        elif op == "havoc" or (op == "load" and args[0] is not None):
            choices[ix[args[0]]] = tuple(range(NSTATES))
        elif op == "cas":
            choices[ix[args[0]]] = (st[ix[args[2]]],) if args[2] is not None else tuple(range(NSTATES))
        elif op == "protect":
            p = ix[args[0]]
            choices = [(PROTECT_SAME[q],) if i == p else tuple({PROTECT_SAME[q], RELEASE[q]}) for i, q in enumerate(st)]
        elif op == "reprotect":
            p = ix[args[0]]
            choices = [(REPROTECT_SAME[q],) if i == p else tuple({q, REPROTECT_SAME[q]}) for i, q in enumerate(st)]
        elif op == "unprotect":
            choices = [(RELEASE[q],) for q in st]
        elif op == "inv":
            if not ACTIVE >> st[ix[args[0]]] & 1:
                return set()
        elif op == "assume_eq":
            if st[ix[args[0]]] != st[ix[args[1]]]:
                return set()
        out = set(itertools.product(*choices))
        if not com.atomic and op != "atomic_begin":
            nxt = set()
            for s in out:
                per = [
                    range(NSTATES) if sh else [q2 for q2 in range(NSTATES) if INTERFERE[q] >> q2 & 1]
                    for q, sh in zip(s, self.shared)
                ]
                nxt.update(itertools.product(*per))
            out = nxt
        return out

    def transfer(self, com: SmrCommand, r: Predicate) -> Predicate:
        if r is FAIL:
            return FAIL
        out = set()
        for st in r:
            nxt = self.successors(com, st)
            if nxt is FAIL:
                return FAIL
            out |= nxt
        return frozenset(out)

    def show(self, r: Predicate) -> str:
        if r is FAIL:
            return "fail"
        return "{" + "; ".join(",".join(f"{n}=q{q}" for n, q in zip(self.names, s)) for s in sorted(r)) + "}"


def alpha_pred(r: Predicate, nvars: int | None = None) -> Predicate:
    """Cartesian abstraction of a set of concrete states."""
    if r is FAIL:
        return FAIL
    if not r:
        if nvars is None:
            raise ValueError("arity of an empty predicate is unknown")
        return (0,) * nvars
    n = len(next(iter(r)))
    acc = [0] * n
    for st in r:
        for i, q in enumerate(st):
            acc[i] |= 1 << q
    return tuple(acc)


def gamma_pred(a: Predicate) -> Predicate:
    if a is FAIL:
        return FAIL
    comps = [[q for q in range(NSTATES) if m >> q & 1] for m in a]
    return frozenset(itertools.product(*comps))


def build_ac(variables: Iterable[PointerVar], atomic: bool = False) -> list[Sketch]:
    """Productions for the insertion nonterminal.

    Order is skip, then a protect pair per protectable pointer, then an
    active annotation per always-active pointer.  Outside atomic blocks the
    annotation is wrapped in its own atomic block.
    """
    prods: list[Sketch] = [Com(SmrCommand("skip", (), atomic, "skip"))]
    for v in variables:
        if v.protectable:
            prods.append(seq([
                Com(SmrCommand("protect", (v.name,), atomic, f"in:protect({v.name})")),
                Com(SmrCommand("reprotect", (v.name,), atomic, f"re:protect({v.name})")),
            ]))
    for v in variables:
        if v.active:
            ann = Com(SmrCommand("inv", (v.name,), True, f"@inv active({v.name})"))
            if atomic:
                prods.append(ann)
            else:
                prods.append(seq([
                    Com(SmrCommand("atomic_begin", (), False, "atomic {")),
                    ann,
                    Com(SmrCommand("atomic_end", (), False, "}")),
                ]))
    return prods


def ac_grammar(variables: Iterable[PointerVar]) -> Grammar:
    variables = list(variables)
    return Grammar({"AC": build_ac(variables, False), "ACA": build_ac(variables, True)})


def auto_invariant(entry: frozenset) -> frozenset:
    """Loop invariant candidate: the selection reaching the loop head."""
    return frozenset(entry)


def treiber_benchmarks() -> list[tuple[str, object]]:
    """The bundled Treiber stack sketches as ``(name, parsed file)`` pairs."""
    from importlib import resources

    from .parser import parse_sketch

    out = []
    for name in ("treiber_pop", "treiber_push"):
        text = resources.files("realsyn").joinpath(f"data/{name}.sk").read_text(encoding="utf-8")
        out.append((name, parse_sketch(text)))
    return out
