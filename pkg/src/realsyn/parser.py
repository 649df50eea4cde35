"""Reader for the sketch file format.

A file is a sequence of sections::

    domain finite;
    vars x:0..1, y:0..1;
    grammar N ::= y = 0 | y = 1;
    pre { * }
    post { x=1 && y=1, fail }
    sketch { M; N; assert(x == 1 && y == 1) }

The SMR dialect declares pointers instead of variables
(``ptrs top local protectable, TOS shared active;``) and may contain the
``ac-insert;`` directive, which places an insertion nonterminal after every
primitive statement of the sketch.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .assertions import Predicate
from .finite import FiniteDomain
from .lexer import ParseError, TokenStream, tokenize
from .sketch import Choice, Com, Grammar, GrammarError, Hole, Sketch, Star, seq
from .smr import AbstractSmrDomain, PointerVar, SmrCommand, ac_grammar

__all__ = ["ParseError", "SketchFile", "parse_sketch", "load_sketch"]

_SECTIONS = {"domain", "vars", "ptrs", "grammar", "ac-insert", "pre", "post", "sketch"}
_STOPS = (";", ")", "}", "[]", "|")


@dataclass
class SketchFile:
    domain: object
    grammar: Grammar
    sketch: Sketch
    pre: frozenset
    post: frozenset
    # postcondition predicates in the order they were written
    targets: list = field(default_factory=list)
    ac_insert: bool = False

    @property
    def triple(self) -> tuple:
        return (self.pre, self.sketch, self.post)


class _Parser:
    def __init__(self, text: str):
        self.ts = TokenStream(tokenize(text))
        self.domain = None
        self.kind: str | None = None
        self.pointers: list[PointerVar] = []
        self.grammar = Grammar()
        self.nonterminals = self._declared_nonterminals()
        self.ac_insert = False
        self.pre: list[Predicate] | None = None
        self.post: list[Predicate] | None = None
        self.sketch: Sketch | None = None

    def _declared_nonterminals(self) -> set[str]:
        toks = self.ts.tokens
        return {
            toks[i + 1].text
            for i, t in enumerate(toks[:-2])
            if t.kind == "ident" and t.text == "grammar" and toks[i + 2].text == "::="
        }

    # sections

    def parse(self) -> SketchFile:
        ts = self.ts
        while ts.peek.kind != "eof":
            tok = ts.ident()
            handler = getattr(self, "_section_" + tok.text.replace("-", "_"), None)
            if tok.text not in _SECTIONS or handler is None:
                ts.fail(f"unknown section {tok.text!r}", tok)
            if tok.text not in ("domain",) and self.kind is None:
                ts.fail("the domain must be declared first", tok)
            handler()
        if self.sketch is None:
            ts.fail("missing sketch section")
        if self.domain is None:
            ts.fail("missing variable declarations")
        try:
            self.grammar.check_references([self.sketch])
        except GrammarError as exc:
            raise ParseError(str(exc)) from None
        pre = self.pre if self.pre is not None else [self.domain.top()]
        post = self.post if self.post is not None else [self.domain.top()]
        return SketchFile(
            self.domain,
            self.grammar,
            self.sketch,
            frozenset(pre),
            frozenset(post),
            list(dict.fromkeys(post)),
            self.ac_insert,
        )

    def _section_domain(self):
        tok = self.ts.ident()
        if tok.text not in ("finite", "smr"):
            self.ts.fail(f"unknown domain {tok.text!r}", tok)
        self.kind = tok.text
        self.ts.expect(";")

    def _section_vars(self):
        ts = self.ts
        if self.kind != "finite":
            ts.fail("vars belongs to the finite domain; use ptrs for smr")
        ranges: dict[str, tuple[int, int]] = {}
        while True:
            name = ts.ident()
            ts.expect(":")
            lo = self._int()
            ts.expect("..")
            hi = self._int()
            if lo > hi:
                ts.fail(f"empty range for {name.text}", name)
            ranges[name.text] = (lo, hi)
            if not ts.accept(","):
                break
        ts.expect(";")
        self.domain = FiniteDomain(ranges)

    def _int(self) -> int:
        neg = self.ts.accept("-")
        tok = self.ts.next()
        if tok.kind != "num":
            self.ts.fail("expected integer", tok)
        return -int(tok.text) if neg else int(tok.text)

    def _section_ptrs(self):
        ts = self.ts
        if self.kind != "smr":
            ts.fail("ptrs belongs to the smr domain")
        while True:
            name = ts.ident().text
            flags = set()
            while ts.peek.kind == "ident":
                flags.add(ts.next().text)
            unknown = flags - {"local", "shared", "protectable", "active"}
            if unknown:
                ts.fail(f"unknown pointer attribute {sorted(unknown)[0]!r}")
            self.pointers.append(PointerVar(name, "shared" in flags, "protectable" in flags, "active" in flags))
            if not ts.accept(","):
                break
        ts.expect(";")
        self.domain = AbstractSmrDomain(self.pointers)

    def _section_ac_insert(self):
        if self.kind != "smr":
            self.ts.fail("ac-insert needs the smr domain")
        self.ts.expect(";")
        self.ac_insert = True
        self.grammar = self.grammar.merged(ac_grammar(self.pointers))
        self.nonterminals |= {"AC", "ACA"}

    def _section_grammar(self):
        ts = self.ts
        self._need_domain()
        name = ts.ident()
        ts.expect("::=")
        if ts.at(";") or ts.peek.kind == "eof":
            ts.fail(f"nonterminal {name.text}: empty production set", name)
        prods = []
        while True:
            prods.append(self._block(in_grammar=True))
            if not ts.accept("|"):
                break
        ts.accept(";")
        self.grammar.add(name.text, prods)

    def _section_pre(self):
        self.pre = self._selection()

    def _section_post(self):
        self.post = self._selection()

    def _section_sketch(self):
        self._need_domain()
        self.ts.expect("{")
        self.sketch = self._block(top=True)
        self.ts.expect("}")

    def _need_domain(self):
        if self.domain is None:
            self.ts.fail("declare vars or ptrs first")

    def _selection(self) -> list[Predicate]:
        ts = self.ts
        self._need_domain()
        ts.expect("{")
        out = []
        while not ts.at("}"):
            out.append(self.domain.parse_predicate(ts))
            if not ts.accept(","):
                break
        ts.expect("}")
        return out

    # statements

    def _section_follows(self) -> bool:
        tok = self.ts.peek
        if tok.kind == "eof":
            return True
        if tok.kind != "ident" or tok.text not in _SECTIONS:
            return False
        nxt = self.ts.peek_at(1)
        if tok.text in ("pre", "post", "sketch"):
            return nxt.text == "{"
        if tok.text == "grammar":
            return self.ts.peek_at(2).text == "::="
        return nxt.kind == "ident" or nxt.text == ";"

    def _block(self, in_grammar: bool = False, top: bool = False, atomic: bool = False) -> Sketch:
        ts = self.ts
        items = [self._stmt(in_grammar, top, atomic)]
        while ts.accept(";"):
            if ts.at("}", ")", "[]", "|"):
                break
            if in_grammar and self._section_follows():
                break
            items.append(self._stmt(in_grammar, top, atomic))
        return seq(items)

    def _stmt(self, in_grammar: bool, top: bool, atomic: bool) -> Sketch:
        ts = self.ts
        tok = ts.peek
        if ts.accept("("):
            alts = [self._block(in_grammar, top, atomic)]
            while ts.accept("[]"):
                alts.append(self._block(in_grammar, top, atomic))
            ts.expect(")")
            out = alts[-1]
            for alt in reversed(alts[:-1]):
                out = Choice(alt, out)
            return out
        if tok.kind == "ident" and tok.text == "loop":
            return self._loop(in_grammar, top, atomic)
        if tok.kind == "ident" and tok.text == "atomic" and self.kind == "smr" and ts.peek_at(1).text == "{":
            return self._atomic(in_grammar, top, atomic)
        if tok.kind == "ident" and tok.text in self.nonterminals and ts.peek_at(1).text in _STOPS + ("",):
            ts.next()
            return Hole(tok.text)
        if self.kind == "smr":
            com = self.domain.parse_command(ts, atomic=atomic)
        else:
            com = self.domain.parse_command(ts)
        if com is None and tok.kind == "ident" and ts.peek_at(1).text in _STOPS + ("",):
            ts.fail(f"undeclared nonterminal {tok.text}", tok)
        if com is None:
            ts.fail(f"expected statement, found {tok.text or 'end of input'!r}", tok)
        if top and self.ac_insert:
            return seq([Com(com), Hole("ACA" if atomic else "AC")])
        return Com(com)

    def _loop(self, in_grammar: bool, top: bool, atomic: bool) -> Sketch:
        ts = self.ts
        start = ts.next()
        inv = None
        if ts.accept("inv"):
            inv = frozenset(self._selection())
        elif self.kind == "finite":
            ts.fail("loop needs an invariant: loop inv { ... } { ... }", start)
        ts.expect("{")
        body = self._block(in_grammar, top, atomic)
        ts.expect("}")
        return Star(body, inv)

    def _atomic(self, in_grammar: bool, top: bool, atomic: bool) -> Sketch:
        ts = self.ts
        ts.next()
        ts.expect("{")
        body = self._block(in_grammar, top, True)
        ts.expect("}")
        if atomic:
            return body
        parts: list[Sketch] = [Com(SmrCommand("atomic_begin", (), False, "atomic {"))]
        if top and self.ac_insert:
            parts.append(Hole("ACA"))
        parts += [body, Com(SmrCommand("atomic_end", (), False, "}"))]
        if top and self.ac_insert:
            parts.append(Hole("AC"))
        return seq(parts)


def parse_sketch(text: str) -> SketchFile:
    """Parse sketch file contents."""
    try:
        return _Parser(text).parse()
    except GrammarError as exc:
        raise ParseError(str(exc)) from None


def load_sketch(path: str) -> SketchFile:
    with open(path, encoding="utf-8") as fh:
        return parse_sketch(fh.read())
