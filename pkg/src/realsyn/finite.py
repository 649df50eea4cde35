"""Explicit finite-state domain: integer variables over declared ranges."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .assertions import FAIL, ExplicitLattice, Predicate
from .lexer import TokenStream

__all__ = ["Expr", "FiniteCommand", "FiniteDomain", "parse_expr"]


@dataclass(frozen=True)
class Expr:
    """Expression tree; ``op`` is ``num``, ``var``, a unary or a binary operator."""

    op: str
    args: tuple = ()

    def __str__(self) -> str:
        if self.op == "num":
            return str(self.args[0])
        if self.op == "var":
            return self.args[0]
        if self.op == "paren":
            return f"({self.args[0]})"
        if len(self.args) == 1:
            return f"{self.op}{self.args[0]}"
        a, b = self.args
        return f"{a}{self.op}{b}"

    def variables(self) -> set[str]:
        if self.op == "var":
            return {self.args[0]}
        if self.op == "num":
            return set()
        out: set[str] = set()
        for a in self.args:
            out |= a.variables()
        return out


_BINARY = {
    "||": 1,
    "&&": 2,
    "==": 3, "!=": 3, "<": 3, "<=": 3, ">": 3, ">=": 3,
    "+": 4, "-": 4,
    "*": 5, "/": 5,
}


def parse_expr(ts: TokenStream, literal: bool = False, min_prec: int = 1) -> Expr:
    """Precedence-climbing parser.  In ``literal`` mode ``=`` means ``==``."""
    lhs = _parse_unary(ts, literal)
    while True:
        tok = ts.peek
        op = tok.text if tok.kind == "op" else None
        if literal and op == "=":
            op = "=="
        if op not in _BINARY or _BINARY[op] < min_prec:
            return lhs
        ts.next()
        rhs = parse_expr(ts, literal, _BINARY[op] + 1)
        lhs = Expr(op, (lhs, rhs))


def _parse_unary(ts: TokenStream, literal: bool) -> Expr:
    tok = ts.peek
    if tok.kind == "num":
        ts.next()
        return Expr("num", (int(tok.text),))
    if tok.kind == "ident":
        ts.next()
        if tok.text in ("true", "false"):
            return Expr("num", (int(tok.text == "true"),))
        return Expr("var", (tok.text,))
    if ts.accept("("):
        inner = parse_expr(ts, literal)
        ts.expect(")")
        return Expr("paren", (inner,))
    if ts.accept("!"):
        return Expr("!", (_parse_unary(ts, literal),))
    if ts.accept("-"):
        return Expr("-", (_parse_unary(ts, literal),))
    ts.fail(f"expected expression, found {tok.text or 'end of input'!r}")


def _div(a: int, b: int) -> int:
    if b == 0:
        raise ZeroDivisionError
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


_PY_OPS = {"||": "or", "&&": "and", "/": None}


def compile_expr(e: Expr, index: dict[str, int]) -> Callable[[tuple], int]:
    def py(x: Expr) -> str:
        if x.op == "num":
            return repr(x.args[0])
        if x.op == "var":
            return f"s[{index[x.args[0]]}]"
        if x.op == "paren":
            return py(x.args[0])
        if x.op == "!":
            return f"(not {py(x.args[0])})"
        if len(x.args) == 1:
            return f"(-{py(x.args[0])})"
        a, b = (py(y) for y in x.args)
        if x.op == "/":
            return f"_div({a}, {b})"
        return f"({a} {_PY_OPS.get(x.op, x.op)} {b})"

    return eval(f"lambda s: {py(e)}", {"_div": _div})  # noqa: S307 - source built from a parsed tree


@dataclass(frozen=True)
class FiniteCommand:
    kind: str  # skip | assign | assume | assert
    var: str | None = None
    expr: Expr | None = None
    fn: Callable | None = field(default=None, compare=False, repr=False)

    def __str__(self) -> str:
        if self.kind == "skip":
            return "skip"
        if self.kind == "assign":
            return f"{self.var}={self.expr}"
        return f"{self.kind}({self.expr})"


class FiniteDomain(ExplicitLattice):
    name = "finite"

    def __init__(self, variables: dict[str, tuple[int, int]] | Iterable[tuple[str, int, int]]):
        if not isinstance(variables, dict):
            variables = {n: (lo, hi) for n, lo, hi in variables}
        self.ranges = dict(variables)
        for n, (lo, hi) in self.ranges.items():
            if lo > hi:
                raise ValueError(f"empty range for {n}")
        self.names = tuple(self.ranges)
        self.index = {n: i for i, n in enumerate(self.names)}
        self.states = tuple(itertools.product(*(range(lo, hi + 1) for lo, hi in self.ranges.values())))
        self._memo: dict = {}

    # construction helpers

    def top(self) -> frozenset:
        return frozenset(self.states)

    def states_where(self, cond: Expr | str | Callable[[dict], bool]) -> frozenset:
        if isinstance(cond, str):
            from .lexer import tokenize

            ts = TokenStream(tokenize(cond))
            cond = parse_expr(ts, literal=True)
        if isinstance(cond, Expr):
            fn = self._compile(cond)
            return frozenset(s for s in self.states if fn(s))
        return frozenset(s for s in self.states if cond(dict(zip(self.names, s))))

    def state(self, **values: int) -> tuple:
        return tuple(values[n] for n in self.names)

    def _compile(self, e: Expr) -> Callable:
        unknown = e.variables() - set(self.index)
        if unknown:
            raise ValueError(f"undeclared variable {sorted(unknown)[0]}")
        return compile_expr(e, self.index)

    def command(self, kind: str, var: str | None = None, expr: Expr | str | None = None) -> FiniteCommand:
        if isinstance(expr, str):
            from .lexer import tokenize

            expr = parse_expr(TokenStream(tokenize(expr)))
        if var is not None and var not in self.index:
            raise ValueError(f"undeclared variable {var}")
        fn = self._compile(expr) if expr is not None else None
        return FiniteCommand(kind, var, expr, fn)

    def skip(self) -> FiniteCommand:
        return FiniteCommand("skip")

    def assign(self, var: str, expr: Expr | str) -> FiniteCommand:
        return self.command("assign", var, expr)

    def assume(self, expr: Expr | str) -> FiniteCommand:
        return self.command("assume", None, expr)

    def assert_(self, expr: Expr | str) -> FiniteCommand:
        return self.command("assert", None, expr)

    # semantics

    def step(self, com: FiniteCommand, st: tuple):
        """Outcome of ``com`` on one state: a state, ``None`` (filtered) or FAIL."""
        kind = com.kind
        if kind == "skip":
            return st
        try:
            value = com.fn(st)
        except ZeroDivisionError:
            return FAIL
        if kind == "assume":
            return st if value else None
        if kind == "assert":
            return st if value else FAIL
        i = self.index[com.var]
        lo, hi = self.ranges[com.var]
        if not lo <= value <= hi:
            return FAIL
        return st[:i] + (int(value),) + st[i + 1:]

    def transfer(self, com: FiniteCommand, r: Predicate) -> Predicate:
        if r is FAIL:
            return FAIL
        if com.kind == "skip":
            return r
        key = (com, r)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        out = set()
        result: Predicate
        for st in r:
            nxt = self.step(com, st)
            if nxt is FAIL:
                result = FAIL
                break
            if nxt is not None:
                out.add(nxt)
        else:
            result = frozenset(out)
        if len(self._memo) > 500_000:
            self._memo.clear()
        self._memo[key] = result
        return result

    def eval_exec(self, execution: Iterable[FiniteCommand], r: Predicate) -> Predicate:
        for com in execution:
            r = self.transfer(com, r)
        return r

    # parsing and rendering

    def parse_predicate(self, ts: TokenStream) -> Predicate:
        if ts.accept("fail"):
            return FAIL
        if ts.accept("*") or ts.accept("true"):
            return self.top()
        return self.states_where(parse_expr(ts, literal=True))

    def parse_command(self, ts: TokenStream) -> FiniteCommand | None:
        tok = ts.peek
        if tok.kind != "ident":
            return None
        nxt = ts.peek_at(1)
        if tok.text == "skip":
            ts.next()
            return self.skip()
        if tok.text in ("assume", "assert") and nxt.text == "(":
            ts.next()
            ts.expect("(")
            e = parse_expr(ts)
            ts.expect(")")
            return self._checked(lambda: self.command(tok.text, None, e), ts, tok)
        if nxt.kind == "op" and nxt.text in ("=", "--", "++"):
            ts.next()
            if ts.accept("--"):
                e = Expr("-", (Expr("var", (tok.text,)), Expr("num", (1,))))
            elif ts.accept("++"):
                e = Expr("+", (Expr("var", (tok.text,)), Expr("num", (1,))))
            else:
                ts.expect("=")
                e = parse_expr(ts)
            return self._checked(lambda: self.command("assign", tok.text, e), ts, tok)
        return None

    @staticmethod
    def _checked(build, ts: TokenStream, tok):
        try:
            return build()
        except ValueError as exc:
            ts.fail(str(exc), tok)

    def show_state(self, st: tuple) -> str:
        return ",".join(f"{n}={v}" for n, v in zip(self.names, st))

    def show(self, r: Predicate) -> str:
        if r is FAIL:
            return "fail"
        if len(r) == len(self.states):
            return "true"
        if not r:
            return "false"
        return "{" + "; ".join(self.show_state(s) for s in sorted(r)) + "}"
