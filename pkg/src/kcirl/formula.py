"""Term language: parsing, printing, evaluation and validity search.

Grammar, by descending precedence: ``^`` (positive integer power, postfix on
atoms and parenthesized terms), ``*`` (fusion, left), ``&`` (meet, left),
``|`` (join, left), ``->`` (right), ``<->`` (lowest, non-associative).
Constants are ``1`` and ``0`` (alias ``bot``); atoms are identifiers.
``<->`` and ``^`` are sugar and are expanded eagerly at parse time.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterator

from .algebra import FiniteRL
from .errors import FormulaSyntaxError, UnboundVariable


class Formula:
    """Base class; subclasses are frozen dataclasses compared structurally."""

    def __str__(self) -> str:
        return print_formula(self)


@dataclass(frozen=True)
class Var(Formula):
    name: str


@dataclass(frozen=True)
class Const(Formula):
    symbol: str  # "1" or "0"


@dataclass(frozen=True)
class Fuse(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Meet(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Join(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Impl(Formula):
    left: Formula
    right: Formula


TOP = Const("1")
BOT = Const("0")


def iff(a: Formula, b: Formula) -> Formula:
    return Meet(Impl(a, b), Impl(b, a))


def fuse_power(a: Formula, m: int) -> Formula:
    if m < 1:
        raise ValueError("power must be >= 1")
    acc = a
    for _ in range(m - 1):
        acc = Fuse(acc, a)
    return acc


def meet_all(parts: list[Formula]) -> Formula:
    acc = parts[0]
    for p in parts[1:]:
        acc = Meet(acc, p)
    return acc


def join_all(parts: list[Formula]) -> Formula:
    acc = parts[0]
    for p in parts[1:]:
        acc = Join(acc, p)
    return acc


@dataclass
class Valuation:
    """Total assignment of elements of the target algebra to variable names."""

    algebra: FiniteRL
    assignment: dict[str, int]


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+)|(?P<ident>[a-zA-Z_][a-zA-Z0-9_]*)"
    r"|(?P<iff><->)|(?P<arrow>->)|(?P<op>[*&|^()]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            raise FormulaSyntaxError(f"unexpected character {stripped[0]!r}", len(text) - len(stripped))
        if m.group("num"):
            tokens.append(("num", m.group("num"), m.start("num")))
        elif m.group("ident"):
            tokens.append(("ident", m.group("ident"), m.start("ident")))
        elif m.group("iff"):
            tokens.append(("iff", "<->", m.start("iff")))
        elif m.group("arrow"):
            tokens.append(("arrow", "->", m.start("arrow")))
        else:
            tokens.append((m.group("op"), m.group("op"), m.start("op")))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str):
        tok = self.take()
        if tok[0] != kind:
            raise FormulaSyntaxError(f"expected {kind!r}, found {tok[1]!r}", tok[2])
        return tok

    def parse(self) -> Formula:
        phi = self.iff_expr()
        tok = self.peek()
        if tok[0] != "end":
            raise FormulaSyntaxError(f"unexpected trailing {tok[1]!r}", tok[2])
        return phi

    def iff_expr(self) -> Formula:
        left = self.impl_expr()
        if self.peek()[0] == "iff":
            self.take()
            right = self.impl_expr()
            left = iff(left, right)
            tok = self.peek()
            if tok[0] == "iff":
                raise FormulaSyntaxError("'<->' is non-associative", tok[2])
        return left

    def impl_expr(self) -> Formula:
        left = self.join_expr()
        if self.peek()[0] == "arrow":
            self.take()
            return Impl(left, self.impl_expr())
        return left

    def join_expr(self) -> Formula:
        left = self.meet_expr()
        while self.peek()[0] == "|":
            self.take()
            left = Join(left, self.meet_expr())
        return left

    def meet_expr(self) -> Formula:
        left = self.fuse_expr()
        while self.peek()[0] == "&":
            self.take()
            left = Meet(left, self.fuse_expr())
        return left

    def fuse_expr(self) -> Formula:
        left = self.power_expr()
        while self.peek()[0] == "*":
            self.take()
            left = Fuse(left, self.power_expr())
        return left

    def power_expr(self) -> Formula:
        base = self.primary()
        while self.peek()[0] == "^":
            self.take()
            tok = self.expect("num")
            exponent = int(tok[1])
            if exponent < 1:
                raise FormulaSyntaxError("power must be a positive integer", tok[2])
            base = fuse_power(base, exponent)
        return base

    def primary(self) -> Formula:
        tok = self.take()
        kind, value, pos = tok
        if kind == "num":
            if value == "1":
                return TOP
            if value == "0":
                return BOT
            raise FormulaSyntaxError(f"number {value!r} is not a constant", pos)
        if kind == "ident":
            if value == "bot":
                return BOT
            return Var(value)
        if kind == "(":
            phi = self.iff_expr()
            self.expect(")")
            return phi
        raise FormulaSyntaxError(f"unexpected {value!r}", pos)


def parse(text: str) -> Formula:
    return _Parser(text).parse()


_PREC = {Impl: 1, Join: 2, Meet: 3, Fuse: 4}
_SYM = {Impl: "->", Join: "|", Meet: "&", Fuse: "*"}


def print_formula(phi: Formula) -> str:
    """Render with minimal parentheses; parse(print_formula(phi)) == phi."""

    def render(t: Formula, parent: int, right_side: bool) -> str:
        if isinstance(t, Var):
            return t.name
        if isinstance(t, Const):
            return t.symbol
        prec = _PREC[type(t)]
        if type(t) is Impl:
            # right-associative: parenthesize an Impl appearing on the left
            left = render(t.left, prec + 1, False)
            right = render(t.right, prec, True)
        else:
            left = render(t.left, prec, False)
            right = render(t.right, prec + 1, True)
        text = f"{left} {_SYM[type(t)]} {right}" if type(t) is Impl else f"{left}{_SYM[type(t)]}{right}"
        if prec < parent or (prec == parent and right_side is (type(t) is not Impl)):
            return f"({text})"
        return text

    return render(phi, 0, False)


def variables(phi: Formula) -> set[str]:
    out: set[str] = set()
    stack = [phi]
    while stack:
        t = stack.pop()
        if isinstance(t, Var):
            out.add(t.name)
        elif not isinstance(t, Const):
            stack.append(t.left)
            stack.append(t.right)
    return out


def mentions_bottom(phi: Formula) -> bool:
    """True when the constant 0 occurs in the formula; such formulas live in
    the pointed language, where embeddings must respect the least element."""
    stack = [phi]
    while stack:
        t = stack.pop()
        if isinstance(t, Const):
            if t.symbol == "0":
                return True
        elif not isinstance(t, Var):
            stack.append(t.left)
            stack.append(t.right)
    return False


def evaluate(phi: Formula, v: Valuation) -> int:
    """Bottom-up table evaluation; shared subtrees are evaluated once."""
    A = v.algebra
    memo: dict[int, int] = {}

    def ev(t: Formula) -> int:
        key = id(t)
        got = memo.get(key)
        if got is not None:
            return got
        if isinstance(t, Var):
            try:
                r = v.assignment[t.name]
            except KeyError:
                raise UnboundVariable(t.name) from None
        elif isinstance(t, Const):
            r = A.one if t.symbol == "1" else A.bot
        else:
            left = ev(t.left)
            right = ev(t.right)
            if isinstance(t, Fuse):
                r = A.mult[left][right]
            elif isinstance(t, Meet):
                r = A.meet_table[left][right]
            elif isinstance(t, Join):
                r = A.join[left][right]
            else:
                r = A.imp_table[left][right]
        memo[key] = r
        return r

    return ev(phi)


_OPCODE = {Fuse: 0, Meet: 1, Join: 2, Impl: 3}


def compile_formula(phi: Formula, var_order: list[str]):
    """Flatten to a DAG program: slots 0..m-1 hold the variables in order."""
    slot_of_var = {name: i for i, name in enumerate(var_order)}
    ops: list[tuple[int, int, int]] = []
    const_slots: dict[str, int] = {}
    memo: dict[int, int] = {}
    next_slot = len(var_order)

    def visit(t: Formula) -> int:
        nonlocal next_slot
        key = id(t)
        got = memo.get(key)
        if got is not None:
            return got
        if isinstance(t, Var):
            try:
                slot = slot_of_var[t.name]
            except KeyError:
                raise UnboundVariable(t.name) from None
        elif isinstance(t, Const):
            if t.symbol in const_slots:
                slot = const_slots[t.symbol]
            else:
                slot = next_slot
                next_slot += 1
                const_slots[t.symbol] = slot
                ops.append((4 if t.symbol == "1" else 5, 0, 0))
        else:
            left = visit(t.left)
            right = visit(t.right)
            slot = next_slot
            next_slot += 1
            ops.append((_OPCODE[type(t)], left, right))
        memo[key] = slot
        return slot

    result = visit(phi)
    return ops, result, next_slot


def run_program(A: FiniteRL, ops, assignment: tuple[int, ...], result: int) -> int:
    regs = list(assignment)
    mult, meet, join, imp = A.mult, A.meet_table, A.join, A.imp_table
    for code, a, b in ops:
        if code == 0:
            regs.append(mult[regs[a]][regs[b]])
        elif code == 1:
            regs.append(meet[regs[a]][regs[b]])
        elif code == 2:
            regs.append(join[regs[a]][regs[b]])
        elif code == 3:
            regs.append(imp[regs[a]][regs[b]])
        elif code == 4:
            regs.append(A.one)
        else:
            regs.append(A.bot)
    return regs[result]


def all_valuations(A: FiniteRL, names: list[str]) -> Iterator[Valuation]:
    for tup in itertools.product(range(A.size), repeat=len(names)):
        yield Valuation(A, dict(zip(names, tup)))


def holds(A: FiniteRL, phi: Formula) -> tuple[bool, Valuation | None]:
    """Exhaustive validity check; on failure returns the lexicographically
    least counter-valuation (variables ordered by sorted name)."""
    names = sorted(variables(phi))
    ops, result, _ = compile_formula(phi, names)
    one = A.one
    if not names:
        value = run_program(A, ops, (), result)
        return (True, None) if value == one else (False, Valuation(A, {}))
    for tup in itertools.product(range(A.size), repeat=len(names)):
        if run_program(A, ops, tup, result) != one:
            return False, Valuation(A, dict(zip(names, tup)))
    return True, None


def subformulas(phi: Formula) -> tuple[Formula, ...]:
    """Distinct subtrees in first-occurrence postorder (children first)."""
    seen: dict[Formula, None] = {}

    def walk(t: Formula) -> None:
        if t in seen:
            return
        if not isinstance(t, (Var, Const)):
            walk(t.left)
            walk(t.right)
        seen[t] = None

    walk(phi)
    return tuple(seen)


def sub_values(phi: Formula, v: Valuation) -> frozenset[int]:
    return frozenset(evaluate(psi, v) for psi in subformulas(phi))
