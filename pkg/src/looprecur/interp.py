"""Concrete interpreter for checked MiniC programs.

This is the executable semantics the bounded model checker is measured
against: the expression evaluator here and the bit-level encoder are two
independent implementations of the same arithmetic, and witness replay
runs through this module only.

Statuses a run can end with:
  returned          main returned normally
  nondet-exhausted  the input sequence ran out of values
  infeasible        a failed assume (or division by zero) cut the execution
  assert-violated   an assert condition evaluated to zero
  step-limit        the global statement budget was exceeded
  iter-limit        one loop activation exceeded the per-activation cap
  visit-limit       the watched loop reached its requested visit count
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .nodes import (
    Assert,
    Assign,
    Assume,
    Binary,
    Block,
    Break,
    Call,
    Cast,
    Continue,
    Decl,
    DoWhile,
    Expr,
    ExprStmt,
    For,
    If,
    IntType,
    Literal,
    Nondet,
    Noop,
    OpAssign,
    Program,
    Return,
    Stmt,
    Unary,
    Var,
    While,
)


def convert(v: int, ty: IntType) -> int:
    """C value conversion: converting to the boolean type tests against
    zero; every other conversion truncates and reinterprets modulo 2^w."""
    if ty.width == 1:
        return 1 if v != 0 else 0
    return ty.wrap(v)


def _divmod_trunc(a: int, b: int) -> tuple[int, int]:
    """C division semantics: quotient truncates toward zero."""
    q = abs(a) // abs(b)
    if (a < 0) != (b < 0):
        q = -q
    return q, a - b * q


def binop(op: str, a: int, b: int, ty: IntType) -> int:
    """Apply a binary operator to two canonical values of type ty.

    Division by zero raises ZeroDivisionError for the caller to turn into
    an infeasible path. Signed overflow wraps (two's complement).
    """
    if op == "+":
        return ty.wrap(a + b)
    if op == "-":
        return ty.wrap(a - b)
    if op == "*":
        return ty.wrap(a * b)
    if op in ("/", "%"):
        if b == 0:
            raise ZeroDivisionError
        if ty.signed:
            q, r = _divmod_trunc(a, b)
        else:
            q, r = a // b, a % b
        return ty.wrap(q if op == "/" else r)
    if op == "<<":
        sh = ty.to_bits(b) & (ty.width - 1)
        return ty.wrap(a << sh)
    if op == ">>":
        sh = ty.to_bits(b) & (ty.width - 1)
        return ty.wrap(a >> sh)  # canonical negatives shift arithmetically
    if op == "&":
        return ty.wrap(a & b)
    if op == "|":
        return ty.wrap(a | b)
    if op == "^":
        return ty.wrap(a ^ b)
    if op == "==":
        return 1 if a == b else 0
    if op == "!=":
        return 1 if a != b else 0
    if op == "<":
        return 1 if a < b else 0
    if op == "<=":
        return 1 if a <= b else 0
    if op == ">":
        return 1 if a > b else 0
    if op == ">=":
        return 1 if a >= b else 0
    raise AssertionError(f"unhandled operator {op!r}")


@dataclass
class NondetSequence:
    """The input tape for one run: raw ints, converted to the drawn type
    at consumption time."""

    values: list[int] = field(default_factory=list)
    pos: int = 0

    def draw(self, ty: IntType) -> int:
        if self.pos >= len(self.values):
            raise _Stop("nondet-exhausted")
        v = convert(self.values[self.pos], ty)
        self.pos += 1
        return v


@dataclass
class DrawEvent:
    seq: int  # 0-based consumption index
    ty: IntType
    value: int
    instr: bool


@dataclass
class VisitEvent:
    loop_id: int
    visit: int  # per-loop body-entry counter, over all activations


@dataclass
class RunResult:
    status: str
    exit_code: Optional[int] = None
    env: dict[str, int] = field(default_factory=dict)
    events: list = field(default_factory=list)  # DrawEvent | VisitEvent, chronological
    steps: int = 0
    violated: Optional[Assert] = None
    violated_loop: Optional[int] = None
    violated_visit: Optional[int] = None
    snapshots: list[tuple[int, dict[str, int]]] = field(default_factory=list)

    @property
    def draws(self) -> list[DrawEvent]:
        return [e for e in self.events if isinstance(e, DrawEvent)]

    @property
    def visits(self) -> list[VisitEvent]:
        return [e for e in self.events if isinstance(e, VisitEvent)]


class _Stop(Exception):
    def __init__(self, status: str):
        self.status = status


_BREAK = ("break",)
_CONTINUE = ("continue",)


class Interp:
    def __init__(
        self,
        p: Program,
        nds: NondetSequence,
        *,
        asserts_enabled: bool = True,
        instr_zero: bool = False,
        step_limit: Optional[int] = None,
        iter_limit: Optional[int] = None,
        watch_loop: Optional[int] = None,
        watch_vars: Optional[list[str]] = None,
        visit_limit: Optional[int] = None,
    ):
        self.p = p
        self.nds = nds
        self.asserts_enabled = asserts_enabled
        self.instr_zero = instr_zero
        self.step_limit = step_limit
        self.iter_limit = iter_limit
        self.watch_loop = watch_loop
        self.watch_vars = watch_vars or []
        self.visit_limit = visit_limit
        self.env: dict[str, int] = {}
        self.events: list = []
        self.steps = 0
        self.visit_counters: dict[int, int] = {}
        self.loop_stack: list[tuple[int, int]] = []  # (loop_id, current visit)
        self.result = RunResult("returned")

    # --- expressions ---

    def eval(self, e: Expr) -> int:
        if isinstance(e, Literal):
            return e.value
        if isinstance(e, Var):
            return self.env[e.name]
        if isinstance(e, Nondet):
            if self.instr_zero and e.instr:
                return 0
            seq = self.nds.pos
            v = self.nds.draw(e.nd_type)
            self.events.append(DrawEvent(seq, e.nd_type, v, e.instr))
            return v
        if isinstance(e, Unary):
            v = convert(self.eval(e.operand), e.opty)
            if e.op == "-":
                return e.opty.wrap(-v)
            if e.op == "~":
                return e.opty.wrap(~v)
            if e.op == "!":
                return 1 if v == 0 else 0
            raise AssertionError(f"unhandled unary {e.op!r}")
        if isinstance(e, Binary):
            if e.op == "&&":
                if self.eval(e.lhs) == 0:
                    return 0
                return 0 if self.eval(e.rhs) == 0 else 1
            if e.op == "||":
                if self.eval(e.lhs) != 0:
                    return 1
                return 0 if self.eval(e.rhs) == 0 else 1
            a = convert(self.eval(e.lhs), e.opty)
            b = convert(self.eval(e.rhs), e.opty)
            try:
                return binop(e.op, a, b, e.opty)
            except ZeroDivisionError:
                raise _Stop("infeasible") from None
        if isinstance(e, Cast):
            return convert(self.eval(e.operand), e.to)
        if isinstance(e, Call):
            fn = self.p.functions[e.name]
            for param, arg in zip(fn.params, e.args):
                self.env[param.name] = convert(self.eval(arg), param.var_type)
            r = self.exec_stmt(fn.body)
            if isinstance(r, tuple) and r and r[0] == "return":
                return convert(r[1], fn.ret) if fn.ret is not None else 0
            return 0  # fell off the end
        raise AssertionError(f"unhandled expression {type(e).__name__}")

    # --- statements ---

    def exec_stmt(self, s: Stmt):
        self.steps += 1
        if self.step_limit is not None and self.steps > self.step_limit:
            raise _Stop("step-limit")
        if isinstance(s, Block):
            for c in s.stmts:
                r = self.exec_stmt(c)
                if r is not None:
                    return r
            return None
        if isinstance(s, Decl):
            v = self.eval(s.init) if s.init is not None else 0
            self.env[s.name] = convert(v, s.var_type)
            return None
        if isinstance(s, Assign):
            info = self.p.symbols[s.name]
            self.env[s.name] = convert(self.eval(s.value), info.var_type)
            return None
        if isinstance(s, OpAssign):
            info = self.p.symbols[s.name]
            a = convert(self.env[s.name], s.opty)
            b = convert(self.eval(s.value), s.opty)
            try:
                v = binop(s.op, a, b, s.opty)
            except ZeroDivisionError:
                raise _Stop("infeasible") from None
            self.env[s.name] = convert(v, info.var_type)
            return None
        if isinstance(s, ExprStmt):
            self.eval(s.expr)
            return None
        if isinstance(s, If):
            if self.eval(s.cond) != 0:
                return self.exec_stmt(s.then)
            if s.orelse is not None:
                return self.exec_stmt(s.orelse)
            return None
        if isinstance(s, While):
            iters = 0
            while self.eval(s.cond) != 0:
                iters += 1
                self._enter_body(s.loop_id, iters)
                r = self.exec_stmt(s.body)
                self.loop_stack.pop()
                if r is _BREAK:
                    break
                if r is not None and r is not _CONTINUE:
                    return r
            return None
        if isinstance(s, DoWhile):
            iters = 0
            while True:
                iters += 1
                self._enter_body(s.loop_id, iters)
                r = self.exec_stmt(s.body)
                self.loop_stack.pop()
                if r is _BREAK:
                    break
                if r is not None and r is not _CONTINUE:
                    return r
                if self.eval(s.cond) == 0:
                    break
            return None
        if isinstance(s, For):
            if s.init is not None:
                r = self.exec_stmt(s.init)
                if r is not None:
                    return r
            iters = 0
            while s.cond is None or self.eval(s.cond) != 0:
                iters += 1
                self._enter_body(s.loop_id, iters)
                r = self.exec_stmt(s.body)
                self.loop_stack.pop()
                if r is _BREAK:
                    break
                if r is not None and r is not _CONTINUE:
                    return r
                if s.update is not None:
                    r = self.exec_stmt(s.update)
                    if r is not None:
                        return r
            return None
        if isinstance(s, Break):
            return _BREAK
        if isinstance(s, Continue):
            return _CONTINUE
        if isinstance(s, Return):
            return ("return", self.eval(s.value) if s.value is not None else 0)
        if isinstance(s, Assert):
            if self.eval(s.cond) == 0 and self.asserts_enabled:
                self.result.violated = s
                if self.loop_stack:
                    self.result.violated_loop, self.result.violated_visit = self.loop_stack[-1]
                raise _Stop("assert-violated")
            return None
        if isinstance(s, Assume):
            if self.eval(s.cond) == 0:
                raise _Stop("infeasible")
            return None
        if isinstance(s, Noop):
            return None
        raise AssertionError(f"unhandled statement {type(s).__name__}")

    def _enter_body(self, loop_id: int, activation_iters: int):
        if self.iter_limit is not None and activation_iters > self.iter_limit:
            raise _Stop("iter-limit")
        n = self.visit_counters.get(loop_id, 0)
        self.visit_counters[loop_id] = n + 1
        self.loop_stack.append((loop_id, n))
        self.events.append(VisitEvent(loop_id, n))
        if loop_id == self.watch_loop:
            snap = {name: self.env.get(name, 0) for name in self.watch_vars}
            self.result.snapshots.append((n, snap))
            # the snapshot for this visit is already taken, so a replay that
            # only needs visit_limit visits can stop here
            if self.visit_limit is not None and n + 1 >= self.visit_limit:
                raise _Stop("visit-limit")

    # --- entry point ---

    def run(self) -> RunResult:
        res = self.result
        try:
            for g in self.p.globals:
                self.env[g.name] = convert(self.eval(g.init) if g.init is not None else 0, g.var_type)
            r = self.exec_stmt(self.p.main.body)
            res.status = "returned"
            res.exit_code = r[1] if isinstance(r, tuple) and r and r[0] == "return" else 0
        except _Stop as stop:
            res.status = stop.status
        except RecursionError:
            res.status = "step-limit"
        res.env = self.env
        res.events = self.events
        res.steps = self.steps
        return res


def run(
    p: Program,
    values: list[int] | NondetSequence | None = None,
    *,
    asserts_enabled: bool = True,
    instr_zero: bool = False,
    step_limit: Optional[int] = None,
    iter_limit: Optional[int] = None,
    watch_loop: Optional[int] = None,
    watch_vars: Optional[list[str]] = None,
    visit_limit: Optional[int] = None,
) -> RunResult:
    """Execute a checked program against an input tape."""
    if values is None:
        nds = NondetSequence([])
    elif isinstance(values, NondetSequence):
        nds = values
    else:
        nds = NondetSequence(list(values))
    interp = Interp(
        p,
        nds,
        asserts_enabled=asserts_enabled,
        instr_zero=instr_zero,
        step_limit=step_limit,
        iter_limit=iter_limit,
        watch_loop=watch_loop,
        watch_vars=watch_vars,
        visit_limit=visit_limit,
    )
    return interp.run()
