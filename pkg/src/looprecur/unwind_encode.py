"""Bounded unwinding and encoding to bit-vector terms.

The instrumented, call-free program is symbolically executed with every
loop limited to k body copies. Assignments are guarded updates
(sigma[x] = ite(guard, value, old)); a failed assume only strengthens the
guard from that point on, so recurrence obligations recorded earlier in
the path survive a later cut: an infinite loop's obligations stay
satisfiable even though no path flows out of it.

Every nondet draw site i gets an input variable nd<i> and a defined
width-1 variable ndg<i> equal to the site's path-plus-short-circuit
guard; a model therefore tells the replayer exactly which draws execute
and in what order (site order is execution order on any fixed path).

The satisfiability goal is the disjunction over all loops and copies of
"check reached with the stored state equal to the current state".
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .nodes import (
    Assert,
    Assign,
    Assume,
    Binary,
    Block,
    Break,
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
from .terms import Term, TermTable, reachable


@dataclass
class DrawSite:
    """One nondet consumption point in the unwound program."""

    order: int
    name: str  # input variable, nd<order>
    ty: IntType
    ndg: str  # defined guard variable, ndg<order>
    guard: Term
    instr: bool
    loop_id: Optional[int] = None
    copy: Optional[int] = None


@dataclass
class Obligation:
    """One recurrence check: guard reached and stored state equal.
    Copies count 1..k, matching trace visit numbering."""

    loop_id: int
    copy: int
    term: Term


@dataclass
class VC:
    """A bounded verification condition: sat means some loop can revisit
    a stored state within `bound` iterations per loop."""

    table: TermTable
    goal: Term
    sites: list[DrawSite]
    obligations: list[Obligation]
    bound: int

    @property
    def trivially_unsat(self) -> bool:
        return self.goal.is_const and self.goal.value == 0


_CMP_OPS = {"==", "!=", "<", "<=", ">", ">="}


class _Encoder:
    def __init__(self, p: Program, k: int):
        self.p = p
        self.k = k
        self.tt = TermTable()
        self.sigma: dict[str, Term] = {}
        self.sites: list[DrawSite] = []
        self.obligations: list[Obligation] = []
        self.loop_stack: list[tuple[int, int]] = []
        self.brk_stack: list[Term] = []
        self.cnt_stack: list[Term] = []
        self._cuts: list[Term] = []
        self._flag_occ: dict[int, int] = {}

    # --- type conversion on terms ---

    def conv(self, t: Term, from_ty: IntType, to_ty: IntType) -> Term:
        if from_ty.width == to_ty.width:
            return t
        if to_ty.width == 1:
            return self.tt.ne(t, self.tt.const(0, from_ty.width))
        if to_ty.width < from_ty.width:
            return self.tt.trunc(t, to_ty.width)
        if from_ty.signed:
            return self.tt.sext(t, to_ty.width)
        return self.tt.zext(t, to_ty.width)

    def tobool(self, t: Term) -> Term:
        if t.width == 1:
            return t
        return self.tt.ne(t, self.tt.const(0, t.width))

    # --- expressions ---

    def trans(self, e: Expr, ctx: Term) -> Term:
        """Translate an expression under short-circuit context ctx; the
        result has width e.ty.width. Division feasibility conjuncts are
        collected into self._cuts."""
        tt = self.tt
        if isinstance(e, Literal):
            return tt.const(e.ty.to_bits(e.value), e.ty.width)
        if isinstance(e, Var):
            return self.sigma[e.name]
        if isinstance(e, Nondet):
            seq = len(self.sites)
            loop_id, copy = self.loop_stack[-1] if self.loop_stack else (None, None)
            if e.instr and loop_id is not None:
                # gadget flag: one fresh symbol per unrolled occurrence
                occ = self._flag_occ.get(loop_id, 0) + 1
                self._flag_occ[loop_id] = occ
                name = f"flag{loop_id}_{occ}"
            else:
                name = f"nd{seq}"
            self.sites.append(DrawSite(seq, name, e.nd_type, f"ndg{seq}", ctx, e.instr, loop_id, copy))
            return tt.var(name, e.nd_type.width)
        if isinstance(e, Cast):
            return self.conv(self.trans(e.operand, ctx), e.operand.ty, e.to)
        if isinstance(e, Unary):
            if e.op == "!":
                a = self.conv(self.trans(e.operand, ctx), e.operand.ty, e.opty)
                bit = tt.eq(a, tt.const(0, e.opty.width))
                return tt.zext(bit, 32)
            a = self.conv(self.trans(e.operand, ctx), e.operand.ty, e.opty)
            if e.op == "-":
                return tt.neg(a)
            if e.op == "~":
                return tt.bvnot(a)
            raise AssertionError(f"unhandled unary {e.op!r}")
        if isinstance(e, Binary):
            if e.op == "&&" or e.op == "||":
                lb = self.tobool(self.trans(e.lhs, ctx))
                if e.op == "&&":
                    rb = self.tobool(self.trans(e.rhs, tt.and_(ctx, lb)))
                    return tt.zext(tt.and_(lb, rb), 32)
                rb = self.tobool(self.trans(e.rhs, tt.and_(ctx, tt.bvnot(lb))))
                return tt.zext(tt.or_(lb, rb), 32)
            opty = e.opty
            a = self.conv(self.trans(e.lhs, ctx), e.lhs.ty, opty)
            b = self.conv(self.trans(e.rhs, ctx), e.rhs.ty, opty)
            if e.op in _CMP_OPS:
                bit = self.cmp_term(e.op, a, b, opty.signed)
                return tt.zext(bit, 32)
            return self.binop_term(e.op, a, b, opty, ctx)
        raise AssertionError(f"unhandled expression {type(e).__name__}")

    def cmp_term(self, op: str, a: Term, b: Term, signed: bool) -> Term:
        tt = self.tt
        if op == "==":
            return tt.eq(a, b)
        if op == "!=":
            return tt.ne(a, b)
        lt = tt.slt if signed else tt.ult
        le = tt.sle if signed else tt.ule
        if op == "<":
            return lt(a, b)
        if op == "<=":
            return le(a, b)
        if op == ">":
            return lt(b, a)
        if op == ">=":
            return le(b, a)
        raise AssertionError(op)

    def binop_term(self, op: str, a: Term, b: Term, ty: IntType, ctx: Term) -> Term:
        tt = self.tt
        if op == "+":
            return tt.add(a, b)
        if op == "-":
            return tt.sub(a, b)
        if op == "*":
            return tt.mul(a, b)
        if op in ("/", "%"):
            # division by zero cuts the path, like a failed assume
            nz = tt.ne(b, tt.const(0, ty.width))
            self._cuts.append(tt.or_(tt.bvnot(ctx), nz))
            if op == "/":
                return tt.sdiv(a, b) if ty.signed else tt.udiv(a, b)
            return tt.srem(a, b) if ty.signed else tt.urem(a, b)
        if op in ("<<", ">>"):
            # C leaves shifts >= width undefined; mask like common hardware
            amt = tt.and_(b, tt.const(ty.width - 1, ty.width))
            if op == "<<":
                return tt.shl(a, amt)
            return tt.ashr(a, amt) if ty.signed else tt.lshr(a, amt)
        if op == "&":
            return tt.and_(a, b)
        if op == "|":
            return tt.or_(a, b)
        if op == "^":
            return tt.xor(a, b)
        raise AssertionError(f"unhandled operator {op!r}")

    def stmt_expr(self, e: Expr, g: Term) -> tuple[Term, Term]:
        """Translate a statement-level expression; returns (term, guard
        after applying feasibility cuts)."""
        self._cuts = []
        t = self.trans(e, g)
        for c in self._cuts:
            g = self.tt.and_(g, c)
        self._cuts = []
        return t, g

    def cond_bool(self, e: Expr, g: Term) -> tuple[Term, Term]:
        t, g = self.stmt_expr(e, g)
        return self.tobool(t), g

    # --- statements: each returns the fall-through guard ---

    def exec_block(self, stmts: list[Stmt], g: Term) -> Term:
        for s in stmts:
            g = self.exec_stmt(s, g)
        return g

    def exec_stmt(self, s: Stmt, g: Term) -> Term:
        tt = self.tt
        if g.is_const and g.value == 0:
            return g  # statically dead: skip the whole subtree
        if isinstance(s, Block):
            return self.exec_block(s.stmts, g)
        if isinstance(s, Noop):
            return g
        if isinstance(s, Decl):
            if s.init is not None:
                v, g = self.stmt_expr(s.init, g)
                v = self.conv(v, s.init.ty, s.var_type)
            else:
                v = tt.const(0, s.var_type.width)
            self._update(s.name, v, g)
            return g
        if isinstance(s, Assign):
            ty = self.p.symbols[s.name].var_type
            v, g = self.stmt_expr(s.value, g)
            self._update(s.name, self.conv(v, s.value.ty, ty), g)
            return g
        if isinstance(s, OpAssign):
            ty = self.p.symbols[s.name].var_type
            a = self.conv(self.sigma[s.name], ty, s.opty)
            raw, g = self.stmt_expr(s.value, g)
            b = self.conv(raw, s.value.ty, s.opty)
            self._cuts = []
            r = self.binop_term(s.op, a, b, s.opty, g)
            for c in self._cuts:
                g = tt.and_(g, c)
            self._cuts = []
            self._update(s.name, self.conv(r, s.opty, ty), g)
            return g
        if isinstance(s, ExprStmt):
            _, g = self.stmt_expr(s.expr, g)
            return g
        if isinstance(s, If):
            c, g = self.cond_bool(s.cond, g)
            g_then = tt.and_(g, c)
            g_else = tt.and_(g, tt.bvnot(c))
            g1 = self.exec_stmt(s.then, g_then)
            g2 = self.exec_stmt(s.orelse, g_else) if s.orelse is not None else g_else
            return tt.or_(g1, g2)
        if isinstance(s, While):
            return self._exec_loop(s, g, pretest=True, init=None, update=None)
        if isinstance(s, DoWhile):
            return self._exec_loop(s, g, pretest=False, init=None, update=None)
        if isinstance(s, For):
            return self._exec_loop(s, g, pretest=True, init=s.init, update=s.update)
        if isinstance(s, Break):
            self.brk_stack[-1] = tt.or_(self.brk_stack[-1], g)
            return tt.false()
        if isinstance(s, Continue):
            self.cnt_stack[-1] = tt.or_(self.cnt_stack[-1], g)
            return tt.false()
        if isinstance(s, Return):
            if s.value is not None:
                _, g = self.stmt_expr(s.value, g)
            return tt.false()  # the program ends; nothing executes after
        if isinstance(s, Assert):
            c, g = self.cond_bool(s.cond, g)
            if s.instr:
                loop_id, copy = self.loop_stack[-1]
                self.obligations.append(Obligation(loop_id, copy, tt.and_(g, tt.bvnot(c))))
                # keep the guard unchanged: execution past a violated probe
                # never reaches the replayer (it stops at the first violation),
                # and leaving the paths open keeps loop guards concrete
                return g
            # a violated user assert aborts the program; that is a
            # termination, not a recurrence, so only passing paths continue
            return tt.and_(g, c)
        if isinstance(s, Assume):
            c, g = self.cond_bool(s.cond, g)
            return tt.and_(g, c)
        raise AssertionError(f"unhandled statement {type(s).__name__}")

    def _update(self, name: str, v: Term, g: Term):
        old = self.sigma.get(name)
        if old is None or (g.is_const and g.value == 1):
            self.sigma[name] = v
        else:
            self.sigma[name] = self.tt.ite(g, v, old)

    def _exec_loop(self, s, g: Term, *, pretest: bool, init, update) -> Term:
        tt = self.tt
        if init is not None:
            g = self.exec_stmt(init, g)
        self.brk_stack.append(tt.false())
        g_exit = tt.false()
        g_cur = g
        for copy in range(1, self.k + 1):
            if g_cur.is_const and g_cur.value == 0:
                break
            self.loop_stack.append((s.loop_id, copy))
            if pretest and s.cond is not None:
                c, g_cur = self.cond_bool(s.cond, g_cur)
                g_exit = tt.or_(g_exit, tt.and_(g_cur, tt.bvnot(c)))
                g_body = tt.and_(g_cur, c)
            else:
                g_body = g_cur
            self.cnt_stack.append(tt.false())
            g_after = self.exec_stmt(s.body, g_body)
            g_after = tt.or_(g_after, self.cnt_stack.pop())
            if update is not None:
                g_after = self.exec_stmt(update, g_after)
            if not pretest:
                c, g_after = self.cond_bool(s.cond, g_after)
                g_exit = tt.or_(g_exit, tt.and_(g_after, tt.bvnot(c)))
                g_after = tt.and_(g_after, c)
            self.loop_stack.pop()
            g_cur = g_after
        # one more condition evaluation for paths completing all k copies;
        # paths that would iterate further are cut (bounded unwinding)
        if pretest and not (g_cur.is_const and g_cur.value == 0) and s.cond is not None:
            c, g_cur = self.cond_bool(s.cond, g_cur)
            g_exit = tt.or_(g_exit, tt.and_(g_cur, tt.bvnot(c)))
        elif pretest and s.cond is None:
            pass  # for(;;): no test, every surviving path is cut
        g_exit = tt.or_(g_exit, self.brk_stack.pop())
        return g_exit

    # --- entry ---

    def build(self) -> VC:
        tt = self.tt
        g = tt.true()
        for d in self.p.globals:
            if d.init is not None:
                v, g = self.stmt_expr(d.init, g)
                v = self.conv(v, d.init.ty, d.var_type)
            else:
                v = tt.const(0, d.var_type.width)
            self.sigma[d.name] = v
        self.exec_block(self.p.main.body.stmts, g)
        goal = tt.false()
        for ob in self.obligations:
            goal = tt.or_(goal, ob.term)
        return VC(tt, goal, self.sites, self.obligations, self.k)


def build_vc(p: Program, k: int) -> VC:
    """Encode the instrumented program at unwind bound k."""
    return _Encoder(p, k).build()


# ===== SMT-LIB EMISSION =====

_SMT_OPS = {
    "add": "bvadd", "sub": "bvsub", "mul": "bvmul", "udiv": "bvudiv",
    "urem": "bvurem", "neg": "bvneg", "bvnot": "bvnot", "and": "bvand",
    "or": "bvor", "xor": "bvxor", "shl": "bvshl", "lshr": "bvlshr",
    "ashr": "bvashr",
}


def _ref(t: Term) -> str:
    if t.op == "const":
        return f"(_ bv{t.value} {t.width})"
    if t.op == "var":
        return t.name
    return f"t{t.tid}"


def _smt_def(t: Term) -> str:
    a = [_ref(x) for x in t.args]
    if t.op in _SMT_OPS:
        return f"({_SMT_OPS[t.op]} {a[0]} {a[1]})" if len(a) == 2 else f"({_SMT_OPS[t.op]} {a[0]})"
    if t.op == "eq":
        return f"(ite (= {a[0]} {a[1]}) #b1 #b0)"
    if t.op == "ult":
        return f"(ite (bvult {a[0]} {a[1]}) #b1 #b0)"
    if t.op == "slt":
        return f"(ite (bvslt {a[0]} {a[1]}) #b1 #b0)"
    if t.op == "ite":
        return f"(ite (= {a[0]} #b1) {a[1]} {a[2]})"
    if t.op == "zext":
        return f"((_ zero_extend {t.width - t.args[0].width}) {a[0]})"
    if t.op == "sext":
        return f"((_ sign_extend {t.width - t.args[0].width}) {a[0]})"
    if t.op == "trunc":
        return f"((_ extract {t.width - 1} 0) {a[0]})"
    raise AssertionError(f"unhandled operator {t.op!r}")


def emit_smt2(vc: VC) -> str:
    """Render the VC as a self-contained QF_BV script (check-sat + model)."""
    lines = [
        "; bounded recurrence check, unwind bound " + str(vc.bound),
        "(set-logic QF_BV)",
    ]
    for site in vc.sites:
        lines.append(f"(declare-const {site.name} (_ BitVec {site.ty.width}))")
    for site in vc.sites:
        lines.append(f"(declare-const {site.ndg} (_ BitVec 1))")
    roots = [vc.goal] + [site.guard for site in vc.sites]
    for t in reachable(roots):
        if t.op not in ("const", "var"):
            lines.append(f"(define-fun t{t.tid} () (_ BitVec {t.width}) {_smt_def(t)})")
    for site in vc.sites:
        lines.append(f"(assert (= {site.ndg} {_ref(site.guard)}))")
    lines.append(f"(assert (= {_ref(vc.goal)} #b1))")
    lines.append("(check-sat)")
    lines.append("(get-model)")
    return "\n".join(lines) + "\n"


_MODEL_RE = re.compile(
    r"\(define-fun\s+([A-Za-z_][A-Za-z0-9_]*)\s*\(\)\s*\(_\s*BitVec\s*\d+\s*\)\s*"
    r"(#x[0-9a-fA-F]+|#b[01]+|\(_\s*bv(\d+)\s+\d+\s*\))",
)


def parse_smt_output(text: str) -> tuple[str, dict[str, int]]:
    """Extract (status, model) from solver output. Status is the first
    sat/unsat/unknown token on its own line; model values may be hex,
    binary, or decimal bit-vector literals."""
    status = ""
    for line in text.splitlines():
        word = line.strip()
        if word in ("sat", "unsat", "unknown"):
            status = word
            break
    model: dict[str, int] = {}
    for m in _MODEL_RE.finditer(text):
        name, lit, dec = m.group(1), m.group(2), m.group(3)
        if lit.startswith("#x"):
            model[name] = int(lit[2:], 16)
        elif lit.startswith("#b"):
            model[name] = int(lit[2:], 2)
        else:
            model[name] = int(dec)
    return status, model
