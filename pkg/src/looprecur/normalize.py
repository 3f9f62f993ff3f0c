"""Brace normalization and C source emission.

brace wraps every control-flow body in an explicit block so
later passes can splice statements without caring about single-statement
bodies. unparse renders a checked program back to compilable C, one
statement per line; its output is always brace-normal, so
parse(unparse(p)) equals brace(p) structurally.
"""

from __future__ import annotations

from .nodes import (
    ALL_TYPES,
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
    Function,
    If,
    IntType,
    I64,
    Literal,
    Nondet,
    NONDET_SPELLING,
    Noop,
    OpAssign,
    Program,
    Return,
    Stmt,
    U32,
    U64,
    Unary,
    Var,
    While,
    all_exprs,
    clone_program,
    iter_stmts,
)

# ===== BRACE NORMALIZATION =====


def _as_block(s: Stmt, p: Program) -> Block:
    if isinstance(s, Block):
        return s
    return Block([s], nid=p.fresh_nid(), loc=s.loc)


def brace(p: Program) -> Program:
    """Returns a copy where every if branch and loop body is a Block."""
    q = clone_program(p)
    for fn in q.functions.values():
        for s in iter_stmts(fn.body):
            if isinstance(s, If):
                s.then = _as_block(s.then, q)
                if s.orelse is not None:
                    s.orelse = _as_block(s.orelse, q)
            elif isinstance(s, (While, DoWhile, For)):
                s.body = _as_block(s.body, q)
    return q


# ===== UNPARSING =====

_BINPREC = {
    "||": 1, "&&": 2, "|": 3, "^": 4, "&": 5,
    "==": 6, "!=": 6, "<": 7, "<=": 7, ">": 7, ">=": 7,
    "<<": 8, ">>": 8, "+": 9, "-": 9, "*": 10, "/": 10, "%": 10,
}

_UNARY_PREC = 20
_PRIMARY_PREC = 100

_LIT_SUFFIX = {U32: "u", I64: "ll", U64: "ull"}


def _prec(e: Expr) -> int:
    if isinstance(e, Binary):
        return _BINPREC[e.op]
    if isinstance(e, (Unary, Cast)):
        return _UNARY_PREC
    return _PRIMARY_PREC


def emit_expr(e: Expr) -> str:
    if isinstance(e, Literal):
        if e.value < 0:
            return f"({e.value})"
        return str(e.value) + _LIT_SUFFIX.get(e.ty, "")
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Nondet):
        return f"__VERIFIER_{NONDET_SPELLING[e.nd_type]}()"
    if isinstance(e, Call):
        return f"{e.name}({', '.join(emit_expr(a) for a in e.args)})"
    if isinstance(e, Unary):
        inner = _sub(e.operand, _UNARY_PREC)
        if e.op == "-" and inner.startswith("-"):
            inner = f"({inner})"
        return e.op + inner
    if isinstance(e, Cast):
        return f"({e.to.cname()}){_sub(e.operand, _UNARY_PREC)}"
    if isinstance(e, Binary):
        p = _BINPREC[e.op]
        lhs = _sub(e.lhs, p)
        # parenthesize equal-precedence right operands to preserve shape
        rhs = _sub(e.rhs, p + 1)
        return f"{lhs} {e.op} {rhs}"
    raise AssertionError(f"unhandled expression {type(e).__name__}")


def _sub(e: Expr, min_prec: int) -> str:
    s = emit_expr(e)
    if _prec(e) < min_prec:
        return f"({s})"
    return s


def _simple_stmt_text(s: Stmt) -> str:
    """A statement rendered without the trailing semicolon (for-loop headers)."""
    if isinstance(s, Decl):
        init = f" = {emit_expr(s.init)}" if s.init is not None else ""
        return f"{s.var_type.cname()} {s.name}{init}"
    if isinstance(s, Assign):
        return f"{s.name} = {emit_expr(s.value)}"
    if isinstance(s, OpAssign):
        return f"{s.name} {s.op}= {emit_expr(s.value)}"
    if isinstance(s, ExprStmt):
        return emit_expr(s.expr)
    raise AssertionError(f"statement kind {type(s).__name__} cannot appear in a for header")


class _Unparser:
    def __init__(self, p: Program):
        self.p = p
        self.lines: list[str] = []

    def line(self, ind: int, text: str):
        self.lines.append("    " * ind + text)

    def render(self) -> str:
        self._preamble()
        if self.p.globals:
            for g in self.p.globals:
                self.line(0, _simple_stmt_text(g) + ";")
            self.lines.append("")
        fns = list(self.p.functions.values())
        if len(fns) > 1:
            for fn in fns:
                if fn.name != "main":
                    self.line(0, "extern " + self._signature(fn) + ";")
            self.lines.append("")
        for i, fn in enumerate(fns):
            if i:
                self.lines.append("")
            self.line(0, self._signature(fn) + " {")
            self.stmts(fn.body.stmts, 1)
            self.line(0, "}")
        return "\n".join(self.lines) + "\n"

    def _signature(self, fn: Function) -> str:
        ret = fn.ret.cname() if fn.ret is not None else "void"
        params = ", ".join(f"{q.var_type.cname()} {q.name}" for q in fn.params) or "void"
        return f"{ret} {fn.name}({params})"

    def _preamble(self):
        has_assert = has_assume = False
        nd_used: set[IntType] = set()
        for fn in self.p.functions.values():
            for s in iter_stmts(fn.body):
                if isinstance(s, Assert):
                    has_assert = True
                elif isinstance(s, Assume):
                    has_assume = True
            for e in all_exprs(fn.body):
                if isinstance(e, Nondet):
                    nd_used.add(e.nd_type)
        out = []
        if has_assert:
            out.append("extern void __VERIFIER_assert(int cond);")
        if has_assume:
            out.append("extern void __VERIFIER_assume(int cond);")
        for ty in ALL_TYPES:
            if ty in nd_used:
                out.append(f"extern {ty.cname()} __VERIFIER_{NONDET_SPELLING[ty]}(void);")
        if out:
            self.lines.extend(out)
            self.lines.append("")

    def stmts(self, ss: list[Stmt], ind: int):
        for s in ss:
            self.stmt(s, ind)

    def block_body(self, s: Stmt, ind: int):
        """Contents of a control-flow body, brace-normalized on the way out."""
        if isinstance(s, Block):
            self.stmts(s.stmts, ind)
        else:
            self.stmt(s, ind)

    def stmt(self, s: Stmt, ind: int):
        if isinstance(s, Block):
            self.line(ind, "{")
            self.stmts(s.stmts, ind + 1)
            self.line(ind, "}")
        elif isinstance(s, (Decl, Assign, OpAssign, ExprStmt)):
            self.line(ind, _simple_stmt_text(s) + ";")
        elif isinstance(s, If):
            self.line(ind, f"if ({emit_expr(s.cond)}) {{")
            self.block_body(s.then, ind + 1)
            if s.orelse is not None:
                self.line(ind, "} else {")
                self.block_body(s.orelse, ind + 1)
            self.line(ind, "}")
        elif isinstance(s, While):
            self.line(ind, f"while ({emit_expr(s.cond)}) {{")
            self.block_body(s.body, ind + 1)
            self.line(ind, "}")
        elif isinstance(s, DoWhile):
            self.line(ind, "do {")
            self.block_body(s.body, ind + 1)
            self.line(ind, f"}} while ({emit_expr(s.cond)});")
        elif isinstance(s, For):
            init = _simple_stmt_text(s.init) if s.init is not None else ""
            cond = emit_expr(s.cond) if s.cond is not None else ""
            upd = _simple_stmt_text(s.update) if s.update is not None else ""
            self.line(ind, f"for ({init}; {cond}; {upd}) {{")
            self.block_body(s.body, ind + 1)
            self.line(ind, "}")
        elif isinstance(s, Break):
            self.line(ind, "break;")
        elif isinstance(s, Continue):
            self.line(ind, "continue;")
        elif isinstance(s, Return):
            self.line(ind, f"return {emit_expr(s.value)};" if s.value is not None else "return;")
        elif isinstance(s, Assert):
            self.line(ind, f"__VERIFIER_assert({emit_expr(s.cond)});")
        elif isinstance(s, Assume):
            self.line(ind, f"__VERIFIER_assume({emit_expr(s.cond)});")
        elif isinstance(s, Noop):
            self.line(ind, f"printf({s.text});")
        else:
            raise AssertionError(f"unhandled statement {type(s).__name__}")


def unparse(p: Program) -> str:
    """Render a program as C source, one statement per line, fully braced."""
    return _Unparser(p).render()
