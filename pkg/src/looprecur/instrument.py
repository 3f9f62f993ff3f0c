"""Recurrence-assertion instrumentation.

Each loop gets a gadget that can remember one iteration's values of the
loop's persistent state variables and asserts on every later iteration
that the current values differ. A violated assertion is therefore a
revisited state, i.e. evidence the loop can run forever.

Layout per loop L (all inserted nodes carry instr=True):

    _Bool pStored<L> = 0;          // before the loop
    <T1> o<v1> = 0; ... ;          // one shadow per state variable
    while (...) {
        printf("rsi marker loop <L>");              // inert marker
        _Bool flag<L> = __VERIFIER_nondet_bool();   // store this iteration?
        if (pStored<L>) { __VERIFIER_assert(!(o<v1> == v1 && ...)); }
        if (flag<L> && !pStored<L>) { o<v1> = v1; ...; pStored<L> = 1; }
        ... original body ...
    }

The store runs at most once per loop activation: once pStored is set the
gadget only compares, so the checked values always come from the single
stored iteration. The pStored and shadow declarations sit immediately
before the loop, so for a nested loop they re-zero at each activation of
the enclosing loop: a store and the check it trips are always in the same
activation.

User assert statements are replaced by inert markers: only the gadget
assertions may fire inside the checker, anything else would let an
unrelated property cut the paths the recurrence search explores.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .frontend import retype
from .nodes import (
    BOOL,
    Assert,
    Assign,
    Binary,
    Block,
    Call,
    Decl,
    Expr,
    If,
    Literal,
    Loc,
    LoopStmt,
    Loop,
    Nondet,
    Noop,
    OpAssign,
    Program,
    Stmt,
    Unary,
    Var,
    child_stmts,
    clone_program,
    iter_exprs,
    iter_stmts,
    stmt_exprs,
)
from .normalize import brace


@dataclass
class LoopSite:
    """Instrumentation record for one loop."""

    loop_id: int
    header_nid: int
    loc: Loc
    function: str
    state_vars: list[str]  # persistent variables, declaration order
    shadows: dict[str, str]  # state var -> shadow name
    pstored: str
    flag: str


@dataclass
class InstrumentedProgram:
    program: Program  # with gadgets
    base: Program  # brace-normalized original
    sites: list[LoopSite] = field(default_factory=list)

    def site_for(self, loop_id: int) -> LoopSite:
        for site in self.sites:
            if site.loop_id == loop_id:
                return site
        raise KeyError(f"no instrumented loop with id {loop_id}")


def collect_state_vars(p: Program, loop: LoopStmt) -> list[str]:
    """Variables that persist across iterations of `loop` and are referenced
    inside it: anything read or written in the loop (condition, header, or
    body) that is not redeclared per iteration. A call inside the loop
    contributes the globals its callee touches; callee locals are never in
    scope at the header. Ordered by declaration (globals, then locals outer
    to inner)."""
    referenced: set[str] = set()
    global_names = {d.name for d in p.globals}
    walked_fns: set[str] = set()

    def walk(root, in_callee: bool):
        for s in iter_stmts(root):
            if isinstance(s, (Assign, OpAssign)) and (not in_callee or s.name in global_names):
                referenced.add(s.name)
            for e in stmt_exprs(s):
                for x in iter_exprs(e):
                    if isinstance(x, Var) and (not in_callee or x.name in global_names):
                        referenced.add(x.name)
                    elif isinstance(x, Call) and x.name in p.functions and x.name not in walked_fns:
                        walked_fns.add(x.name)
                        walk(p.functions[x.name].body, True)

    walk(loop, False)
    body_declared = {s.name for s in iter_stmts(loop.body) if isinstance(s, Decl)}
    out = []
    for name in referenced:
        info = p.symbols[name]
        if info.is_instr or name in body_declared:
            continue
        out.append(name)
    out.sort(key=lambda n: (p.symbols[n].scope_depth, p.symbols[n].order))
    return out


class _Instrumenter:
    def __init__(self, p: Program):
        self.p = p
        self.sites: list[LoopSite] = []
        self.fn_name = ""

    def run(self):
        for fn in self.p.functions.values():
            self.fn_name = fn.name
            self.walk_block(fn.body)
        retype(self.p)

    def walk_block(self, b: Block):
        out: list[Stmt] = []
        for s in b.stmts:
            if isinstance(s, Assert) and not s.instr:
                out.append(Noop('"user assert disabled"', nid=self.p.fresh_nid(), loc=s.loc, instr=True))
                continue
            if isinstance(s, Block):
                # bare scope block, e.g. an inlined call body
                self.walk_block(s)
                out.append(s)
                continue
            if isinstance(s, Loop) and not s.instr:
                out.extend(self.instrument_loop(s))
            out.append(s)
            self.walk_children(s)
        b.stmts = out

    def walk_children(self, s: Stmt):
        for c in child_stmts(s):
            if isinstance(c, Block):
                self.walk_block(c)
            else:
                self.walk_children(c)

    def _lit(self, v: int) -> Literal:
        return Literal(v, nid=self.p.fresh_nid(), instr=True)

    def _var(self, name: str) -> Var:
        return Var(name, nid=self.p.fresh_nid(), instr=True)

    def instrument_loop(self, loop: LoopStmt) -> list[Stmt]:
        state = collect_state_vars(self.p, loop)
        pstored = self.p.fresh_name(f"pStored{loop.loop_id}")
        self.p.add_symbol(pstored, BOOL, 2, is_instr=True)
        flag = self.p.fresh_name(f"flag{loop.loop_id}")
        self.p.add_symbol(flag, BOOL, 2, is_instr=True)
        shadows: dict[str, str] = {}
        pre: list[Stmt] = [Decl(pstored, BOOL, self._lit(0), nid=self.p.fresh_nid(), instr=True)]
        for v in state:
            ty = self.p.symbols[v].var_type
            shadow = self.p.fresh_name(f"o{v}")
            self.p.add_symbol(shadow, ty, 2, is_instr=True)
            shadows[v] = shadow
            pre.append(Decl(shadow, ty, self._lit(0), nid=self.p.fresh_nid(), instr=True))

        # assert NOT(all shadows equal current values); no state vars means
        # the bare recurrence !(1): reaching the check twice already repeats
        conj: Expr = self._lit(1)
        first = True
        for v in state:
            eq = Binary("==", self._var(shadows[v]), self._var(v), nid=self.p.fresh_nid(), instr=True)
            conj = eq if first else Binary("&&", conj, eq, nid=self.p.fresh_nid(), instr=True)
            first = False
        check = If(
            self._var(pstored),
            Block([Assert(Unary("!", conj, nid=self.p.fresh_nid(), instr=True), nid=self.p.fresh_nid(), instr=True)], nid=self.p.fresh_nid(), instr=True),
            nid=self.p.fresh_nid(),
            instr=True,
        )
        stores: list[Stmt] = [
            Assign(shadows[v], self._var(v), nid=self.p.fresh_nid(), instr=True) for v in state
        ]
        stores.append(Assign(pstored, self._lit(1), nid=self.p.fresh_nid(), instr=True))
        may_store = Binary(
            "&&",
            self._var(flag),
            Unary("!", self._var(pstored), nid=self.p.fresh_nid(), instr=True),
            nid=self.p.fresh_nid(),
            instr=True,
        )
        store = If(may_store, Block(stores, nid=self.p.fresh_nid(), instr=True), nid=self.p.fresh_nid(), instr=True)
        flag_decl = Decl(flag, BOOL, Nondet(BOOL, nid=self.p.fresh_nid(), instr=True), nid=self.p.fresh_nid(), instr=True)

        marker = Noop(f'"rsi marker loop {loop.loop_id}"', nid=self.p.fresh_nid(), instr=True)

        body = loop.body
        assert isinstance(body, Block), "instrumentation requires brace-normal input"
        body.stmts[0:0] = [marker, flag_decl, check, store]

        self.sites.append(
            LoopSite(loop.loop_id, loop.nid, loop.loc, self.fn_name, state, shadows, pstored, flag)
        )
        return pre


def insert_rsi(p: Program) -> InstrumentedProgram:
    """Instrument every loop with the recurrence gadget. The input is
    brace-normalized first; the returned record keeps that normalized base
    alongside the instrumented program. Calls need not be inlined: a loop
    that calls a function picks up the globals the callee touches."""
    base = brace(p)
    q = clone_program(base)
    inst = _Instrumenter(q)
    inst.run()
    return InstrumentedProgram(q, base, inst.sites)


def strip_gadgets(p: Program) -> Program:
    """Remove every instr-marked statement, undoing insert_rsi."""
    q = clone_program(p)

    def strip_block(b: Block):
        b.stmts = [s for s in b.stmts if not s.instr]
        for s in b.stmts:
            if isinstance(s, Block):
                strip_block(s)
            else:
                strip_children(s)

    def strip_children(s: Stmt):
        for c in child_stmts(s):
            if isinstance(c, Block):
                strip_block(c)
            else:
                strip_children(c)

    for fn in q.functions.values():
        strip_block(fn.body)
    q.symbols = {k: v for k, v in q.symbols.items() if not v.is_instr}
    return q


def strip_markers(p: Program) -> Program:
    """Remove the gadget's printf markers but keep everything else."""
    q = clone_program(p)

    def strip_block(b: Block):
        b.stmts = [s for s in b.stmts if not (isinstance(s, Noop) and s.instr)]
        for s in b.stmts:
            if isinstance(s, Block):
                strip_block(s)
            else:
                strip_children(s)

    def strip_children(s: Stmt):
        for c in child_stmts(s):
            if isinstance(c, Block):
                strip_block(c)
            else:
                strip_children(c)

    for fn in q.functions.values():
        strip_block(fn.body)
    return q
