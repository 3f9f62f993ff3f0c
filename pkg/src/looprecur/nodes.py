"""AST node types for the MiniC subset, shared by every stage of the pipeline.

Invariants maintained across transforms:
  - every node carries a stable node id (nid); transforms that copy nodes
    mint fresh ids from the owning Program,
  - variable names are globally unique after parsing (the resolver renames
    shadowed declarations), so later passes never reason about scopes,
  - loop statements carry a loop_id assigned in source order; the inliner
    refreshes ids on duplicated loops, brace/instrumentation preserve them.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Iterator, NamedTuple, Optional, Union


class Loc(NamedTuple):
    line: int
    col: int


NOLOC = Loc(0, 0)


# ===== TYPES =====


@dataclass(frozen=True)
class IntType:
    """A fixed-width two's-complement integer type. width 1 is the boolean type."""

    width: int
    signed: bool

    def wrap(self, v: int) -> int:
        """Reduce an arbitrary Python int to this type's canonical value range."""
        v &= (1 << self.width) - 1
        if self.signed and v >= 1 << (self.width - 1):
            v -= 1 << self.width
        return v

    def to_bits(self, v: int) -> int:
        return v & ((1 << self.width) - 1)

    @property
    def umax(self) -> int:
        return (1 << self.width) - 1

    @property
    def smin(self) -> int:
        return -(1 << (self.width - 1))

    @property
    def smax(self) -> int:
        return (1 << (self.width - 1)) - 1

    @property
    def minval(self) -> int:
        return self.smin if self.signed else 0

    @property
    def maxval(self) -> int:
        return self.smax if self.signed else self.umax

    def cname(self) -> str:
        return _CNAMES[self]

    def __repr__(self) -> str:
        if self.width == 1:
            return "bool"
        return ("i" if self.signed else "u") + str(self.width)


BOOL = IntType(1, False)
I8 = IntType(8, True)
U8 = IntType(8, False)
I16 = IntType(16, True)
U16 = IntType(16, False)
I32 = IntType(32, True)
U32 = IntType(32, False)
I64 = IntType(64, True)
U64 = IntType(64, False)

ALL_TYPES = (BOOL, I8, U8, I16, U16, I32, U32, I64, U64)

_CNAMES = {
    BOOL: "_Bool",
    I8: "char",
    U8: "unsigned char",
    I16: "short",
    U16: "unsigned short",
    I32: "int",
    U32: "unsigned int",
    I64: "long long",
    U64: "unsigned long long",
}

# nondet intrinsic name per type, accepted with or without __VERIFIER_ prefix
NONDET_NAMES = {
    "nondet_bool": BOOL,
    "nondet_char": I8,
    "nondet_uchar": U8,
    "nondet_short": I16,
    "nondet_ushort": U16,
    "nondet_int": I32,
    "nondet_uint": U32,
    "nondet_long": I64,
    "nondet_ulong": U64,
}
NONDET_SPELLING = {ty: name for name, ty in NONDET_NAMES.items()}


# ===== NODES =====


@dataclass(eq=False)
class Node:
    nid: int = field(default=-1, kw_only=True)
    loc: Loc = field(default=NOLOC, kw_only=True)
    # statements/expressions inserted by instrumentation are marked so they
    # can be stripped and so transparency comparisons can filter them
    instr: bool = field(default=False, kw_only=True)


@dataclass(eq=False)
class Expr(Node):
    ty: Optional[IntType] = field(default=None, kw_only=True)


@dataclass(eq=False)
class Literal(Expr):
    value: int = 0


@dataclass(eq=False)
class Var(Expr):
    name: str = ""


@dataclass(eq=False)
class Unary(Expr):
    op: str = ""  # - ! ~
    operand: Expr = None  # type: ignore[assignment]
    # type the operand is converted to before applying the operator
    opty: Optional[IntType] = field(default=None, kw_only=True)


@dataclass(eq=False)
class Binary(Expr):
    op: str = ""  # * / % + - << >> < <= > >= == != & ^ | && ||
    lhs: Expr = None  # type: ignore[assignment]
    rhs: Expr = None  # type: ignore[assignment]
    # common type both operands are converted to (usual arithmetic
    # conversions); for shifts, the promoted left operand's type
    opty: Optional[IntType] = field(default=None, kw_only=True)


@dataclass(eq=False)
class Cast(Expr):
    to: IntType = I32
    operand: Expr = None  # type: ignore[assignment]


@dataclass(eq=False)
class Call(Expr):
    name: str = ""
    args: list[Expr] = field(default_factory=list)


@dataclass(eq=False)
class Nondet(Expr):
    """A nondeterministic input of a fixed type (nondet_int() and friends)."""

    nd_type: IntType = I32


@dataclass(eq=False)
class Stmt(Node):
    pass


@dataclass(eq=False)
class Block(Stmt):
    stmts: list[Stmt] = field(default_factory=list)


@dataclass(eq=False)
class Decl(Stmt):
    name: str = ""
    var_type: IntType = I32
    init: Optional[Expr] = None


@dataclass(eq=False)
class Assign(Stmt):
    name: str = ""
    value: Expr = None  # type: ignore[assignment]


@dataclass(eq=False)
class OpAssign(Stmt):
    """Compound assignment x op= e; also the desugaring of x++/x--."""

    name: str = ""
    op: str = "+"
    value: Expr = None  # type: ignore[assignment]
    # common type for the implied binary operation, as on Binary
    opty: Optional[IntType] = field(default=None, kw_only=True)


@dataclass(eq=False)
class ExprStmt(Stmt):
    expr: Expr = None  # type: ignore[assignment]


@dataclass(eq=False)
class If(Stmt):
    cond: Expr = None  # type: ignore[assignment]
    then: Stmt = None  # type: ignore[assignment]
    orelse: Optional[Stmt] = None


@dataclass(eq=False)
class While(Stmt):
    cond: Expr = None  # type: ignore[assignment]
    body: Stmt = None  # type: ignore[assignment]
    loop_id: int = field(default=-1, kw_only=True)


@dataclass(eq=False)
class DoWhile(Stmt):
    body: Stmt = None  # type: ignore[assignment]
    cond: Expr = None  # type: ignore[assignment]
    loop_id: int = field(default=-1, kw_only=True)


@dataclass(eq=False)
class For(Stmt):
    # init/update are statements so transforms can splice guarded forms in;
    # the parser only ever produces Decl/Assign/OpAssign/ExprStmt/None there
    init: Optional[Stmt] = None
    cond: Optional[Expr] = None
    update: Optional[Stmt] = None
    body: Stmt = None  # type: ignore[assignment]
    loop_id: int = field(default=-1, kw_only=True)


@dataclass(eq=False)
class Break(Stmt):
    pass


@dataclass(eq=False)
class Continue(Stmt):
    pass


@dataclass(eq=False)
class Return(Stmt):
    value: Optional[Expr] = None


@dataclass(eq=False)
class Assert(Stmt):
    cond: Expr = None  # type: ignore[assignment]
    # set on recurrence-assertion copies during unrolling
    rsa_loop: Optional[int] = field(default=None, kw_only=True)
    rsa_copy: Optional[int] = field(default=None, kw_only=True)


@dataclass(eq=False)
class Assume(Stmt):
    cond: Expr = None  # type: ignore[assignment]


@dataclass(eq=False)
class Noop(Stmt):
    """A no-effect marker statement; printf calls parse to this."""

    text: str = ""


Loop = (While, DoWhile, For)
LoopStmt = Union[While, DoWhile, For]


# ===== PROGRAM =====


@dataclass
class SymbolInfo:
    name: str
    var_type: IntType
    scope_depth: int  # 0 globals, 1 params, 2+ blocks
    order: int  # declaration order within the program
    is_global: bool = False
    is_instr: bool = False


@dataclass
class Param:
    name: str
    var_type: IntType


@dataclass(eq=False)
class Function:
    name: str
    ret: Optional[IntType]  # None is void
    params: list[Param]
    body: Block
    loc: Loc = NOLOC
    inlinable: bool = False  # set by check_supported on non-main functions


@dataclass(eq=False)
class Program:
    """A resolved, typed MiniC translation unit.

    globals hold module-level declarations in source order; functions is
    ordered by definition with exactly one "main" after checking. symbols
    carries per-variable metadata (declaration scope depth and order) used
    for state-variable collection.
    """

    globals: list[Decl] = field(default_factory=list)
    functions: dict[str, Function] = field(default_factory=dict)
    symbols: dict[str, SymbolInfo] = field(default_factory=dict)
    source_name: str = "<input>"
    next_nid: int = 0
    next_loop_id: int = 0
    next_order: int = 0

    def fresh_nid(self) -> int:
        n = self.next_nid
        self.next_nid += 1
        return n

    def fresh_loop_id(self) -> int:
        n = self.next_loop_id
        self.next_loop_id += 1
        return n

    def add_symbol(self, name: str, ty: IntType, depth: int, *, is_global=False, is_instr=False) -> SymbolInfo:
        info = SymbolInfo(name, ty, depth, self.next_order, is_global=is_global, is_instr=is_instr)
        self.next_order += 1
        self.symbols[name] = info
        return info

    def fresh_name(self, base: str) -> str:
        """A name not colliding with any known symbol or function."""
        taken = set(self.symbols) | set(self.functions)
        if base not in taken:
            return base
        n = 1
        while f"{base}_{n}" in taken:
            n += 1
        return f"{base}_{n}"

    @property
    def main(self) -> Function:
        return self.functions["main"]


# ===== WALKERS =====


def child_stmts(s: Stmt) -> Iterator[Stmt]:
    if isinstance(s, Block):
        yield from s.stmts
    elif isinstance(s, If):
        yield s.then
        if s.orelse is not None:
            yield s.orelse
    elif isinstance(s, While):
        yield s.body
    elif isinstance(s, DoWhile):
        yield s.body
    elif isinstance(s, For):
        if s.init is not None:
            yield s.init
        if s.update is not None:
            yield s.update
        yield s.body


def iter_stmts(s: Stmt) -> Iterator[Stmt]:
    """Pre-order walk over a statement subtree, including s itself."""
    yield s
    for c in child_stmts(s):
        yield from iter_stmts(c)


def stmt_exprs(s: Stmt) -> Iterator[Expr]:
    """Direct expressions of one statement (not of nested statements)."""
    if isinstance(s, Decl) and s.init is not None:
        yield s.init
    elif isinstance(s, (Assign, OpAssign)):
        yield s.value
    elif isinstance(s, ExprStmt):
        yield s.expr
    elif isinstance(s, If):
        yield s.cond
    elif isinstance(s, While):
        yield s.cond
    elif isinstance(s, DoWhile):
        yield s.cond
    elif isinstance(s, For):
        if s.cond is not None:
            yield s.cond
    elif isinstance(s, Return) and s.value is not None:
        yield s.value
    elif isinstance(s, (Assert, Assume)):
        yield s.cond


def iter_exprs(e: Expr) -> Iterator[Expr]:
    yield e
    if isinstance(e, Unary):
        yield from iter_exprs(e.operand)
    elif isinstance(e, Binary):
        yield from iter_exprs(e.lhs)
        yield from iter_exprs(e.rhs)
    elif isinstance(e, Cast):
        yield from iter_exprs(e.operand)
    elif isinstance(e, Call):
        for a in e.args:
            yield from iter_exprs(a)


def all_exprs(s: Stmt) -> Iterator[Expr]:
    for st in iter_stmts(s):
        for e in stmt_exprs(st):
            yield from iter_exprs(e)


def loops_of(p: Program) -> list[LoopStmt]:
    """Every loop statement in the program, in source order by loop_id."""
    found: list[LoopStmt] = []
    for fn in p.functions.values():
        for s in iter_stmts(fn.body):
            if isinstance(s, Loop):
                found.append(s)
    return sorted(found, key=lambda s: s.loop_id)


# ===== STRUCTURAL EQUALITY AND CLONING =====

_SKIP_FIELDS = {"nid", "loc", "instr"}


def ast_equal(a, b) -> bool:
    """Structural equality ignoring node ids and source locations."""
    if isinstance(a, Program) and isinstance(b, Program):
        return (
            len(a.globals) == len(b.globals)
            and all(ast_equal(x, y) for x, y in zip(a.globals, b.globals))
            and list(a.functions) == list(b.functions)
            and all(ast_equal(a.functions[k], b.functions[k]) for k in a.functions)
        )
    if isinstance(a, Function) and isinstance(b, Function):
        return (
            a.name == b.name
            and a.ret == b.ret
            and a.params == b.params
            and ast_equal(a.body, b.body)
        )
    if type(a) is not type(b):
        return False
    if not isinstance(a, Node):
        return a == b
    for f in fields(a):
        if f.name in _SKIP_FIELDS:
            continue
        va, vb = getattr(a, f.name), getattr(b, f.name)
        if isinstance(va, Node) or isinstance(vb, Node):
            if not ast_equal(va, vb):
                return False
        elif isinstance(va, list):
            if not isinstance(vb, list) or len(va) != len(vb):
                return False
            if not all(ast_equal(x, y) for x, y in zip(va, vb)):
                return False
        elif va != vb:
            return False
    return True


def clone(node, p: Program):
    """Deep-copy a node subtree, minting fresh node ids from p.

    loop_id values are preserved; callers duplicating loops (the inliner)
    must refresh them explicitly.
    """
    if node is None:
        return None
    if not isinstance(node, Node):
        return node
    kwargs = {}
    for f in fields(node):
        v = getattr(node, f.name)
        if f.name == "nid":
            v = p.fresh_nid()
        elif isinstance(v, Node):
            v = clone(v, p)
        elif isinstance(v, list):
            v = [clone(x, p) for x in v]
        kwargs[f.name] = v
    return type(node)(**kwargs)


def clone_function(fn: Function, p: Program) -> Function:
    q = Function(fn.name, fn.ret, [Param(x.name, x.var_type) for x in fn.params], clone(fn.body, p), fn.loc)
    q.inlinable = fn.inlinable
    return q


def clone_program(p: Program) -> Program:
    q = Program(
        source_name=p.source_name,
        next_nid=p.next_nid,
        next_loop_id=p.next_loop_id,
        next_order=p.next_order,
    )
    q.symbols = {k: SymbolInfo(v.name, v.var_type, v.scope_depth, v.order, is_global=v.is_global, is_instr=v.is_instr) for k, v in p.symbols.items()}
    q.globals = [clone(g, q) for g in p.globals]
    q.functions = {name: clone_function(fn, q) for name, fn in p.functions.items()}
    return q
