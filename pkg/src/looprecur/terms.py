"""Hash-consed bit-vector terms.

The unwound program is encoded into a DAG of fixed-width terms; shared
subterms are interned so k loop copies cost O(k) nodes. Constructors fold
constants and a few cheap identities (and nothing else: no distribution,
no reassociation), which is what collapses statically dead branches and
fully-validated bounds to a constant goal.

Values are unsigned bit patterns 0..2^w-1 throughout; signedness is a
property of operators, not terms. Boolean means width 1.

Signed division/remainder are not term operators: the encoder composes
them from unsigned division on magnitudes, which reproduces C truncating
division including the INT_MIN/-1 wrap.
"""

from __future__ import annotations

from typing import Iterator, Optional

_UNARY = {"neg", "bvnot"}
_BINARY = {"add", "sub", "mul", "udiv", "urem", "and", "or", "xor", "shl", "lshr", "ashr"}
_CMP = {"eq", "ult", "slt"}
_EXT = {"zext", "sext", "trunc"}


class Term:
    __slots__ = ("tid", "op", "width", "args", "name", "value")

    def __init__(self, tid: int, op: str, width: int, args: tuple, name: Optional[str], value: Optional[int]):
        self.tid = tid
        self.op = op
        self.width = width
        self.args = args
        self.name = name
        self.value = value

    @property
    def is_const(self) -> bool:
        return self.op == "const"

    def __repr__(self) -> str:
        if self.op == "const":
            return f"{self.value}:{self.width}"
        if self.op == "var":
            return f"{self.name}:{self.width}"
        return f"({self.op}#{self.tid} {' '.join(repr(a) for a in self.args)})"


def _mask(width: int) -> int:
    return (1 << width) - 1


def _signed(v: int, width: int) -> int:
    if v >= 1 << (width - 1):
        return v - (1 << width)
    return v


def _complementary(a: "Term", b: "Term") -> bool:
    return (b.op == "bvnot" and b.args[0] is a) or (a.op == "bvnot" and a.args[0] is b)


def apply_op(op: str, width: int, args: list[int], widths: list[int]) -> int:
    """Ground semantics of one operator over unsigned bit patterns.

    `width` is the result width, `widths` the operand widths. Division by
    zero follows the all-ones/identity convention so every layer (this
    evaluator, the CNF circuits, the SMT backend) agrees even on paths the
    encoder has already cut.
    """
    m = _mask(width)
    if op == "const":
        raise ValueError("const has no operands")
    a = args[0]
    if op == "neg":
        return (-a) & m
    if op == "bvnot":
        return a ^ m
    if op == "zext":
        return a
    if op == "sext":
        return _signed(a, widths[0]) & m
    if op == "trunc":
        return a & m
    if op == "ite":
        return args[1] if a == 1 else args[2]
    b = args[1]
    if op == "add":
        return (a + b) & m
    if op == "sub":
        return (a - b) & m
    if op == "mul":
        return (a * b) & m
    if op == "udiv":
        return m if b == 0 else (a // b) & m
    if op == "urem":
        return a if b == 0 else (a % b) & m
    if op == "and":
        return a & b
    if op == "or":
        return a | b
    if op == "xor":
        return a ^ b
    if op == "shl":
        return 0 if b >= width else (a << b) & m
    if op == "lshr":
        return 0 if b >= width else a >> b
    if op == "ashr":
        w = widths[0]
        if b >= w:
            return m if a >> (w - 1) else 0
        return (_signed(a, w) >> b) & m
    if op == "eq":
        return 1 if a == b else 0
    if op == "ult":
        return 1 if a < b else 0
    if op == "slt":
        return 1 if _signed(a, widths[0]) < _signed(b, widths[1]) else 0
    raise AssertionError(f"unhandled operator {op!r}")


class TermTable:
    def __init__(self):
        self._interned: dict = {}
        self._terms: list[Term] = []

    def _mk(self, op: str, width: int, args: tuple = (), name: Optional[str] = None, value: Optional[int] = None) -> Term:
        key = (op, width, tuple(a.tid for a in args), name, value)
        t = self._interned.get(key)
        if t is None:
            t = Term(len(self._terms), op, width, args, name, value)
            self._terms.append(t)
            self._interned[key] = t
        return t

    def __len__(self) -> int:
        return len(self._terms)

    # --- leaves ---

    def const(self, value: int, width: int) -> Term:
        return self._mk("const", width, value=value & _mask(width))

    def var(self, name: str, width: int) -> Term:
        return self._mk("var", width, name=name)

    def true(self) -> Term:
        return self.const(1, 1)

    def false(self) -> Term:
        return self.const(0, 1)

    # --- generic application with folding ---

    def app(self, op: str, *args: Term, width: Optional[int] = None) -> Term:
        if op in _CMP:
            rw = 1
        elif op in _EXT:
            assert width is not None
            rw = width
        elif op == "ite":
            rw = args[1].width
        else:
            rw = args[0].width
        if all(a.is_const for a in args) and op != "var":
            v = apply_op(op, rw, [a.value for a in args], [a.width for a in args])
            return self.const(v, rw)
        folded = self._fold(op, args, rw)
        if folded is not None:
            return folded
        return self._mk(op, rw, args=args)

    def _fold(self, op: str, args: tuple, rw: int) -> Optional[Term]:
        m = _mask(rw)
        if op == "ite":
            c, a, b = args
            if c.is_const:
                return a if c.value == 1 else b
            if a is b:
                return a
        elif op in ("add", "sub", "xor", "or", "shl", "lshr", "ashr"):
            a, b = args
            if b.is_const and b.value == 0:
                return a
            if op == "add" and a.is_const and a.value == 0:
                return b
            if op in ("or", "xor") and a.is_const and a.value == 0:
                return b
            if op == "xor" and a is b:
                return self.const(0, rw)
            if op == "or" and a is b:
                return a
            if op == "or" and (
                (a.is_const and a.value == m) or (b.is_const and b.value == m)
            ):
                return self.const(m, rw)
            if op == "or" and _complementary(a, b):
                return self.const(m, rw)
            if op == "or" and a.op == "and" and b.op == "and" and a.args[0] is b.args[0]:
                # the two sides of a branch join: (g and c) or (g and not c) is g
                if _complementary(a.args[1], b.args[1]):
                    return a.args[0]
        elif op == "and":
            a, b = args
            if (a.is_const and a.value == 0) or (b.is_const and b.value == 0):
                return self.const(0, rw)
            if a.is_const and a.value == m:
                return b
            if b.is_const and b.value == m:
                return a
            if a is b:
                return a
            if _complementary(a, b):
                return self.const(0, rw)
        elif op == "mul":
            a, b = args
            for x, y in ((a, b), (b, a)):
                if x.is_const and x.value == 0:
                    return self.const(0, rw)
                if x.is_const and x.value == 1:
                    return y
        elif op == "eq":
            a, b = args
            if a is b:
                return self.true()
            # zext(x) lies in [0, 2^n - 1]; bool tests also round-trip
            # through zext, so collapse eq(zext(bit), k) to the bit itself
            for x, y in ((a, b), (b, a)):
                if x.op == "zext" and y.is_const:
                    if y.value > _mask(x.args[0].width):
                        return self.false()
                    if x.args[0].width == 1:
                        return x.args[0] if y.value == 1 else self.app("bvnot", x.args[0])
        elif op in ("ult", "slt"):
            a, b = args
            if a is b:
                return self.false()
            # interval argument: zext(x) is in [0, 2^n - 1] and that range
            # is non-negative at the outer width, so constant comparisons
            # outside it decide immediately
            for x, y, yconst_lhs in ((a, b, False), (b, a, True)):
                if x.op != "zext" or not y.is_const:
                    continue
                hi = _mask(x.args[0].width)
                c = _signed(y.value, x.width) if op == "slt" else y.value
                if not yconst_lhs:
                    if c > hi:
                        return self.true()
                    if c <= 0:
                        return self.false()
                else:
                    if c < 0:
                        return self.true()
                    if c >= hi:
                        return self.false()
        elif op == "bvnot":
            (a,) = args
            if a.op == "bvnot":
                return a.args[0]
        elif op in _EXT:
            (a,) = args
            if rw == a.width:
                return a
        return None

    # --- operator helpers ---

    def add(self, a: Term, b: Term) -> Term:
        return self.app("add", a, b)

    def sub(self, a: Term, b: Term) -> Term:
        return self.app("sub", a, b)

    def mul(self, a: Term, b: Term) -> Term:
        return self.app("mul", a, b)

    def neg(self, a: Term) -> Term:
        return self.app("neg", a)

    def udiv(self, a: Term, b: Term) -> Term:
        return self.app("udiv", a, b)

    def urem(self, a: Term, b: Term) -> Term:
        return self.app("urem", a, b)

    def bvnot(self, a: Term) -> Term:
        return self.app("bvnot", a)

    def and_(self, a: Term, b: Term) -> Term:
        return self.app("and", a, b)

    def or_(self, a: Term, b: Term) -> Term:
        return self.app("or", a, b)

    def xor(self, a: Term, b: Term) -> Term:
        return self.app("xor", a, b)

    def shl(self, a: Term, b: Term) -> Term:
        return self.app("shl", a, b)

    def lshr(self, a: Term, b: Term) -> Term:
        return self.app("lshr", a, b)

    def ashr(self, a: Term, b: Term) -> Term:
        return self.app("ashr", a, b)

    def eq(self, a: Term, b: Term) -> Term:
        return self.app("eq", a, b)

    def ne(self, a: Term, b: Term) -> Term:
        return self.bvnot(self.eq(a, b))

    def ult(self, a: Term, b: Term) -> Term:
        return self.app("ult", a, b)

    def ule(self, a: Term, b: Term) -> Term:
        return self.bvnot(self.app("ult", b, a))

    def slt(self, a: Term, b: Term) -> Term:
        return self.app("slt", a, b)

    def sle(self, a: Term, b: Term) -> Term:
        return self.bvnot(self.app("slt", b, a))

    def ite(self, c: Term, a: Term, b: Term) -> Term:
        return self.app("ite", c, a, b)

    def zext(self, a: Term, width: int) -> Term:
        return self.app("zext", a, width=width)

    def sext(self, a: Term, width: int) -> Term:
        return self.app("sext", a, width=width)

    def trunc(self, a: Term, width: int) -> Term:
        return self.app("trunc", a, width=width)

    def sdiv(self, a: Term, b: Term) -> Term:
        """C signed division (truncating) composed from unsigned division
        on magnitudes; INT_MIN / -1 wraps back to INT_MIN."""
        w = a.width
        qa = self._magnitude(a)
        qb = self._magnitude(b)
        q = self.udiv(qa, qb)
        neg_q = self.neg(q)
        sign_differs = self.ne(self._sign(a), self._sign(b))
        return self.ite(sign_differs, neg_q, q)

    def srem(self, a: Term, b: Term) -> Term:
        """C signed remainder: result takes the dividend's sign."""
        qa = self._magnitude(a)
        qb = self._magnitude(b)
        r = self.urem(qa, qb)
        return self.ite(self.eq(self._sign(a), self.true()), self.neg(r), r)

    def _sign(self, a: Term) -> Term:
        return self.trunc(self.lshr(a, self.const(a.width - 1, a.width)), 1)

    def _magnitude(self, a: Term) -> Term:
        return self.ite(self.eq(self._sign(a), self.true()), self.neg(a), a)


def eval_term(t: Term, env: dict[str, int], memo: Optional[dict] = None) -> int:
    """Evaluate a term DAG over an unsigned-bit-pattern environment.

    Iterative so deeply chained unwindings cannot overflow the Python
    stack; unassigned variables read as 0.
    """
    if memo is None:
        memo = {}
    stack = [t]
    while stack:
        cur = stack[-1]
        if cur.tid in memo:
            stack.pop()
            continue
        if cur.op == "const":
            memo[cur.tid] = cur.value
            stack.pop()
            continue
        if cur.op == "var":
            memo[cur.tid] = env.get(cur.name, 0) & _mask(cur.width)
            stack.pop()
            continue
        pending = [a for a in cur.args if a.tid not in memo]
        if pending:
            stack.extend(pending)
            continue
        vals = [memo[a.tid] for a in cur.args]
        widths = [a.width for a in cur.args]
        memo[cur.tid] = apply_op(cur.op, cur.width, vals, widths)
        stack.pop()
    return memo[t.tid]


def reachable(roots: list[Term]) -> list[Term]:
    """All terms reachable from roots, in ascending tid (construction)
    order, which is a valid topological order."""
    seen: set[int] = set()
    stack = list(roots)
    found: list[Term] = []
    while stack:
        t = stack.pop()
        if t.tid in seen:
            continue
        seen.add(t.tid)
        found.append(t)
        stack.extend(t.args)
    found.sort(key=lambda t: t.tid)
    return found


def support(roots: list[Term]) -> list[Term]:
    """The variable leaves reachable from roots, ordered by tid."""
    return [t for t in reachable(roots) if t.op == "var"]
