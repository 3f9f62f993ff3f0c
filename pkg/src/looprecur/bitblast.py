"""Bit-level lowering of term DAGs to CNF.

Every term becomes a little-endian vector of DIMACS literals via the usual
Tseitin scheme.  A shared TRUE variable anchors constant bits, so constants
and the structural shortcuts around them cost nothing.  Division is encoded
relationally: fresh quotient and remainder vectors are pinned by the defining
equation in double width plus a remainder bound, with the divide-by-zero
fixup (quotient all ones, remainder the dividend) matching the term evaluator
and the SMT printer bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .terms import Term

# ---------------------------------------------------------------------------
# CNF container


@dataclass
class Cnf:
    """Clauses over DIMACS variables 1..num_vars."""

    num_vars: int = 0
    clauses: list = field(default_factory=list)

    def new_var(self) -> int:
        self.num_vars += 1
        return self.num_vars

    def add(self, *lits: int) -> None:
        self.clauses.append(tuple(lits))


# ---------------------------------------------------------------------------
# circuit construction


class CircuitBuilder:
    """Tseitin translation with structural shortcuts on known literals.

    Literals are plain DIMACS ints; negation is integer negation, which makes
    bvnot free.  Gates are cached structurally so the same subcircuit is
    never emitted twice.
    """

    def __init__(self, cnf: Optional[Cnf] = None):
        self.cnf = cnf if cnf is not None else Cnf()
        self.TRUE = self.cnf.new_var()
        self.cnf.add(self.TRUE)
        self.varmap: dict = {}
        self._memo: dict = {}
        self._gates: dict = {}

    @property
    def FALSE(self) -> int:
        return -self.TRUE

    # --- single-bit gates ---

    def and_(self, a: int, b: int) -> int:
        if a == self.FALSE or b == self.FALSE or a == -b:
            return self.FALSE
        if a == self.TRUE or a == b:
            return b
        if b == self.TRUE:
            return a
        key = ("and",) + tuple(sorted((a, b)))
        o = self._gates.get(key)
        if o is None:
            o = self.cnf.new_var()
            self.cnf.add(-o, a)
            self.cnf.add(-o, b)
            self.cnf.add(o, -a, -b)
            self._gates[key] = o
        return o

    def or_(self, a: int, b: int) -> int:
        return -self.and_(-a, -b)

    def xor_(self, a: int, b: int) -> int:
        if a == self.FALSE:
            return b
        if b == self.FALSE:
            return a
        if a == self.TRUE:
            return -b
        if b == self.TRUE:
            return -a
        if a == b:
            return self.FALSE
        if a == -b:
            return self.TRUE
        # xor(-a, b) == -xor(a, b): factor signs out for a canonical key
        sign = 1
        if a < 0:
            sign, a = -sign, -a
        if b < 0:
            sign, b = -sign, -b
        if a > b:
            a, b = b, a
        key = ("xor", a, b)
        o = self._gates.get(key)
        if o is None:
            o = self.cnf.new_var()
            self.cnf.add(-o, a, b)
            self.cnf.add(-o, -a, -b)
            self.cnf.add(o, -a, b)
            self.cnf.add(o, a, -b)
            self._gates[key] = o
        return sign * o

    def mux(self, c: int, a: int, b: int) -> int:
        """c ? a : b"""
        if c == self.TRUE or a == b:
            return a
        if c == self.FALSE:
            return b
        return self.or_(self.and_(c, a), self.and_(-c, b))

    # --- word-level blocks ---

    def ripple(self, a: list, b: list, cin: int):
        """Returns (sum bits, carry out)."""
        out = []
        c = cin
        for x, y in zip(a, b):
            h = self.xor_(x, y)
            out.append(self.xor_(h, c))
            c = self.or_(self.and_(x, y), self.and_(h, c))
        return out, c

    def add_vec(self, a: list, b: list) -> list:
        return self.ripple(a, b, self.FALSE)[0]

    def sub_vec(self, a: list, b: list) -> list:
        return self.ripple(a, [-y for y in b], self.TRUE)[0]

    def neg_vec(self, a: list) -> list:
        zero = [self.FALSE] * len(a)
        return self.ripple([-x for x in a], zero, self.TRUE)[0]

    def ult_vec(self, a: list, b: list) -> int:
        # a < b unsigned iff a + ~b + 1 produces no carry out
        _, carry = self.ripple(a, [-y for y in b], self.TRUE)
        return -carry

    def slt_vec(self, a: list, b: list) -> int:
        # flipping the sign bit maps signed order onto unsigned order
        return self.ult_vec(a[:-1] + [-a[-1]], b[:-1] + [-b[-1]])

    def eq_vec(self, a: list, b: list) -> int:
        acc = self.TRUE
        for x, y in zip(a, b):
            acc = self.and_(acc, -self.xor_(x, y))
        return acc

    def mux_vec(self, c: int, a: list, b: list) -> list:
        return [self.mux(c, x, y) for x, y in zip(a, b)]

    def shift_vec(self, a: list, b: list, kind: str) -> list:
        """Barrel shifter; amounts >= width flush to zero or sign fill."""
        w = len(a)
        fill = a[-1] if kind == "ashr" else self.FALSE
        cur = list(a)
        over = self.FALSE
        for i, bit in enumerate(b):
            sh = 1 << i
            if sh >= w:
                over = self.or_(over, bit)
                continue
            if kind == "shl":
                shifted = [self.FALSE] * sh + cur[: w - sh]
            else:
                shifted = cur[sh:] + [fill] * sh
            cur = self.mux_vec(bit, shifted, cur)
        return self.mux_vec(over, [fill] * w, cur)

    def mul_vec(self, a: list, b: list) -> list:
        w = len(a)
        acc = [self.FALSE] * w
        for i, bit in enumerate(b):
            if bit == self.FALSE:
                continue
            partial = [self.FALSE] * i + [self.and_(bit, x) for x in a[: w - i]]
            acc = self.add_vec(acc, partial)
        return acc

    def divmod_vec(self, a: list, b: list):
        """Fresh (quotient, remainder) pinned relationally.

        In double width: q*b + r == a, with r < b when b != 0; when b == 0
        the result is forced to (all ones, a).  The constraint is total, so
        it never prunes models of other variables.
        """
        w = len(a)
        q = [self.cnf.new_var() for _ in range(w)]
        r = [self.cnf.new_var() for _ in range(w)]
        pad = [self.FALSE] * w
        prod = self.mul_vec(q + pad, b + pad)
        total = self.add_vec(prod, r + pad)
        zero = [self.FALSE] * w
        ones = [self.TRUE] * w
        when_nz = self.and_(self.eq_vec(total, a + pad), self.ult_vec(r, b))
        when_z = self.and_(self.eq_vec(q, ones), self.eq_vec(r, a))
        self.cnf.add(self.mux(self.eq_vec(b, zero), when_z, when_nz))
        return q, r

    # --- term lowering ---

    def bits(self, t: Term) -> list:
        """Lower a term DAG to its literal vector (memoized, iterative)."""
        memo = self._memo
        stack = [t]
        while stack:
            cur = stack[-1]
            if cur.tid in memo:
                stack.pop()
                continue
            pending = [a for a in cur.args if a.tid not in memo]
            if pending:
                stack.extend(pending)
                continue
            stack.pop()
            memo[cur.tid] = self._lower(cur)
        return memo[t.tid]

    def _lower(self, t: Term) -> list:
        memo = self._memo
        if t.op == "const":
            return [self.TRUE if (t.value >> i) & 1 else self.FALSE for i in range(t.width)]
        if t.op == "var":
            lits = self.varmap.get(t.name)
            if lits is None:
                lits = [self.cnf.new_var() for _ in range(t.width)]
                self.varmap[t.name] = lits
            return lits
        a = [memo[x.tid] for x in t.args]
        if t.op == "bvnot":
            return [-x for x in a[0]]
        if t.op == "and":
            return [self.and_(x, y) for x, y in zip(a[0], a[1])]
        if t.op == "or":
            return [self.or_(x, y) for x, y in zip(a[0], a[1])]
        if t.op == "xor":
            return [self.xor_(x, y) for x, y in zip(a[0], a[1])]
        if t.op == "add":
            return self.add_vec(a[0], a[1])
        if t.op == "sub":
            return self.sub_vec(a[0], a[1])
        if t.op == "neg":
            return self.neg_vec(a[0])
        if t.op == "mul":
            return self.mul_vec(a[0], a[1])
        if t.op in ("udiv", "urem"):
            key = ("divmod", t.args[0].tid, t.args[1].tid)
            qr = self._gates.get(key)
            if qr is None:
                qr = self.divmod_vec(a[0], a[1])
                self._gates[key] = qr
            return qr[0] if t.op == "udiv" else qr[1]
        if t.op in ("shl", "lshr", "ashr"):
            return self.shift_vec(a[0], a[1], t.op)
        if t.op == "eq":
            return [self.eq_vec(a[0], a[1])]
        if t.op == "ult":
            return [self.ult_vec(a[0], a[1])]
        if t.op == "slt":
            return [self.slt_vec(a[0], a[1])]
        if t.op == "ite":
            return self.mux_vec(a[0][0], a[1], a[2])
        if t.op == "zext":
            return a[0] + [self.FALSE] * (t.width - len(a[0]))
        if t.op == "sext":
            return a[0] + [a[0][-1]] * (t.width - len(a[0]))
        if t.op == "trunc":
            return a[0][: t.width]
        raise AssertionError(f"unhandled operator {t.op!r}")

    def require(self, lit: int) -> None:
        self.cnf.add(lit)

    def require_equal(self, a: list, b: list) -> None:
        for x, y in zip(a, b):
            self.cnf.add(-x, y)
            self.cnf.add(x, -y)


# ---------------------------------------------------------------------------
# whole-VC lowering


@dataclass
class BlastResult:
    cnf: Cnf
    varmap: dict


def blast_vc(vc) -> BlastResult:
    """Lower a VC to CNF: goal bit forced, draw guards tied to their vars.

    All draw-site variables are blasted even when the goal cone misses them,
    so a decoded model always carries a value for every draw.
    """
    cb = CircuitBuilder()
    for s in vc.sites:
        cb.bits(vc.table.var(s.name, s.ty.width))
        ndg = cb.bits(vc.table.var(s.ndg, 1))
        cb.require_equal(ndg, cb.bits(s.guard))
    goal = cb.bits(vc.goal)
    cb.require(goal[0])
    return BlastResult(cb.cnf, cb.varmap)


# ---------------------------------------------------------------------------
# DIMACS in and out


def emit_dimacs(cnf: Cnf, varmap: Optional[dict] = None) -> str:
    """Standard DIMACS with the name-to-literal map in comment lines."""
    lines = []
    if varmap:
        for name in sorted(varmap):
            lits = " ".join(str(x) for x in varmap[name])
            lines.append(f"c bits {name} {lits}")
    lines.append(f"p cnf {cnf.num_vars} {len(cnf.clauses)}")
    for cl in cnf.clauses:
        lines.append(" ".join(str(x) for x in cl) + " 0")
    return "\n".join(lines) + "\n"


def decode_model(assignment: dict, varmap: dict) -> dict:
    """Model as {name: unsigned value}; unassigned variables read false."""
    out = {}
    for name, lits in varmap.items():
        v = 0
        for i, lit in enumerate(lits):
            val = bool(assignment.get(abs(lit), False))
            if lit < 0:
                val = not val
            if val:
                v |= 1 << i
        out[name] = v
    return out
