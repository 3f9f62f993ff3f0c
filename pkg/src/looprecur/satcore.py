"""Embedded CDCL SAT solver.

Classic two-watched-literal search with first-UIP learning, exponential
VSIDS, Luby restarts, phase saving, and activity-based learned-clause
deletion.  Deterministic for a fixed seed.  A satisfying assignment is
re-checked against every original clause before it is returned, so a "sat"
answer is trustworthy even if the search itself had a bug.

Literals are DIMACS ints at the API boundary; internally literal ``d`` maps
to index ``2*|d| + (d < 0)`` so negation is ``idx ^ 1``.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from typing import Optional

from .bitblast import Cnf


@dataclass
class SolveResult:
    status: str  # "sat" | "unsat" | "timeout"
    model: Optional[dict] = None  # var -> bool, only for "sat"
    conflicts: int = 0
    decisions: int = 0
    propagations: int = 0
    restarts: int = 0
    elapsed: float = 0.0


class _Clause:
    __slots__ = ("lits", "act", "learned", "deleted")

    def __init__(self, lits, learned=False):
        self.lits = lits
        self.act = 0.0
        self.learned = learned
        self.deleted = False


def _luby(i: int) -> int:
    # sequence 1 1 2 1 1 2 4 1 1 2 1 1 2 4 8 ...
    k = 1
    while (1 << (k + 1)) <= i + 1:
        k += 1
    while (1 << k) - 1 != i + 1:
        i = i - (1 << k) + 1
        k = 1
        while (1 << (k + 1)) <= i + 1:
            k += 1
    return 1 << k


class Solver:
    def __init__(self, nvars: int, seed: int = 0):
        self.nvars = nvars
        n = nvars + 1
        self.val = [0] * n  # 0 unknown, 1 true, -1 false
        self.level = [0] * n
        self.reason: list = [None] * n
        self.act = [0.0] * n
        self.phase = [False] * n
        self.watches: list = [[] for _ in range(2 * n)]
        self.trail: list = []
        self.trail_lim: list = []
        self.qhead = 0
        self.heap: list = []
        self.originals: list = []
        self.learned: list = []
        self.var_inc = 1.0
        self.ok = True
        self.conflicts = 0
        self.decisions = 0
        self.propagations = 0
        self.restarts = 0
        rng = random.Random(seed)
        for v in range(1, n):
            self.act[v] = rng.random() * 1e-9
            self.heap.append((-self.act[v], v))
        import heapq

        heapq.heapify(self.heap)
        self._heapq = heapq

    # --- literal helpers ---

    def _lit_val(self, lit: int) -> int:
        s = self.val[lit >> 1]
        return -s if lit & 1 else s

    def _enqueue(self, lit: int, reason=None) -> None:
        v = lit >> 1
        self.val[v] = -1 if lit & 1 else 1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(lit)

    # --- clause intake ---

    def add_clause(self, dimacs_lits) -> None:
        if not self.ok:
            return
        seen = set()
        lits = []
        for d in dimacs_lits:
            idx = 2 * abs(d) + (1 if d < 0 else 0)
            if idx ^ 1 in seen:
                return  # tautology
            if idx not in seen:
                seen.add(idx)
                lits.append(idx)
        if not lits:
            self.ok = False
            return
        if len(lits) == 1:
            lv = self._lit_val(lits[0])
            if lv == -1:
                self.ok = False
            elif lv == 0:
                self._enqueue(lits[0])
            return
        c = _Clause(lits)
        self.originals.append(c)
        self.watches[lits[0]].append(c)
        self.watches[lits[1]].append(c)

    # --- propagation ---

    def propagate(self) -> Optional[_Clause]:
        while self.qhead < len(self.trail):
            p = self.trail[self.qhead]
            self.qhead += 1
            falsified = p ^ 1
            ws = self.watches[falsified]
            i = j = 0
            n = len(ws)
            while i < n:
                c = ws[i]
                i += 1
                if c.deleted:
                    continue
                lits = c.lits
                # make sure the falsified literal sits at position 1
                if lits[0] == falsified:
                    lits[0], lits[1] = lits[1], lits[0]
                first = lits[0]
                fv = self._lit_val(first)
                if fv == 1:
                    ws[j] = c
                    j += 1
                    continue
                moved = False
                for k in range(2, len(lits)):
                    if self._lit_val(lits[k]) != -1:
                        lits[1], lits[k] = lits[k], lits[1]
                        self.watches[lits[1]].append(c)
                        moved = True
                        break
                if moved:
                    continue
                ws[j] = c
                j += 1
                if fv == -1:
                    # conflict: keep the remaining watchers in place
                    while i < n:
                        ws[j] = ws[i]
                        j += 1
                        i += 1
                    del ws[j:]
                    self.qhead = len(self.trail)
                    return c
                self._enqueue(first, c)
                self.propagations += 1
            del ws[j:]
        return None

    # --- VSIDS ---

    def _bump(self, v: int) -> None:
        self.act[v] += self.var_inc
        if self.act[v] > 1e100:
            for u in range(1, self.nvars + 1):
                self.act[u] *= 1e-100
            self.var_inc *= 1e-100
        self._heapq.heappush(self.heap, (-self.act[v], v))

    def _decay(self) -> None:
        self.var_inc /= 0.95

    # --- conflict analysis (first UIP) ---

    def analyze(self, confl: _Clause):
        learnt = [0]
        seen = bytearray(self.nvars + 1)
        counter = 0
        p = -1
        idx = len(self.trail) - 1
        cur_level = len(self.trail_lim)
        lits = confl.lits
        while True:
            if confl.learned:
                confl.act += 1.0
            start = 0 if p == -1 else 1
            for q in lits[start:]:
                v = q >> 1
                if not seen[v] and self.level[v] > 0:
                    seen[v] = 1
                    self._bump(v)
                    if self.level[v] >= cur_level:
                        counter += 1
                    else:
                        learnt.append(q)
            while not seen[self.trail[idx] >> 1]:
                idx -= 1
            p = self.trail[idx]
            idx -= 1
            v = p >> 1
            seen[v] = 0
            counter -= 1
            if counter == 0:
                break
            confl = self.reason[v]
            lits = confl.lits
        learnt[0] = p ^ 1
        if len(learnt) == 1:
            return learnt, 0
        # backjump to the second-highest decision level in the clause
        mi = 1
        for k in range(2, len(learnt)):
            if self.level[learnt[k] >> 1] > self.level[learnt[mi] >> 1]:
                mi = k
        learnt[1], learnt[mi] = learnt[mi], learnt[1]
        return learnt, self.level[learnt[1] >> 1]

    # --- trail management ---

    def backtrack(self, to_level: int) -> None:
        if len(self.trail_lim) <= to_level:
            return
        mark = self.trail_lim[to_level]
        for lit in reversed(self.trail[mark:]):
            v = lit >> 1
            self.phase[v] = self.val[v] == 1
            self.val[v] = 0
            self.reason[v] = None
            self._heapq.heappush(self.heap, (-self.act[v], v))
        del self.trail[mark:]
        del self.trail_lim[to_level:]
        self.qhead = len(self.trail)

    def _decide(self) -> bool:
        heap = self.heap
        pop = self._heapq.heappop
        while heap:
            _, v = pop(heap)
            if self.val[v] == 0:
                self.decisions += 1
                self.trail_lim.append(len(self.trail))
                self._enqueue(2 * v + (0 if self.phase[v] else 1))
                return True
        for v in range(1, self.nvars + 1):
            if self.val[v] == 0:
                self.decisions += 1
                self.trail_lim.append(len(self.trail))
                self._enqueue(2 * v + (0 if self.phase[v] else 1))
                return True
        return False

    # --- learned clause deletion ---

    def reduce_db(self) -> None:
        self.learned.sort(key=lambda c: c.act)
        half = len(self.learned) // 2
        kept = []
        for i, c in enumerate(self.learned):
            v0 = c.lits[0] >> 1
            locked = self.reason[v0] is c
            if i < half and len(c.lits) > 2 and not locked:
                c.deleted = True
            else:
                kept.append(c)
        self.learned = kept

    # --- top level ---

    def solve(self, deadline=None, clock=time.monotonic) -> SolveResult:
        t0 = clock()
        if not self.ok or self.propagate() is not None:
            return SolveResult("unsat", elapsed=clock() - t0)
        restart_idx = 0
        reduce_at = 4000
        while True:
            budget = 512 * _luby(restart_idx)
            restart_idx += 1
            self.restarts += 1
            confl_here = 0
            while True:
                confl = self.propagate()
                if confl is not None:
                    self.conflicts += 1
                    confl_here += 1
                    if not self.trail_lim:
                        return self._finish("unsat", t0, clock)
                    learnt, back = self.analyze(confl)
                    self.backtrack(back)
                    if len(learnt) == 1:
                        self._enqueue(learnt[0])
                    else:
                        c = _Clause(learnt, learned=True)
                        c.act = 1.0
                        self.learned.append(c)
                        self.watches[learnt[0]].append(c)
                        self.watches[learnt[1]].append(c)
                        self._enqueue(learnt[0], c)
                    self._decay()
                    if self.conflicts >= reduce_at:
                        self.reduce_db()
                        reduce_at = self.conflicts + 4000 + 300 * len(self.trail_lim)
                    if self.conflicts % 256 == 0 and deadline is not None and clock() > deadline:
                        return self._finish("timeout", t0, clock)
                    if confl_here >= budget:
                        self.backtrack(0)
                        break
                else:
                    if deadline is not None and clock() > deadline:
                        return self._finish("timeout", t0, clock)
                    if not self._decide():
                        model = {v: self.val[v] == 1 for v in range(1, self.nvars + 1)}
                        self._verify(model)
                        r = self._finish("sat", t0, clock)
                        r.model = model
                        return r

    def _finish(self, status, t0, clock) -> SolveResult:
        return SolveResult(
            status,
            conflicts=self.conflicts,
            decisions=self.decisions,
            propagations=self.propagations,
            restarts=self.restarts,
            elapsed=clock() - t0,
        )

    def _verify(self, model: dict) -> None:
        for c in self.originals:
            for lit in c.lits:
                v = lit >> 1
                if model[v] != bool(lit & 1):
                    break
            else:
                raise AssertionError("model fails to satisfy an input clause")


def solve(cnf: Cnf, *, deadline=None, clock=time.monotonic, seed: int = 0) -> SolveResult:
    s = Solver(cnf.num_vars, seed=seed)
    for cl in cnf.clauses:
        s.add_clause(cl)
    return s.solve(deadline=deadline, clock=clock)


def parse_dimacs(text: str) -> Cnf:
    """Parse DIMACS CNF; raises ValueError on malformed input."""
    nvars = None
    nclauses = None
    clauses = []
    pending = []
    for ln, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("c"):
            continue
        if line == "%":
            break
        if line.startswith("p"):
            parts = line.split()
            if nvars is not None or len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"line {ln}: bad problem line {line!r}")
            try:
                nvars, nclauses = int(parts[2]), int(parts[3])
            except ValueError:
                raise ValueError(f"line {ln}: bad problem line {line!r}") from None
            if nvars < 0 or nclauses < 0:
                raise ValueError(f"line {ln}: bad problem line {line!r}")
            continue
        if nvars is None:
            raise ValueError(f"line {ln}: clause before problem line")
        for tok in line.split():
            try:
                d = int(tok)
            except ValueError:
                raise ValueError(f"line {ln}: bad literal {tok!r}") from None
            if d == 0:
                clauses.append(tuple(pending))
                pending = []
            else:
                if abs(d) > nvars:
                    raise ValueError(f"line {ln}: literal {d} out of range")
                pending.append(d)
    if pending:
        raise ValueError("unterminated clause at end of input")
    if nvars is None:
        raise ValueError("missing problem line")
    cnf = Cnf(num_vars=nvars)
    cnf.clauses = clauses
    return cnf
