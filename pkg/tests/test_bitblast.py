"""Tseitin circuit construction and the DIMACS in/out pair."""

import random

from looprecur.bitblast import CircuitBuilder, Cnf, blast_vc, decode_model, emit_dimacs
from looprecur.frontend import parse
from looprecur.instrument import insert_rsi
from looprecur.satcore import parse_dimacs, solve
from looprecur.terms import TermTable, eval_term
from looprecur.unwind_encode import build_vc

from conftest import SPIN


def test_cnf_add_and_new_var():
    cnf = Cnf()
    a = cnf.new_var()
    b = cnf.new_var()
    cnf.add(a, -b)
    cnf.add(-a)
    assert cnf.num_vars == 2
    assert [list(c) for c in cnf.clauses] == [[1, -2], [-1]]


def test_emit_dimacs_shape():
    cnf = Cnf()
    a, b = cnf.new_var(), cnf.new_var()
    cnf.add(a, b)
    cnf.add(-a, -b)
    text = emit_dimacs(cnf, {"x": [a, b]})
    lines = text.splitlines()
    assert lines[0] == "c bits x 1 2"
    assert lines[1] == "p cnf 2 2"
    assert lines[2] == "1 2 0"
    assert lines[3] == "-1 -2 0"
    assert text.endswith("\n")


def test_dimacs_round_trip():
    cnf = Cnf()
    for _ in range(5):
        cnf.new_var()
    cnf.add(1, -3, 5)
    cnf.add(-2, 4)
    cnf.add(-5)
    back = parse_dimacs(emit_dimacs(cnf))
    assert back.num_vars == cnf.num_vars
    assert [list(c) for c in back.clauses] == [list(c) for c in cnf.clauses]


def eval_lit(lit, asg):
    v = asg.get(abs(lit), False)
    return not v if lit < 0 else v


def enumerate_models(cnf, inputs):
    """All assignments to `inputs` extendable to a full model."""
    sats = []
    for mask in range(1 << len(inputs)):
        probe = Cnf(cnf.num_vars, [list(c) for c in cnf.clauses])
        for i, v in enumerate(inputs):
            bit = (mask >> i) & 1
            probe.add(v if bit else -v)
        if solve(probe).status == "sat":
            sats.append(mask)
    return sats


def test_gate_primitives_match_boolean_ops():
    rng = random.Random(7)
    for trial in range(20):
        cb = CircuitBuilder()
        a, b, c = cb.cnf.new_var(), cb.cnf.new_var(), cb.cnf.new_var()
        g_and = cb.and_(a, b)
        g_or = cb.or_(b, c)
        g_xor = cb.xor_(a, c)
        g_mux = cb.mux(a, b, c)
        forced = [rng.choice([v, -v]) for v in (a, b, c)]
        for lit in forced:
            cb.cnf.add(lit)
        res = solve(cb.cnf)
        assert res.status == "sat"
        m = res.model
        va, vb, vc_ = (eval_lit(v, m) for v in (a, b, c))
        assert eval_lit(g_and, m) == (va and vb)
        assert eval_lit(g_or, m) == (vb or vc_)
        assert eval_lit(g_xor, m) == (va != vc_)
        assert eval_lit(g_mux, m) == (vb if va else vc_)


def test_term_blast_agrees_with_eval_term():
    rng = random.Random(99)
    tt = TermTable()
    width = 4
    x = tt.var("x", width)
    y = tt.var("y", width)
    builders = [
        lambda: tt.add(x, y),
        lambda: tt.sub(x, y),
        lambda: tt.mul(x, y),
        lambda: tt.udiv(x, y),
        lambda: tt.urem(x, y),
        lambda: tt.and_(x, y),
        lambda: tt.or_(x, y),
        lambda: tt.xor(x, y),
        lambda: tt.shl(x, tt.and_(y, tt.const(width - 1, width))),
        lambda: tt.lshr(x, tt.and_(y, tt.const(width - 1, width))),
        lambda: tt.ashr(x, tt.and_(y, tt.const(width - 1, width))),
        lambda: tt.ite(tt.ult(x, y), tt.add(x, y), tt.sub(x, y)),
        lambda: tt.zext(tt.trunc(x, 2), width),
        lambda: tt.sext(tt.trunc(y, 2), width),
        lambda: tt.bvnot(x),
        lambda: tt.neg(y),
    ]
    for make in builders:
        t = make()
        for _ in range(12):
            vx, vy = rng.randrange(16), rng.randrange(16)
            cb = CircuitBuilder()
            bits = cb.bits(t)
            for name, val in (("x", vx), ("y", vy)):
                for i, lit in enumerate(cb.varmap.get(name, [])):
                    cb.cnf.add(lit if (val >> i) & 1 else -lit)
            res = solve(cb.cnf)
            assert res.status == "sat"
            got = 0
            for i, lit in enumerate(bits):
                if eval_lit(lit, res.model):
                    got |= 1 << i
            want = eval_term(t, {"x": vx, "y": vy})
            assert got == want, (t.op, vx, vy, got, want)


def test_comparison_terms_blast_to_single_bit():
    tt = TermTable()
    x = tt.var("x", 8)
    y = tt.var("y", 8)
    for t in (tt.eq(x, y), tt.ult(x, y), tt.slt(x, y)):
        cb = CircuitBuilder()
        bits = cb.bits(t)
        assert len(bits) == 1


def test_blast_vc_covers_every_draw():
    src = """
    int main(void) {
        int a = __VERIFIER_nondet_int();
        int unused = __VERIFIER_nondet_int();
        while (a == 3) { }
        return 0;
    }
    """
    vc = build_vc(insert_rsi(parse(src, "t.c")).program, 2)
    blasted = blast_vc(vc)
    for s in vc.sites:
        assert s.name in blasted.varmap, s.name
        assert s.ndg in blasted.varmap
    res = solve(blasted.cnf)
    assert res.status == "sat"
    model = decode_model(res.model, blasted.varmap)
    # every draw has a value, including the one the goal cone never reads
    for s in vc.sites:
        assert s.name in model
    assert model["nd0"] == 3


def test_decode_model_defaults_unassigned_false():
    assert decode_model({}, {"v": [1, 2, 3]}) == {"v": 0}
    assert decode_model({2: True}, {"v": [1, 2, 3]}) == {"v": 2}
    # negative literal means the bit is the negation of the solver var
    assert decode_model({2: False}, {"v": [-2]}) == {"v": 1}


def test_spin_blast_end_to_end():
    vc = build_vc(insert_rsi(parse(SPIN, "t.c")).program, 2)
    blasted = blast_vc(vc)
    res = solve(blasted.cnf)
    assert res.status == "sat"
    model = decode_model(res.model, blasted.varmap)
    flags = [model[s.name] for s in vc.sites if s.instr]
    assert flags[0] == 1  # must store at the first visit to compare at the second
