"""Loop unwinding into bit-vector verification conditions."""

import pytest

from looprecur.bitblast import blast_vc, decode_model
from looprecur.frontend import parse
from looprecur.instrument import insert_rsi
from looprecur.interp import binop
from looprecur.nodes import I8, I32, U8
from looprecur.satcore import solve
from looprecur.terms import TermTable, apply_op, eval_term
from looprecur.unwind_encode import build_vc, emit_smt2, parse_smt_output

from conftest import SPIN, U8_WRAP


def vc_for(src, k):
    # the encoder consumes the instrumented program, like the driver does
    return build_vc(insert_rsi(parse(src, "t.c")).program, k)


def vc_sat(vc):
    if vc.trivially_unsat:
        return None
    blasted = blast_vc(vc)
    res = solve(blasted.cnf)
    assert res.status in ("sat", "unsat")
    if res.status != "sat":
        return None
    return decode_model(res.model, blasted.varmap)


def test_obligation_copies_follow_visit_numbering():
    # copy 1 cannot compare (nothing stored yet) and folds away
    vc = vc_for(SPIN, 4)
    assert [o.copy for o in vc.obligations] == [2, 3, 4]
    assert all(o.loop_id == 0 for o in vc.obligations)


def test_spin_recurs_at_bound_two():
    assert vc_sat(vc_for(SPIN, 1)) is None  # store and compare need two visits
    assert vc_sat(vc_for(SPIN, 2)) is not None


def test_draw_site_naming_and_order():
    src = """
    int main(void) {
        int a = __VERIFIER_nondet_int();
        unsigned char u = __VERIFIER_nondet_uchar();
        int i = 0;
        while (i < a) { i = i + u; }
        return 0;
    }
    """
    vc = vc_for(src, 2)
    assert [s.order for s in vc.sites] == list(range(len(vc.sites)))
    assert all(s.ndg == f"ndg{s.order}" for s in vc.sites)
    program_sites = [s for s in vc.sites if not s.instr]
    assert all(s.name == f"nd{s.order}" for s in program_sites)
    assert [s.ty for s in program_sites] == [I32, U8]
    instr_sites = [s for s in vc.sites if s.instr]
    # one flag draw per loop copy, named after the gadget variable
    assert [s.name for s in instr_sites] == ["flag0_1", "flag0_2"]
    assert all(s.loop_id == 0 for s in instr_sites)
    assert [s.copy for s in instr_sites] == [1, 2]


def test_terminating_loop_within_bound_is_unsat():
    src = """
    int main(void) {
        int i = 0;
        while (i < 3) { i = i + 1; }
        return 0;
    }
    """
    # i never repeats at the header, so no bound finds a recurrence
    for k in (2, 3, 4, 8):
        assert vc_sat(vc_for(src, k)) is None


def test_constant_loop_recurs_immediately():
    src = """
    int main(void) {
        int x = 5;
        while (x == 5) { x = 5; }
        return 0;
    }
    """
    model = vc_sat(vc_for(src, 2))
    assert model is not None


def test_u8_wraparound_needs_full_cycle():
    # x covers all 256 residues before the first header revisit
    assert vc_sat(vc_for(U8_WRAP, 256)) is None
    assert vc_sat(vc_for(U8_WRAP, 257)) is not None


def test_loop_free_vc_is_trivially_unsat():
    vc = vc_for("int main(void) { return 0; }", 3)
    assert vc.trivially_unsat
    assert vc.obligations == []


def test_unreachable_loop_folds_away():
    src = """
    int main(void) {
        int x = 1;
        if (x == 2) {
            while (1) { }
        }
        return 0;
    }
    """
    vc = vc_for(src, 3)
    assert vc.trivially_unsat


def test_nested_loops_obligations():
    src = """
    int main(void) {
        int i = 0;
        while (i < 2) {
            int j = 0;
            while (j < 2) { j = j + 1; }
            i = i + 1;
        }
        return i;
    }
    """
    vc = vc_for(src, 3)
    per_loop = {}
    for o in vc.obligations:
        per_loop.setdefault(o.loop_id, []).append(o.copy)
    # constant folding discharges most copies of this all-constant program,
    # but the nondet store flags keep at least one live check per loop
    assert per_loop, "expected live obligations"
    assert vc_sat(vc) is None  # both loops terminate quickly


def test_emit_smt2_shape():
    vc = vc_for(SPIN, 2)
    text = emit_smt2(vc)
    lines = text.splitlines()
    assert lines[1] == "(set-logic QF_BV)"
    for site in vc.sites:
        assert f"(declare-const {site.name} (_ BitVec {site.ty.width}))" in lines
        assert f"(declare-const {site.ndg} (_ BitVec 1))" in lines
    assert lines[-2] == "(check-sat)"
    assert lines[-1] == "(get-model)"
    assert text.endswith("\n")
    # every defined term is referenced after definition only
    seen = set()
    for line in lines:
        if line.startswith("(define-fun t"):
            tid = line.split()[1]
            for tok in line.replace(")", " ").replace("(", " ").split()[3:]:
                if tok.startswith("t") and tok[1:].isdigit():
                    assert tok in seen, f"{tok} used before definition"
            seen.add(tid)


@pytest.mark.parametrize(
    "reply,status,model",
    [
        ("unsat\n", "unsat", {}),
        ("unknown\n", "unknown", {}),
        (
            "sat\n(model\n  (define-fun nd0 () (_ BitVec 32) #x0000002a)\n)\n",
            "sat",
            {"nd0": 42},
        ),
        (
            "sat\n((define-fun ndg0 () (_ BitVec 1) #b1))\n",
            "sat",
            {"ndg0": 1},
        ),
        (
            "sat\n(define-fun nd1 () (_ BitVec 8) (_ bv200 8))\n",
            "sat",
            {"nd1": 200},
        ),
    ],
)
def test_parse_smt_output_forms(reply, status, model):
    got_status, got_model = parse_smt_output(reply)
    assert got_status == status
    assert got_model == model


def test_parse_smt_output_ignores_noise():
    status, model = parse_smt_output("; comment\nstatistics blah\nsat\n")
    assert status == "sat" and model == {}


def test_apply_op_matches_interp_binop_spot():
    tt = TermTable()
    cases = [
        ("add", "+", 250, 10, U8),
        ("sub", "-", 3, 7, U8),
        ("mul", "*", 100, 3, I8),
        ("shl", "<<", 1, 3, U8),
    ]
    for prim, cop, a, b, ty in cases:
        ta = ty.to_bits(a)
        tb = ty.to_bits(b)
        got = apply_op(prim, ty.width, [ta, tb], [ty.width, ty.width])
        want = ty.to_bits(binop(cop, ty.wrap(a), ty.wrap(b), ty))
        assert got == want, prim


def test_eval_term_over_model():
    tt = TermTable()
    x = tt.var("x", 8)
    y = tt.var("y", 8)
    t = tt.add(tt.mul(x, tt.const(3, 8)), y)
    assert eval_term(t, {"x": 10, "y": 4}) == 34
    cmp = tt.slt(tt.const(0x80, 8), tt.const(1, 8))
    assert eval_term(cmp, {}) == 1  # -128 < 1 signed


def test_division_by_zero_paths_cut():
    src = """
    int main(void) {
        int d = __VERIFIER_nondet_int();
        int x = 10;
        while (x > 0) { x = x / d; }
        return 0;
    }
    """
    # x/d == x with x == 10 forces d == 1; d == 0 is cut as a side condition
    vc = vc_for(src, 2)
    model = vc_sat(vc)
    assert model is not None
    divisor_site = next(s for s in vc.sites if not s.instr)
    assert model[divisor_site.name] == 1
