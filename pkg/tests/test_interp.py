"""Concrete execution: arithmetic, control flow, limits, and event logs."""

import pytest

from looprecur.frontend import parse
from looprecur.instrument import insert_rsi
from looprecur.interp import binop, convert, run
from looprecur.nodes import BOOL, I8, I32, U8, U32
from looprecur.normalize import brace

from conftest import SPIN


def go(src, values=None, **kw):
    return run(brace(parse(src, "t.c")), values, **kw)


def test_return_and_env():
    r = go("int main(void) { int a = 6; int b = 7; return a * b; }")
    assert r.status == "returned"
    assert r.exit_code == 42
    assert r.env["a"] == 6 and r.env["b"] == 7


def test_signed_wraparound():
    r = go("int main(void) { int x = 2147483647; x = x + 1; return 0; }")
    assert r.env["x"] == -2147483648


def test_unsigned_char_wraps():
    r = go("int main(void) { unsigned char x = 255; x = x + 1; return x; }")
    assert r.env["x"] == 0


def test_division_truncates_toward_zero():
    r = go(
        """
        int main(void) {
            int a = -7 / 2;
            int b = 7 / -2;
            int c = -7 % 2;
            int d = 7 % -2;
            return 0;
        }
        """
    )
    assert (r.env["a"], r.env["b"], r.env["c"], r.env["d"]) == (-3, -3, -1, 1)


def test_division_by_zero_is_infeasible():
    # mirrors the encoder, which cuts division-by-zero paths with a side
    # condition rather than modeling a trap value
    r = go("int main(void) { int z = 0; int a = 5 / z; return a; }")
    assert r.status == "infeasible"


def test_shift_counts_are_masked():
    r = go(
        """
        int main(void) {
            int a = 1 << 33;
            unsigned int b = 4000000000u >> 1;
            int c = -8 >> 1;
            return 0;
        }
        """
    )
    assert r.env["a"] == 2  # 33 & 31 == 1
    assert r.env["b"] == 2000000000
    assert r.env["c"] == -4  # arithmetic shift on signed


def test_short_circuit_evaluation():
    r = go(
        """
        int main(void) {
            int z = 0;
            int hit = 0;
            if (z != 0 && 5 / z > 0) { hit = 1; }
            if (z == 0 || 5 / z > 0) { hit = hit + 2; }
            return hit;
        }
        """
    )
    assert r.status == "returned"
    assert r.exit_code == 2


def test_break_continue_for():
    r = go(
        """
        int main(void) {
            int total = 0;
            for (int i = 0; i < 10; i++) {
                if (i == 2) { continue; }
                if (i == 5) { break; }
                total = total + i;
            }
            return total;
        }
        """
    )
    assert r.exit_code == 0 + 1 + 3 + 4


def test_do_while_runs_once():
    r = go("int main(void) { int n = 0; do { n = n + 1; } while (n < 0); return n; }")
    assert r.exit_code == 1


def test_assume_infeasible():
    r = go("int main(void) { int x = 3; __VERIFIER_assume(x > 5); return x; }")
    assert r.status == "infeasible"


def test_assert_violation_records_location():
    src = """
    int main(void) {
        int i = 0;
        while (i < 5) {
            __VERIFIER_assert(i != 3);
            i = i + 1;
        }
        return 0;
    }
    """
    r = go(src)
    assert r.status == "assert-violated"
    assert r.violated is not None
    assert r.violated_loop == 0
    assert r.violated_visit == 3  # 0-based: visits 0,1,2 pass, visit 3 trips


def test_asserts_disabled_keeps_running():
    src = "int main(void) { __VERIFIER_assert(0); return 9; }"
    r = go(src, asserts_enabled=False)
    assert r.status == "returned" and r.exit_code == 9


def test_nondet_tape_and_exhaustion():
    src = """
    int main(void) {
        int a = __VERIFIER_nondet_int();
        int b = __VERIFIER_nondet_int();
        return a + b;
    }
    """
    r = go(src, [10, 20])
    assert r.exit_code == 30
    assert [e.value for e in r.draws] == [10, 20]
    r2 = go(src, [10])
    assert r2.status == "nondet-exhausted"


def test_draw_conversion_matches_type():
    src = "int main(void) { unsigned char u = __VERIFIER_nondet_uchar(); char c = __VERIFIER_nondet_char(); return 0; }"
    r = go(src, [300, 200])
    assert r.env["u"] == 44
    assert r.env["c"] == -56
    assert [e.value for e in r.draws] == [44, -56]


def test_step_limit():
    r = go(SPIN, step_limit=50)
    assert r.status == "step-limit"
    assert r.steps == 51  # counts the statement that tripped the limit


def test_iter_limit_is_per_activation():
    src = """
    int main(void) {
        int i = 0;
        while (i < 3) {
            int j = 0;
            while (j < 4) { j = j + 1; }
            i = i + 1;
        }
        return i;
    }
    """
    # each inner activation runs 4 iterations; a limit of 4 lets it finish
    assert go(src, iter_limit=4).status == "returned"
    assert go(src, iter_limit=3).status == "iter-limit"


def test_visit_events_count_body_entries():
    src = """
    int main(void) {
        int i = 0;
        while (i < 3) { i = i + 1; }
        return i;
    }
    """
    r = go(src)
    assert [(v.loop_id, v.visit) for v in r.visits] == [(0, 0), (0, 1), (0, 2)]


def test_watch_snapshots_at_body_entry():
    src = """
    int main(void) {
        int i = 0;
        int s = 0;
        while (i < 4) { s = s + i; i = i + 1; }
        return s;
    }
    """
    r = go(src, watch_loop=0, watch_vars=["i", "s"])
    assert r.snapshots == [
        (0, {"i": 0, "s": 0}),
        (1, {"i": 1, "s": 0}),
        (2, {"i": 2, "s": 1}),
        (3, {"i": 3, "s": 3}),
    ]


def test_visit_limit_stops_after_snapshot():
    r = go(SPIN, watch_loop=0, watch_vars=[], visit_limit=5)
    assert r.status == "visit-limit"
    assert len(r.snapshots) == 5


def test_instr_zero_mutes_gadget_draws():
    src = """
    int main(void) {
        int i = 0;
        while (i < 3) {
            int v = __VERIFIER_nondet_int();
            i = i + 1;
        }
        return 0;
    }
    """
    ip = insert_rsi(parse(src, "t.c"))
    # tape feeds only the program's own draws; flag draws are forced to 0
    r = run(ip.program, [7, 8, 9], instr_zero=True, asserts_enabled=False)
    assert r.status == "returned"
    # muted gadget draws consume no tape and leave no events
    assert [e.value for e in r.draws] == [7, 8, 9]
    assert all(not e.instr for e in r.draws)


def test_convert_is_idempotent():
    for ty in (BOOL, I8, U8, I32, U32):
        for raw in (-1, 0, 1, 127, 128, 255, 256, 2**31, 2**32 - 1):
            once = convert(raw, ty)
            assert convert(once, ty) == once


@pytest.mark.parametrize(
    "op,a,b,ty,expected",
    [
        ("+", 200, 100, U8, 44),
        ("-", 0, 1, U32, 2**32 - 1),
        ("*", 16, 16, I8, 0),
        ("/", -2147483648, -1, I32, -2147483648),  # overflow wraps
        ("%", -2147483648, -1, I32, 0),
        ("<<", 1, 9, U8, 2),
        (">>", -16, 2, I8, -4),
        (">>", 240, 2, U8, 60),
        ("<", -1, 0, I32, 1),
        ("<", 2**32 - 1, 0, U32, 0),  # canonical form of -1 compares high
        ("==", 5, 5, I32, 1),
    ],
)
def test_binop_table(op, a, b, ty, expected):
    assert binop(op, a, b, ty) == expected


def test_binop_div_zero_raises():
    with pytest.raises(ZeroDivisionError):
        binop("/", 1, 0, I32)
    with pytest.raises(ZeroDivisionError):
        binop("%", 1, 0, U8)
