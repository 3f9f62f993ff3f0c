"""Recurrence-gadget insertion, state variable discovery, and stripping."""

from looprecur.frontend import parse
from looprecur.instrument import collect_state_vars, insert_rsi, strip_gadgets, strip_markers
from looprecur.nodes import (
    Block,
    Decl,
    DoWhile,
    For,
    If,
    Noop,
    While,
    ast_equal,
    iter_stmts,
)
from looprecur.normalize import brace, unparse

from conftest import SPIN, corpus_sources


def instrument(src):
    return insert_rsi(parse(src, "t.c"))


def loops_of(p, kinds=(While, For, DoWhile)):
    out = []
    for fn in p.functions.values():
        out.extend(s for s in iter_stmts(fn.body) if isinstance(s, kinds))
    return out


COUNTER = """
int main(void) {
    int i = 0;
    while (i < 4) {
        int t = i * 2;
        i = i + 1;
        if (i == 3) {
            i = 0;
        }
    }
    return i;
}
"""


def test_gadget_declarations_precede_loop():
    ip = instrument(COUNTER)
    body = ip.program.functions["main"].body.stmts
    k = next(idx for idx, s in enumerate(body) if isinstance(s, While))
    decls = body[:k]
    names = [s.name for s in decls if isinstance(s, Decl)]
    assert names[-2:] == ["pStored0", "oi"]
    assert all(s.instr for s in decls if s.name in ("pStored0", "oi"))


def test_gadget_body_prefix_order():
    ip = instrument(COUNTER)
    loop = loops_of(ip.program)[0]
    head = loop.body.stmts[:4]
    assert isinstance(head[0], Noop) and head[0].instr  # printf marker
    assert isinstance(head[1], Decl) and head[1].name == "flag0"
    assert isinstance(head[2], If) and head[2].orelse is None
    assert isinstance(head[3], If) and head[3].orelse is None
    # the rest is the original body
    assert unparse(strip_gadgets(ip.program)) == unparse(ip.base)


def test_store_is_gated_and_single():
    ip = instrument(COUNTER)
    loop = loops_of(ip.program)[0]
    store_if = loop.body.stmts[3]
    text = unparse(ip.program)
    assert "if (flag0 && !pStored0) {" in text
    stmts = store_if.then.stmts
    assert stmts[-1].__class__.__name__ in ("Assign",)
    assert stmts[-1].name == "pStored0"


def test_assert_negated_conjunction():
    src = """
    int main(void) {
        int a = 0;
        int b = 5;
        while (a < b) {
            a = a + 1;
            b = b - 1;
        }
        return a;
    }
    """
    text = unparse(instrument(src).program)
    assert "__VERIFIER_assert(!(oa == a && ob == b));" in text


def test_empty_state_set_asserts_false():
    ip = instrument(SPIN)
    assert ip.sites[0].state_vars == []
    assert "__VERIFIER_assert(!1);" in unparse(ip.program)


def test_state_vars_exclude_body_locals():
    ip = instrument(COUNTER)
    assert ip.sites[0].state_vars == ["i"]  # t is declared in the body


def test_state_vars_include_callee_globals():
    src = """
    int g = 2;
    int h = 9;
    int add(int k) { g = g + k; return g; }
    int main(void) {
        int i = 0;
        while (i < 4) {
            int t = add(1);
            i = i + 1;
        }
        return h;
    }
    """
    ip = instrument(src)
    # globals sort before locals; h is never touched by the loop
    assert ip.sites[0].state_vars == ["g", "i"]


def test_state_vars_callee_locals_stay_out():
    src = """
    int g = 0;
    int twice(int k) { int local = k * 2; g = g + local; return local; }
    int main(void) {
        int i = 0;
        while (i < 3) { i = i + twice(1); }
        return g;
    }
    """
    ip = instrument(src)
    assert ip.sites[0].state_vars == ["g", "i"]


def test_collect_state_vars_declaration_order():
    src = """
    int main(void) {
        int z = 0;
        int a = 0;
        int i = 0;
        while (i < 5) {
            i = i + a;
            a = a + z;
            z = z + 1;
        }
        return 0;
    }
    """
    p = brace(parse(src, "t.c"))
    loop = loops_of(p)[0]
    assert collect_state_vars(p, loop) == ["z", "a", "i"]


def test_two_loops_get_distinct_gadgets():
    src = """
    int main(void) {
        int i = 0;
        while (i < 2) { i = i + 1; }
        int j = 0;
        do { j = j + 1; } while (j < 3);
        return i + j;
    }
    """
    ip = instrument(src)
    assert [s.loop_id for s in ip.sites] == [0, 1]
    assert {s.pstored for s in ip.sites} == {"pStored0", "pStored1"}
    assert {s.flag for s in ip.sites} == {"flag0", "flag1"}
    text = unparse(ip.program)
    assert 'printf("rsi marker loop 0");' in text
    assert 'printf("rsi marker loop 1");' in text


def test_nested_inner_gadget_resets_per_outer_pass():
    src = """
    int main(void) {
        int i = 0;
        while (i < 2) {
            int j = 0;
            while (j < 3) { j = j + 1; }
            i = i + 1;
        }
        return i;
    }
    """
    ip = instrument(src)
    outer = loops_of(ip.program)[0]
    # the inner loop's pStored/shadow decls live inside the outer body,
    # immediately before the inner loop, so each outer pass re-zeroes them
    inner_idx = next(
        idx for idx, s in enumerate(outer.body.stmts) if isinstance(s, While)
    )
    prior = [s.name for s in outer.body.stmts[:inner_idx] if isinstance(s, Decl) and s.instr]
    inner_site = ip.site_for(1)
    assert inner_site.pstored in prior
    assert all(sh in prior for sh in inner_site.shadows.values())


def test_loop_free_program_unchanged():
    src = "int main(void) { int x = 1; if (x) { x = 2; } return x; }"
    ip = instrument(src)
    assert ip.sites == []
    assert ast_equal(ip.program, brace(parse(src, "t.c")))


def test_strip_gadgets_inverts_instrumentation():
    for name, src in corpus_sources().items():
        p = parse(src, name)
        ip = insert_rsi(p)
        assert ast_equal(strip_gadgets(ip.program), brace(p)), name
        assert ast_equal(ip.base, brace(p)), name


def test_strip_markers_keeps_gadget():
    ip = instrument(COUNTER)
    q = strip_markers(ip.program)
    text = unparse(q)
    assert "printf" not in text
    assert "pStored0" in text and "flag0" in text
    # stripping markers then gadgets still recovers the original
    assert ast_equal(strip_gadgets(q), ip.base)


def test_shadow_types_match_state_vars():
    src = """
    int main(void) {
        unsigned char u = 0;
        long big = 0;
        while (u < 10) {
            u = u + 1;
            big = big + u;
        }
        return 0;
    }
    """
    ip = instrument(src)
    text = unparse(ip.program)
    assert "unsigned char ou = 0;" in text
    assert "long obig = 0;" in text


def test_instrument_does_not_mutate_input():
    p = parse(COUNTER, "t.c")
    before = unparse(brace(p))
    insert_rsi(p)
    assert unparse(brace(p)) == before
