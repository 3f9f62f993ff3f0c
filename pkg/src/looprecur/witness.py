"""Lasso witnesses: model decoding, replay validation, JSON and GraphML.

A satisfying model of the unwound formula fixes every nondet draw, so the
shortest path to a defensible non-termination verdict is to replay those
draws through the concrete interpreter and read the lasso off the run:
the violated probe gives the recurrence visit j', the last body entry
where the gadget's pStored was still clear gives the store visit j, and
the user-level draws partition into a stem (before visit j) and a cycle
(between j and j').

Soundness of the lasso claim: the stored state covers every variable the
loop reads or writes, so when the valuation at visit j' matches visit j
and the cycle's inputs are repeated, the execution from j' retraces the
same path and returns to the same state. Validation checks exactly that
on the uninstrumented program: replay stem + cycle + cycle and compare
the claimed state at visits j, j', and j' + (j' - j).

Visit numbering in every exported record is 1-based: visit 1 is the
first time a loop body is entered.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional
from xml.etree import ElementTree as ET

from .instrument import InstrumentedProgram, LoopSite
from .interp import DrawEvent, VisitEvent, run
from .nodes import Program
from .normalize import brace
from .terms import eval_term
from .unwind_encode import VC

REPLAY_STEP_LIMIT = 10**6


class ExtractionError(Exception):
    """Replaying a model diverged from the encoding: an encoder bug."""


@dataclass
class Trace:
    """A decoded counterexample: the path one satisfying model fixes.

    valuations[v-1] is the violated loop's state at body-entry visit v,
    values canonical for the declared type (signed types read negative).
    """

    loop_id: int
    store_visit: int  # j, 1-based
    recur_visit: int  # j'
    choices: list[tuple[str, int, bool]]  # (symbol, raw value, gadget draw)
    valuations: list[dict[str, int]]
    stem_inputs: list[int] = field(default_factory=list)
    cycle_inputs: list[int] = field(default_factory=list)


@dataclass
class Witness:
    """A replayable non-termination lasso for one loop."""

    loop_id: int
    file: str
    line: int
    function: str
    store_visit: int
    recur_visit: int
    stem: list[int]
    cycle_inputs: list[int]
    cycle: list[dict[str, int]]  # state at visits j .. j'-1
    recurrent_state: dict[str, int]


@dataclass
class ValidationResult:
    ok: bool
    reason: Optional[str] = None
    variable: Optional[str] = None


def _site_for(ip: InstrumentedProgram, loop_id: int) -> LoopSite:
    for s in ip.sites:
        if s.loop_id == loop_id:
            return s
    raise ExtractionError(f"no instrumented site for loop {loop_id}")


def extract_trace(model: dict[str, int], vc: VC, ip: InstrumentedProgram) -> Trace:
    """Decode a satisfying assignment into the concrete violating run.

    The model fixes a value for every draw site; sites whose path guard
    is false under the model were never reached and are dropped from the
    input tape. Replay must end in a violated recurrence probe, and the
    stored state (the last visit with pStored still clear) must match
    the state at the violation; anything else means the bit-level
    encoding and the interpreter disagree.
    """
    env = {s.name: model.get(s.name, 0) for s in vc.sites}
    memo: dict = {}
    reached = [s for s in vc.sites if eval_term(s.guard, env, memo) == 1]
    tape = [env[s.name] for s in reached]

    first = run(ip.program, tape, asserts_enabled=True, step_limit=REPLAY_STEP_LIMIT)
    if first.status != "assert-violated" or first.violated_loop is None:
        raise ExtractionError(f"model replay ended with {first.status}, not a violated probe")
    site = _site_for(ip, first.violated_loop)

    watch = list(site.state_vars) + [site.pstored]
    res = run(
        ip.program,
        tape,
        asserts_enabled=True,
        step_limit=REPLAY_STEP_LIMIT,
        watch_loop=site.loop_id,
        watch_vars=watch,
    )
    for i, ev in enumerate(res.draws):
        if i >= len(reached) or ev.ty.width != reached[i].ty.width:
            raise ExtractionError("replay consumed draws out of step with the encoding")

    snaps = dict(res.snapshots)
    jp0 = res.violated_visit
    stored0 = [v for v in snaps if v <= jp0 and snaps[v][site.pstored] == 0]
    if not stored0:
        raise ExtractionError("violated probe with no preceding store visit")
    j0 = max(stored0)

    valuations = [
        {name: snaps[v][name] for name in site.state_vars} for v in range(jp0 + 1)
    ]
    if valuations[j0] != valuations[jp0]:
        raise ExtractionError("stored state does not match the violation state")

    # chronological events give the stem/cycle split of the user inputs
    stem: list[int] = []
    cycle: list[int] = []
    visit = None
    for ev in res.events:
        if isinstance(ev, VisitEvent) and ev.loop_id == site.loop_id:
            visit = ev.visit
            if visit >= jp0:
                break
        elif isinstance(ev, DrawEvent) and not ev.instr:
            # the converted value, not the raw model word: replays the same
            # and reads with the sign the program actually saw
            if visit is None or visit < j0:
                stem.append(ev.value)
            else:
                cycle.append(ev.value)

    choices = [(s.name, tape[i], s.instr) for i, s in enumerate(reached[: len(res.draws)])]
    return Trace(site.loop_id, j0 + 1, jp0 + 1, choices, valuations, stem, cycle)


def build_witness(t: Trace, ip: InstrumentedProgram) -> Witness:
    """Project a trace onto the replayable lasso record."""
    site = _site_for(ip, t.loop_id)
    cycle = t.valuations[t.store_visit - 1 : t.recur_visit - 1]
    return Witness(
        loop_id=t.loop_id,
        file=ip.program.source_name,
        line=site.loc.line if site.loc is not None else 0,
        function=site.function,
        store_visit=t.store_visit,
        recur_visit=t.recur_visit,
        stem=list(t.stem_inputs),
        cycle_inputs=list(t.cycle_inputs),
        cycle=cycle,
        recurrent_state=dict(cycle[0]) if cycle else {},
    )


def validate_witness(p: Program, w: Witness, *, step_limit: int = REPLAY_STEP_LIMIT) -> ValidationResult:
    """Replay the lasso on the uninstrumented program and check it closes.

    Runs brace(p) on stem + cycle-inputs + cycle-inputs and compares the
    state claimed by the witness against the replayed valuations at
    visits j, j', and j' + (j' - j). Asserts stay disabled: they are
    verification directives, not behavior, and the instrumented search
    explored paths beyond them.
    """
    if not (1 <= w.store_visit < w.recur_visit):
        return ValidationResult(False, "malformed-witness: store/recurrence visits out of order")
    if len(w.cycle) != w.recur_visit - w.store_visit:
        return ValidationResult(False, "malformed-witness: cycle length differs from j' - j")

    state_vars = list(w.recurrent_state)
    tape = list(w.stem) + list(w.cycle_inputs) + list(w.cycle_inputs)
    period = w.recur_visit - w.store_visit
    need = w.recur_visit + period - 1  # 0-based index of the third anchor
    res = run(
        brace(p),
        tape,
        asserts_enabled=False,
        step_limit=step_limit,
        watch_loop=w.loop_id,
        watch_vars=state_vars,
        visit_limit=need + 1,
    )
    snaps = dict(res.snapshots)
    if need not in snaps:
        return ValidationResult(False, f"replay ended ({res.status}) before visit {need + 1}")

    def compare(visit0: int, claim: dict[str, int]) -> Optional[str]:
        got = snaps[visit0]
        for name in state_vars:
            if got.get(name, 0) != claim[name]:
                return name
        return None

    for t in range(period):
        bad = compare(w.store_visit - 1 + t, w.cycle[t])
        if bad is not None:
            return ValidationResult(False, f"cycle valuation mismatch at visit {w.store_visit + t}", bad)
    for anchor in (w.store_visit - 1, w.recur_visit - 1, need):
        bad = compare(anchor, w.recurrent_state)
        if bad is not None:
            return ValidationResult(False, f"recurrent state not reproduced at visit {anchor + 1}", bad)
    return ValidationResult(True)


# ---------------------------------------------------------------------------
# serialization

WITNESS_SCHEMA_VERSION = 1


def to_json(w: Witness) -> str:
    """Versioned JSON rendering; from_json inverts it exactly."""
    doc = {
        "version": WITNESS_SCHEMA_VERSION,
        "loopId": w.loop_id,
        "location": {"file": w.file, "line": w.line},
        "function": w.function,
        "storeVisit": w.store_visit,
        "recurVisit": w.recur_visit,
        "stem": w.stem,
        "cycleInputs": w.cycle_inputs,
        "cycle": w.cycle,
        "recurrentState": w.recurrent_state,
    }
    return json.dumps(doc, indent=2) + "\n"


def from_json(text: str) -> Witness:
    doc = json.loads(text)
    if doc.get("version") != WITNESS_SCHEMA_VERSION:
        raise ValueError(f"unsupported witness version {doc.get('version')!r}")
    return Witness(
        loop_id=doc["loopId"],
        file=doc["location"]["file"],
        line=doc["location"]["line"],
        function=doc["function"],
        store_visit=doc["storeVisit"],
        recur_visit=doc["recurVisit"],
        stem=list(doc["stem"]),
        cycle_inputs=list(doc["cycleInputs"]),
        cycle=[dict(v) for v in doc["cycle"]],
        recurrent_state=dict(doc["recurrentState"]),
    )


_GRAPHML_NS = "http://graphml.graphdrawing.org/xmlns"


def _valuation_text(valuation: dict[str, int]) -> str:
    return " && ".join(f"{name} == {value}" for name, value in valuation.items())


def to_graphml(w: Witness) -> str:
    """Simplified violation-witness graph: a stem path from the entry node
    to the cycle head, then one edge per cycle visit returning to it."""
    ET.register_namespace("", _GRAPHML_NS)
    root = ET.Element(f"{{{_GRAPHML_NS}}}graphml")
    for kid, kfor, kname, ktype in (
        ("entry", "node", "isEntryNode", "boolean"),
        ("recur", "node", "isRecurrencePoint", "boolean"),
        ("assumption", "edge", "assumption", "string"),
    ):
        key = ET.SubElement(root, f"{{{_GRAPHML_NS}}}key")
        key.set("id", kid)
        key.set("for", kfor)
        key.set("attr.name", kname)
        key.set("attr.type", ktype)
    graph = ET.SubElement(root, f"{{{_GRAPHML_NS}}}graph")
    graph.set("id", "lasso")
    graph.set("edgedefault", "directed")

    def node(nid: str, mark: Optional[str] = None) -> str:
        n = ET.SubElement(graph, f"{{{_GRAPHML_NS}}}node")
        n.set("id", nid)
        if mark is not None:
            d = ET.SubElement(n, f"{{{_GRAPHML_NS}}}data")
            d.set("key", mark)
            d.text = "true"
        return nid

    edges: list[tuple[str, str, str]] = []
    entry = node("entry", "entry")
    prev = entry
    for i, v in enumerate(w.stem):
        nxt = node(f"stem{i + 1}")
        edges.append((prev, nxt, f"nd{i} == {v}"))
        prev = nxt
    head = node("cycle1", "recur")
    edges.append((prev, head, _valuation_text(w.recurrent_state)))
    period = w.recur_visit - w.store_visit
    prev = head
    for t in range(1, period):
        nxt = node(f"cycle{t + 1}")
        edges.append((prev, nxt, _valuation_text(w.cycle[t])))
        prev = nxt
    edges.append((prev, head, _valuation_text(w.recurrent_state)))

    for src, dst, assumption in edges:
        e = ET.SubElement(graph, f"{{{_GRAPHML_NS}}}edge")
        e.set("source", src)
        e.set("target", dst)
        if assumption:
            d = ET.SubElement(e, f"{{{_GRAPHML_NS}}}data")
            d.set("key", "assumption")
            d.text = assumption
    ET.indent(root)
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(root, encoding="unicode") + "\n"
