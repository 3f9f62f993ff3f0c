"""Schedule-driven checking: try growing unwind bounds, SAT first.

One check() call owns a wall-clock budget T. The embedded SAT route gets
T/2 and walks the unwind schedule; every unsat answer certifies "no
recurrence within k iterations" and moves to the next bound. The first
sat answer stops everything: the model is replayed into a lasso witness,
validated, and reported as non-termination. If the SAT route times out
or fails, the external SMT route takes over with T/2 plus whatever the
SAT route left unused, resuming at the first bound strictly above the
largest one already certified so no work is repeated.

A program with no loops terminates outright (there is no recursion in
the input language), so it is reported without any solver call.
"""

from __future__ import annotations

import json
import shlex
import subprocess
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

from .bitblast import blast_vc, decode_model
from .frontend import FrontendError, check_supported, inline_program, parse
from .instrument import InstrumentedProgram, insert_rsi
from .nodes import Program
from .satcore import solve as sat_solve
from .unwind_encode import VC, build_vc, emit_smt2, parse_smt_output
from .witness import (
    ExtractionError,
    Witness,
    build_witness,
    extract_trace,
    validate_witness,
)

DEFAULT_SCHEDULE = (2, 3, 4, 10, 12, 20, 40, 100, 1000)
DEFAULT_BUDGET = 420.0


@dataclass
class BackendOutcome:
    status: str  # sat | unsat | timeout | error
    model: Optional[dict[str, int]] = None
    detail: str = ""
    elapsed: float = 0.0


class SatBackend:
    """In-process route: bit-blast the formula and run the CDCL core."""

    name = "sat"

    def __init__(self, *, seed: int = 0, clock: Callable[[], float] = time.monotonic):
        self.seed = seed
        self.clock = clock

    def solve_vc(self, vc: VC, budget: float) -> BackendOutcome:
        blasted = blast_vc(vc)
        r = sat_solve(blasted.cnf, deadline=self.clock() + budget, clock=self.clock, seed=self.seed)
        if r.status == "sat":
            return BackendOutcome("sat", decode_model(r.model, blasted.varmap))
        if r.status == "unsat":
            return BackendOutcome("unsat")
        return BackendOutcome("timeout")


class SmtBackend:
    """External route: pipe an SMT-LIB2 script into the configured command."""

    name = "smt"

    def __init__(self, command):
        self.argv = shlex.split(command) if isinstance(command, str) else list(command)

    def solve_vc(self, vc: VC, budget: float) -> BackendOutcome:
        script = emit_smt2(vc)
        try:
            proc = subprocess.run(
                self.argv,
                input=script,
                capture_output=True,
                text=True,
                timeout=max(budget, 0.05),
            )
        except subprocess.TimeoutExpired:
            return BackendOutcome("timeout")
        except OSError as e:
            return BackendOutcome("error", detail=str(e))
        status, model = parse_smt_output(proc.stdout)
        if status == "sat":
            return BackendOutcome("sat", model)
        if status == "unsat":
            return BackendOutcome("unsat")
        captured = (proc.stdout + proc.stderr).strip()
        return BackendOutcome("error", detail=captured[-2000:] or f"exit status {proc.returncode}")


def run_backend(backend, ip: InstrumentedProgram, k: int, budget: float,
                clock: Callable[[], float] = time.monotonic) -> tuple[BackendOutcome, VC]:
    """Encode at bound k and dispatch; elapsed covers encoding and solving."""
    t0 = clock()
    vc = build_vc(ip.program, k)
    out = backend.solve_vc(vc, budget)
    out.elapsed = clock() - t0
    return out, vc


@dataclass
class PhaseCall:
    phase: str
    bound: int
    outcome: str
    elapsed: float


@dataclass
class Verdict:
    kind: str  # NonTerminating | BoundedNoRecurrence | TriviallyTerminating | Unknown
    bound: Optional[int] = None
    max_validated: int = 0
    reason: Optional[str] = None
    detail: Optional[str] = None
    witness: Optional[Witness] = None
    elapsed: float = 0.0
    phase_log: list[PhaseCall] = field(default_factory=list)


EXIT_CODES = {
    "NonTerminating": 10,
    "BoundedNoRecurrence": 0,
    "TriviallyTerminating": 0,
    "Unknown": 2,
}


@dataclass
class CheckConfig:
    schedule: tuple[int, ...] = DEFAULT_SCHEDULE
    budget: float = DEFAULT_BUDGET
    backends: tuple[str, ...] = ("sat", "smt")
    smt_command: Optional[str] = None
    seed: int = 0
    clock: Callable[[], float] = time.monotonic
    # tests inject scripted backends here, keyed by phase name
    backend_overrides: dict = field(default_factory=dict)


def _make_backend(name: str, cfg: CheckConfig):
    if name in cfg.backend_overrides:
        return cfg.backend_overrides[name]
    if name == "sat":
        return SatBackend(seed=cfg.seed, clock=cfg.clock)
    if name == "smt":
        if not cfg.smt_command:
            return None
        return SmtBackend(cfg.smt_command)
    raise ValueError(f"unknown backend {name!r}")


def check(p: Program, config: Optional[CheckConfig] = None) -> Verdict:
    """Run the full pipeline on a parsed program and return the verdict."""
    cfg = config or CheckConfig()
    clock = cfg.clock
    t_start = clock()
    log: list[PhaseCall] = []

    def done(v: Verdict) -> Verdict:
        v.elapsed = clock() - t_start
        v.phase_log = log
        return v

    try:
        q = inline_program(check_supported(p))
    except FrontendError as e:
        return done(Verdict("Unknown", reason="unsupported-input", detail=str(e)))
    ip = insert_rsi(q)
    if not ip.sites:
        return done(Verdict("TriviallyTerminating"))

    schedule = list(cfg.schedule)
    assert schedule and all(b > 0 for b in schedule), "schedule must be positive"
    assert all(a < b for a, b in zip(schedule, schedule[1:])), "schedule must increase"
    phases = list(cfg.backends)
    assert phases, "at least one backend required"

    half = cfg.budget / 2
    max_validated = 0
    idx = 0
    leftover = 0.0
    ended_on = "timeout"
    last_detail = ""
    for pos, phase in enumerate(phases):
        backend = _make_backend(phase, cfg)
        if backend is None:
            return done(Verdict("Unknown", max_validated=max_validated,
                                reason="no-smt-backend"))
        remaining = cfg.budget if len(phases) == 1 else (half if pos == 0 else half + leftover)
        # never repeat a bound an earlier phase already certified
        while idx < len(schedule) and schedule[idx] <= max_validated:
            idx += 1
        while idx < len(schedule) and remaining > 0:
            k = schedule[idx]
            out, vc = run_backend(backend, ip, k, remaining, clock)
            remaining -= out.elapsed
            log.append(PhaseCall(phase, k, out.status, out.elapsed))
            if out.status == "sat":
                try:
                    w = build_witness(extract_trace(out.model or {}, vc, ip), ip)
                except ExtractionError as e:
                    return done(Verdict("Unknown", max_validated=max_validated,
                                        reason="witness-validation-failed", detail=str(e)))
                vr = validate_witness(ip.base, w)
                if not vr.ok:
                    return done(Verdict("Unknown", max_validated=max_validated,
                                        reason="witness-validation-failed", detail=vr.reason))
                return done(Verdict("NonTerminating", bound=k,
                                    max_validated=max_validated, witness=w))
            if out.status == "unsat":
                max_validated = k
                idx += 1
                continue
            ended_on = out.status  # timeout or error: hand off to the next phase
            last_detail = out.detail
            break
        else:
            ended_on = "timeout"  # budget drained between calls
        if idx >= len(schedule):
            return done(Verdict("BoundedNoRecurrence", bound=max_validated,
                                max_validated=max_validated))
        leftover = remaining

    if ended_on == "error":
        return done(Verdict("Unknown", max_validated=max_validated,
                            reason=f"{phases[-1]}-backend-error",
                            detail=last_detail or None))
    return done(Verdict("Unknown", max_validated=max_validated, reason="budget-exhausted"))


def check_source(source: str, name: str, config: Optional[CheckConfig] = None) -> Verdict:
    """check() on raw text; parse diagnostics become an Unknown verdict."""
    try:
        p = parse(source, name)
    except FrontendError as e:
        return Verdict("Unknown", reason="unsupported-input", detail=str(e))
    return check(p, config)


def verdict_json(v: Verdict, witness_path: Optional[str] = None) -> str:
    """The single-object report check prints on stdout."""
    doc = {
        "verdict": v.kind,
        "bound": v.bound,
        "maxValidatedBound": v.max_validated,
        "reason": v.reason,
        "witnessPath": witness_path,
        "elapsedSeconds": round(v.elapsed, 3),
        "phaseLog": [
            {
                "phase": c.phase,
                "bound": c.bound,
                "outcome": c.outcome,
                "elapsedSeconds": round(c.elapsed, 3),
            }
            for c in v.phase_log
        ],
    }
    if v.detail:
        doc["detail"] = v.detail
    return json.dumps(doc, indent=2) + "\n"
