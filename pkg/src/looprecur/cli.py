"""Command-line entry points.

    looprecur check FILE        full analysis, JSON verdict on stdout
    looprecur instrument FILE   emit the gadget-instrumented source
    looprecur encode FILE -k K  emit the bound-k verification condition
    looprecur sat FILE.cnf      run the internal CDCL solver on DIMACS input
    looprecur run FILE          interpret a program against an input tape
    looprecur bench DIR         verdict CSV over a directory of programs

Every flag can also come from a `--config` file of key=value lines (keys are
the long flag names), then from the environment (`LOOPRECUR_SMT_CMD` backs
`--smt-cmd`), then from the built-in default. Command line wins.

Exit codes for `check`: 10 non-terminating, 0 bounded-no-recurrence or
trivially terminating, 2 unknown, 1 input error. `sat` follows the DIMACS
convention: 10 satisfiable, 20 unsatisfiable, 0 undecided within budget.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import subprocess
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .bitblast import blast_vc, emit_dimacs
from .driver import (
    DEFAULT_BUDGET,
    DEFAULT_SCHEDULE,
    EXIT_CODES,
    CheckConfig,
    check_source,
    verdict_json,
)
from .frontend import FrontendError, check_supported, inline_program, parse
from .instrument import insert_rsi, strip_markers
from .interp import run as interp_run
from .normalize import brace, unparse
from .satcore import parse_dimacs, solve
from .unwind_encode import build_vc, emit_smt2
from .witness import to_graphml
from .witness import to_json as witness_to_json

SMT_CMD_ENV = "LOOPRECUR_SMT_CMD"


def _fail(msg: str) -> SystemExit:
    return SystemExit(f"looprecur: {msg}")


def load_config(path: str) -> dict[str, str]:
    """key=value lines; blank lines, #/; comments, [sections] are skipped."""
    out: dict[str, str] = {}
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise _fail(f"cannot read config: {e}")
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line[0] in "#;" or line.startswith("["):
            continue
        key, eq, val = line.partition("=")
        if not eq:
            raise _fail(f"bad config line: {raw!r}")
        out[key.strip()] = val.strip().strip('"')
    return out


class Options:
    """Resolves a flag: command line, then config file, then env, then default."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.cfg = load_config(args.config) if getattr(args, "config", None) else {}

    def get(self, name: str, default=None, cast=str, env: str | None = None):
        val = getattr(self.args, name.replace("-", "_"), None)
        if val is not None:
            return val
        if name in self.cfg:
            return self._cast(self.cfg[name], cast, name)
        if env and os.environ.get(env):
            return self._cast(os.environ[env], cast, name)
        return default

    def flag(self, name: str) -> bool:
        val = getattr(self.args, name.replace("-", "_"), None)
        if val is not None:
            return val
        if name in self.cfg:
            return self.cfg[name].lower() in ("1", "true", "yes", "on")
        return False

    @staticmethod
    def _cast(raw: str, cast, name: str):
        try:
            return cast(raw)
        except ValueError:
            raise _fail(f"bad value for {name}: {raw!r}")


def _read_file(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise _fail(str(e))


def _parse_unwinds(text: str) -> tuple[int, ...]:
    try:
        bounds = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise _fail(f"bad --unwinds: {text!r}")
    if not bounds or any(b < 1 for b in bounds):
        raise _fail("--unwinds needs positive bounds")
    if any(a >= b for a, b in zip(bounds, bounds[1:])):
        raise _fail("--unwinds must be strictly increasing")
    return bounds


def _parse_backends(text: str) -> tuple[str, ...]:
    names = tuple(x.strip() for x in text.split(","))
    if not names or any(n not in ("sat", "smt") for n in names) or len(set(names)) != len(names):
        raise _fail(f"bad --backend: {text!r} (want sat, smt, or sat,smt)")
    return names


def _check_config(opt: Options) -> CheckConfig:
    unwinds = opt.get("unwinds")
    timeout = opt.get("timeout", DEFAULT_BUDGET, float)
    if timeout <= 0:
        raise _fail("--timeout must be positive")
    return CheckConfig(
        schedule=_parse_unwinds(unwinds) if unwinds else DEFAULT_SCHEDULE,
        budget=timeout,
        backends=_parse_backends(opt.get("backend", "sat,smt")),
        smt_command=opt.get("smt-cmd", None, env=SMT_CMD_ENV),
        seed=opt.get("seed", 0, int),
    )


def _write_out(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


# ===== COMMANDS =====


def cmd_check(args) -> int:
    opt = Options(args)
    cfg = _check_config(opt)
    source = _read_file(args.file)
    v = check_source(source, args.file, cfg)
    if v.reason == "unsupported-input" and v.detail:
        print(v.detail, file=sys.stderr)
    witness_path = None
    if v.witness is not None:
        jpath = opt.get("witness")
        gpath = opt.get("witness-graphml")
        if jpath:
            Path(jpath).write_text(witness_to_json(v.witness))
            witness_path = jpath
        if gpath:
            Path(gpath).write_text(to_graphml(v.witness))
    sys.stdout.write(verdict_json(v, witness_path))
    return EXIT_CODES[v.kind]


def cmd_instrument(args) -> int:
    opt = Options(args)
    source = _read_file(args.file)
    try:
        ip = insert_rsi(parse(source, args.file))
    except FrontendError as e:
        print(e, file=sys.stderr)
        return 1
    prog = strip_markers(ip.program) if opt.flag("strip-markers") else ip.program
    _write_out(unparse(prog), opt.get("output"))
    return 0


def cmd_encode(args) -> int:
    opt = Options(args)
    source = _read_file(args.file)
    k = opt.get("unwind", None, int)
    if k is None or k < 1:
        raise _fail("encode needs -k K with K >= 1")
    try:
        ip = insert_rsi(inline_program(check_supported(parse(source, args.file))))
    except FrontendError as e:
        print(e, file=sys.stderr)
        return 1
    vc = build_vc(ip.program, k)
    fmt = opt.get("format", "smt2")
    if fmt == "smt2":
        text = emit_smt2(vc)
    elif fmt == "dimacs":
        blasted = blast_vc(vc)
        text = emit_dimacs(blasted.cnf, blasted.varmap)
    else:
        raise _fail(f"bad --format: {fmt!r} (want smt2 or dimacs)")
    _write_out(text, opt.get("output"))
    return 0


def cmd_sat(args) -> int:
    opt = Options(args)
    text = _read_file(args.file)
    try:
        cnf = parse_dimacs(text)
    except ValueError as e:
        print(f"looprecur: {e}", file=sys.stderr)
        return 1
    budget = opt.get("budget", None, float)
    deadline = time.monotonic() + budget if budget is not None else None
    res = solve(cnf, deadline=deadline, seed=opt.get("seed", 0, int))
    if res.status == "sat":
        print("s SATISFIABLE")
        model = res.model or {}
        lits = [v if model.get(v, False) else -v for v in range(1, cnf.num_vars + 1)]
        for i in range(0, len(lits), 16):
            chunk = lits[i : i + 16]
            end = " 0" if i + 16 >= len(lits) else ""
            print("v " + " ".join(str(x) for x in chunk) + end)
        if not lits:
            print("v 0")
        return 10
    if res.status == "unsat":
        print("s UNSATISFIABLE")
        return 20
    print("s UNKNOWN")
    return 0


def cmd_run(args) -> int:
    opt = Options(args)
    source = _read_file(args.file)
    try:
        p = check_supported(parse(source, args.file))
    except FrontendError as e:
        print(e, file=sys.stderr)
        return 1
    values: list[int] = []
    inputs = opt.get("inputs")
    if inputs:
        doc = json.loads(_read_file(inputs))
        if isinstance(doc, dict):
            doc = doc.get("values")
        if not isinstance(doc, list) or not all(isinstance(x, int) for x in doc):
            raise _fail("--inputs wants a JSON list of ints (or {\"values\": [...]})")
        values = doc
    r = interp_run(brace(p), values, step_limit=opt.get("steps", None, int))
    report = {
        "status": r.status,
        "exitCode": r.exit_code,
        "steps": r.steps,
        "drawsUsed": len(r.draws),
    }
    if r.violated_loop is not None:
        report["violatedLoop"] = r.violated_loop
        report["violatedVisit"] = (r.violated_visit or 0) + 1  # visits are 1-based outside
    print(json.dumps(report, indent=2))
    return 0


# ===== BENCH =====

CSV_COLUMNS = ["name", "verdict", "bound", "maxValidatedBound", "time-seconds", "phase"]


def _bench_row(name, verdict, bound, max_validated, secs, phase):
    return {
        "name": name,
        "verdict": verdict,
        "bound": "" if bound is None else bound,
        "maxValidatedBound": max_validated,
        "time-seconds": f"{secs:.3f}",
        "phase": phase,
    }


def _bench_one(path: Path, cfg: CheckConfig, isolate: bool) -> dict:
    if isolate:
        return _bench_subprocess(path, cfg)
    t0 = time.monotonic()
    try:
        v = check_source(path.read_text(), path.name, cfg)
    except Exception as e:  # one bad file must not take down the harness
        return _bench_row(path.name, "Unknown", None, 0, time.monotonic() - t0, f"harness-error: {e}")
    phase = v.phase_log[-1].phase if v.phase_log else "none"
    return _bench_row(path.name, v.kind, v.bound, v.max_validated, v.elapsed, phase)


def _bench_subprocess(path: Path, cfg: CheckConfig) -> dict:
    argv = [
        sys.executable, "-m", "looprecur", "check", str(path),
        "--timeout", str(cfg.budget),
        "--unwinds", ",".join(str(b) for b in cfg.schedule),
        "--backend", ",".join(cfg.backends),
        "--seed", str(cfg.seed),
    ]
    if cfg.smt_command:
        argv += ["--smt-cmd", cfg.smt_command]
    t0 = time.monotonic()
    try:
        proc = subprocess.run(argv, capture_output=True, text=True, timeout=cfg.budget + 5)
    except subprocess.TimeoutExpired:
        return _bench_row(path.name, "Unknown", None, 0, time.monotonic() - t0, "harness-timeout")
    secs = time.monotonic() - t0
    try:
        doc = json.loads(proc.stdout)
    except ValueError:
        return _bench_row(path.name, "Unknown", None, 0, secs, "harness-error")
    phase = doc["phaseLog"][-1]["phase"] if doc.get("phaseLog") else "none"
    return _bench_row(path.name, doc["verdict"], doc.get("bound"),
                      doc.get("maxValidatedBound", 0), secs, phase)


def cmd_bench(args) -> int:
    opt = Options(args)
    cfg = _check_config(opt)
    bench_dir = Path(args.dir)
    if not bench_dir.is_dir():
        raise _fail(f"not a directory: {bench_dir}")
    files = sorted(bench_dir.glob("*.c"))

    manifest = None
    mpath = opt.get("manifest")
    if mpath is None and (bench_dir / "expected.json").exists():
        mpath = str(bench_dir / "expected.json")
    if mpath:
        try:
            manifest = json.loads(_read_file(mpath))
        except ValueError as e:
            raise _fail(f"bad manifest {mpath}: {e}")

    isolate = opt.flag("isolate")
    jobs = opt.get("jobs", 1, int)
    rows: list[dict | None] = [None] * len(files)
    if jobs > 1 and files:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futs = {pool.submit(_bench_one, f, cfg, isolate): i for i, f in enumerate(files)}
            for fut, i in futs.items():
                rows[i] = fut.result()
    else:
        for i, f in enumerate(files):
            rows[i] = _bench_one(f, cfg, isolate)

    solved = sum(1 for r in rows if r["verdict"] != "Unknown")
    total_secs = sum(float(r["time-seconds"]) for r in rows)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS)
    writer.writeheader()
    for r in rows:
        writer.writerow(r)
    if files:
        writer.writerow(_bench_row("summary", f"{solved}/{len(files)} solved",
                                   None, "", total_secs, ""))
    _write_out(buf.getvalue(), opt.get("output"))

    problems = []
    if manifest:
        by_name = {r["name"]: r for r in rows}
        for name, want in sorted(manifest.items()):
            want_verdict = want if isinstance(want, str) else want.get("verdict")
            want_bound = None if isinstance(want, str) else want.get("bound")
            row = by_name.get(name)
            if row is None:
                problems.append(f"{name}: listed in manifest but not in {bench_dir}")
            elif row["verdict"] != want_verdict:
                problems.append(f"{name}: expected {want_verdict}, got {row['verdict']}")
            elif want_bound is not None and row["bound"] != want_bound:
                problems.append(f"{name}: expected bound {want_bound}, got {row['bound']}")
    for pr in problems:
        print(f"bench: mismatch: {pr}", file=sys.stderr)
    return 1 if problems else 0


# ===== PARSER =====


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="looprecur",
        description="Non-termination checker: recurrent-state instrumentation "
                    "discharged by bounded model checking.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def add_config(sp):
        sp.add_argument("--config", metavar="FILE", help="key=value file supplying flag defaults")

    def add_check_flags(sp):
        sp.add_argument("--timeout", type=float, metavar="SECONDS",
                        help=f"total budget (default {DEFAULT_BUDGET:g})")
        sp.add_argument("--unwinds", metavar="CSV",
                        help="unwind bound schedule (default "
                             + ",".join(str(b) for b in DEFAULT_SCHEDULE) + ")")
        sp.add_argument("--backend", metavar="NAMES", help="sat, smt, or sat,smt (default sat,smt)")
        sp.add_argument("--smt-cmd", metavar="CMD",
                        help=f"command reading SMT-LIB2 on stdin (env {SMT_CMD_ENV})")
        sp.add_argument("--seed", type=int, metavar="N", help="solver seed (default 0)")

    c = sub.add_parser("check", help="analyze a program and print a JSON verdict")
    c.add_argument("file")
    add_check_flags(c)
    c.add_argument("--witness", metavar="PATH", help="write the witness JSON here")
    c.add_argument("--witness-graphml", metavar="PATH", help="write the witness GraphML here")
    add_config(c)
    c.set_defaults(func=cmd_check)

    i = sub.add_parser("instrument", help="emit the instrumented source")
    i.add_argument("file")
    i.add_argument("-o", "--output", metavar="PATH", help="write here instead of stdout")
    i.add_argument("--strip-markers", action="store_true", default=None,
                   help="omit the loop marker statements")
    add_config(i)
    i.set_defaults(func=cmd_instrument)

    e = sub.add_parser("encode", help="emit the bound-k verification condition")
    e.add_argument("file")
    e.add_argument("-k", "--unwind", type=int, metavar="K", help="unwind bound")
    e.add_argument("--format", choices=["smt2", "dimacs"], default=None,
                   help="output format (default smt2)")
    e.add_argument("-o", "--output", metavar="PATH", help="write here instead of stdout")
    add_config(e)
    e.set_defaults(func=cmd_encode)

    s = sub.add_parser("sat", help="solve a DIMACS CNF file")
    s.add_argument("file")
    s.add_argument("--budget", type=float, metavar="SECONDS", help="give up after this long")
    s.add_argument("--seed", type=int, metavar="N", help="solver seed (default 0)")
    add_config(s)
    s.set_defaults(func=cmd_sat)

    r = sub.add_parser("run", help="interpret a program against an input tape")
    r.add_argument("file")
    r.add_argument("--inputs", metavar="JSON", help="input tape file: [1,2,...] or {\"values\": [...]}")
    r.add_argument("--steps", type=int, metavar="N", help="stop after N statements")
    add_config(r)
    r.set_defaults(func=cmd_run)

    b = sub.add_parser("bench", help="run check over a directory, emit a verdict CSV")
    b.add_argument("dir")
    add_check_flags(b)
    b.add_argument("--manifest", metavar="PATH",
                   help="expected-verdict JSON (default DIR/expected.json if present)")
    b.add_argument("--jobs", type=int, metavar="N", help="parallel workers (default 1)")
    b.add_argument("--isolate", action="store_true", default=None,
                   help="run each file in its own process")
    b.add_argument("-o", "--output", metavar="PATH", help="write the CSV here instead of stdout")
    add_config(b)
    b.set_defaults(func=cmd_bench)

    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
