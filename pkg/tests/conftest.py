"""Shared fixtures: corpus access, a controllable clock, scripted backends."""

from __future__ import annotations

import sys
from pathlib import Path

import pytest

from looprecur.driver import BackendOutcome

REPO = Path(__file__).resolve().parent.parent
CORPUS = REPO / "corpus"
FAKESMT = Path(__file__).resolve().parent / "fakesmt.py"

SPIN = """
int main(void) {
    while (1) {
    }
    return 0;
}
"""

FOR_BOUNDED = """
int main(void) {
    int i;
    for (i = 0; i < 10; i++) {
    }
    return 0;
}
"""

U8_WRAP = """
int main(void) {
    unsigned char x = 0;
    while (x < 300) {
        x++;
    }
    return 0;
}
"""


def corpus_files() -> list[Path]:
    files = sorted(CORPUS.glob("*.c"))
    assert len(files) >= 12, "bundled corpus went missing"
    return files


def corpus_sources() -> dict[str, str]:
    return {f.name: f.read_text() for f in corpus_files()}


def fakesmt_cmd(mode: str, *args: str) -> str:
    return " ".join([sys.executable, str(FAKESMT), mode, *args])


class FakeClock:
    """Deterministic monotonic clock; tests advance it by hand."""

    def __init__(self, start: float = 100.0):
        self.t = start

    def __call__(self) -> float:
        return self.t

    def advance(self, dt: float) -> None:
        self.t += dt


class ScriptedBackend:
    """Backend double that replays (status, seconds[, model]) outcomes and
    records every call's (bound, budget)."""

    def __init__(self, script, clock: FakeClock):
        self.script = list(script)
        self.clock = clock
        self.calls: list[tuple[int, float]] = []

    def solve_vc(self, vc, budget: float) -> BackendOutcome:
        self.calls.append((vc.bound, budget))
        assert self.script, "backend called more times than scripted"
        entry = self.script.pop(0)
        status, secs = entry[0], entry[1]
        model = entry[2] if len(entry) > 2 else None
        self.clock.advance(secs)
        return BackendOutcome(status, model=model)


@pytest.fixture
def fake_clock():
    return FakeClock()
