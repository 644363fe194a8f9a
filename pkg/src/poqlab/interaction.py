"""Lockstep coupling of one verifier and one prover through a single shared
communication cell.

Scheduling is strict alternation: each global round is one verifier step
followed by one prover step.  When the verifier enters a communicating state
it writes its symbol and marks the cell fresh; the prover's next step must
consume the fresh symbol and write a response, otherwise the verifier
rejects at the start of its following step.  Provers have no verdicts of
their own; an interaction ends only with a verifier verdict or the step cap.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction

from .classical import (
    _SCALE,
    BLANK,
    MalformedMachineError,
    Verdict,
    _compile_rows,
    tape_of,
)
CELL_BLANK = "_"


class ConfigurationError(ValueError):
    """Verifier and prover disagree on the shared alphabets."""


class DisciplineError(RuntimeError):
    """A prover wrote to the cell without a fresh verifier symbol."""


@dataclass(frozen=True)
class InteractionOutcome:
    verdict: Verdict
    verifier_steps: int
    prover_steps: int
    messages_exchanged: int
    verifier_peak_space: int = 0
    prover_peak_space: int = 0


@dataclass(frozen=True)
class TranscriptEntry:
    step: int
    actor: str  # "V" or "P"
    symbol: str


@dataclass
class VerifierStepResult:
    verdict: Verdict | None = None
    message: str | None = None


def run_interaction(
    verifier,
    prover,
    w: str,
    rng,
    step_cap: int = 10**6,
    record=None,
) -> InteractionOutcome:
    """Drive one interaction to a verdict or the cap.

    verifier/prover are spec objects exposing .session(w) plus alphabet
    attributes; record, when given, is a list receiving TranscriptEntry rows.
    """
    if prover.input_alphabet is not None and set(verifier.input_alphabet) != set(
        prover.input_alphabet
    ):
        raise ConfigurationError("input alphabets differ")
    if prover.comm_alphabet is not None and set(verifier.comm_alphabet) - set(
        prover.comm_alphabet
    ):
        raise ConfigurationError("communication alphabets differ")
    bad = set(w) - set(verifier.input_alphabet)
    if bad:
        raise ConfigurationError(f"input symbols {sorted(bad)} outside shared alphabet")

    vs = verifier.session(w)
    ps = prover.session(w)
    cell = CELL_BLANK
    awaiting = False  # verifier wrote; no prover response yet
    fresh: str | None = None
    messages = 0
    step = 0
    verdict = None
    while step < step_cap:
        step += 1
        # verifier's half of the round
        if awaiting:
            verdict = Verdict.REJECT  # prover stayed silent
            break
        res = vs.step(cell, rng)
        if res.verdict is not None:
            verdict = res.verdict
            break
        if res.message is not None:
            cell = res.message
            messages += 1
            awaiting = True
            fresh = res.message
            if record is not None:
                record.append(TranscriptEntry(step, "V", res.message))
        # prover's half
        reply = ps.step(fresh, rng)
        if fresh is not None:
            if reply is not None:
                cell = reply
                messages += 1
                awaiting = False
                if record is not None:
                    record.append(TranscriptEntry(step, "P", reply))
            fresh = None
        elif reply is not None:
            raise DisciplineError("prover wrote without a fresh verifier symbol")
    if verdict is None:
        verdict = Verdict.TIMEOUT
    return InteractionOutcome(
        verdict=verdict,
        verifier_steps=step,
        prover_steps=step - 1 if verdict is not Verdict.TIMEOUT else step,
        messages_exchanged=messages,
        verifier_peak_space=getattr(vs, "peak_space", 0),
        prover_peak_space=getattr(ps, "peak_space", 0),
    )


def transcript(verifier, prover, w, rng, step_cap: int = 10**6):
    """Ordered cell writes of one interaction: (step, actor, symbol)."""
    rows: list[TranscriptEntry] = []
    run_interaction(verifier, prover, w, rng, step_cap, record=rows)
    return rows


# --- table-driven machines ---------------------------------------------------


@dataclass
class TableVerifier:
    """Verifier given by explicit transition tables.

    transitions: (state, input symbol, work symbol, cell symbol) ->
    [(probability, (state', work write, input move, work move))].  Entering a
    state listed in emits writes its symbol to the cell.
    """

    name: str
    silent_states: list[str]
    com_states: list[str]
    emits: dict[str, str]  # communicating state -> symbol written on entry
    input_alphabet: list[str]
    work_alphabet: list[str]
    comm_alphabet: list[str]
    transitions: dict[tuple, list[tuple[Fraction, tuple]]]
    start: str
    accept: str
    reject: str

    def __post_init__(self):
        overlap = set(self.silent_states) & set(self.com_states)
        if overlap:
            raise MalformedMachineError(f"states both silent and communicating: {overlap}")
        for s in (self.start, self.accept, self.reject):
            if s not in self.silent_states:
                raise MalformedMachineError(f"{s!r} must be a silent state")
        for s in self.com_states:
            if s not in self.emits:
                raise MalformedMachineError(f"communicating state {s!r} emits nothing")
        for key, rows in self.transitions.items():
            total = sum(p for p, _ in rows)
            if total != 1:
                raise MalformedMachineError(f"row {key!r} sums to {total}")
        self._compiled = _compile_rows(self.transitions)

    def session(self, w: str):
        return _TableVerifierSession(self, w)


class _TableVerifierSession:
    def __init__(self, spec: TableVerifier, w: str):
        self.spec = spec
        self.tape = tape_of(w)
        self.state = spec.start
        self.input_head = 0
        self.work: dict[int, str] = {}
        self.work_head = 0
        self._touched: set[int] = set()
        self.peak_space = 0

    def step(self, cell: str, rng) -> VerifierStepResult:
        spec = self.spec
        key = (
            self.state,
            self.tape[self.input_head],
            self.work.get(self.work_head, BLANK),
            cell,
        )
        entry = spec._compiled.get(key)
        if entry is None:
            raise MalformedMachineError(f"verifier has no row for {key!r}")
        thresholds, outcomes = entry
        if thresholds is None:
            s2, w2, di, dw = outcomes[0]
        else:
            u = int(rng.integers(0, _SCALE, dtype="uint64"))
            s2, w2, di, dw = outcomes[bisect_right(thresholds, u)]
        if w2 != BLANK:
            self._touched.add(self.work_head)
            self.peak_space = len(self._touched)
        self.work[self.work_head] = w2
        self.state = s2
        self.input_head += di
        self.work_head += dw
        if s2 == spec.accept:
            return VerifierStepResult(verdict=Verdict.ACCEPT)
        if s2 == spec.reject:
            return VerifierStepResult(verdict=Verdict.REJECT)
        if s2 in spec.emits:
            return VerifierStepResult(message=spec.emits[s2])
        return VerifierStepResult()


@dataclass
class TableClassicalProver:
    """Work-tape prover given by explicit silent/communicating tables.

    silent: (state, input symbol, work symbol) -> [(p, (s', w', di, dw))]
    com:    (state, input symbol, work symbol, received) ->
            [(p, (s', w', reply, di, dw))]
    """

    name: str
    states: list[str]
    input_alphabet: list[str]
    work_alphabet: list[str]
    comm_alphabet: list[str]
    silent: dict[tuple, list[tuple[Fraction, tuple]]]
    com: dict[tuple, list[tuple[Fraction, tuple]]]
    start: str

    def __post_init__(self):
        for table in (self.silent, self.com):
            for key, rows in table.items():
                total = sum(p for p, _ in rows)
                if total != 1:
                    raise MalformedMachineError(f"row {key!r} sums to {total}")
        self._silent = _compile_rows(self.silent)
        self._com = _compile_rows(self.com)

    def session(self, w: str):
        return _TableClassicalProverSession(self, w)


class _TableClassicalProverSession:
    def __init__(self, spec: TableClassicalProver, w: str):
        self.spec = spec
        self.tape = tape_of(w)
        self.state = spec.start
        self.input_head = 0
        self.work: dict[int, str] = {}
        self.work_head = 0
        self._touched: set[int] = set()
        self.peak_space = 0

    def step(self, fresh: str | None, rng) -> str | None:
        spec = self.spec
        wsym = self.work.get(self.work_head, BLANK)
        sym = self.tape[self.input_head]
        if fresh is None:
            entry = spec._silent.get((self.state, sym, wsym))
            if entry is None:
                raise MalformedMachineError(
                    f"prover has no silent row for {(self.state, sym, wsym)!r}"
                )
            reply = None
        else:
            entry = spec._com.get((self.state, sym, wsym, fresh))
            if entry is None:
                raise MalformedMachineError(
                    f"prover has no com row for {(self.state, sym, wsym, fresh)!r}"
                )
        thresholds, outcomes = entry
        if thresholds is None:
            out = outcomes[0]
        else:
            u = int(rng.integers(0, _SCALE, dtype="uint64"))
            out = outcomes[bisect_right(thresholds, u)]
        if fresh is None:
            s2, w2, di, dw = out
        else:
            s2, w2, reply, di, dw = out
        if w2 != BLANK:
            self._touched.add(self.work_head)
            self.peak_space = len(self._touched)
        self.work[self.work_head] = w2
        self.state = s2
        self.input_head += di
        self.work_head += dw
        return reply


# --- simple built-in parties for structural tests ----------------------------


@dataclass
class ImmediateVerdictVerifier:
    """Halts with the fixed verdict on its first step."""

    verdict: Verdict
    input_alphabet: tuple = ("a", "b")
    comm_alphabet: tuple = (CELL_BLANK,)

    def session(self, w):
        outer = self

        class S:
            peak_space = 0

            def step(self, cell, rng):
                return VerifierStepResult(verdict=outer.verdict)

        return S()


@dataclass
class OneShotAskVerifier:
    """Writes one request on its first step, then accepts once answered."""

    request: str = "?"
    input_alphabet: tuple = ("a", "b")
    comm_alphabet: tuple = (CELL_BLANK, "?", "k")

    def session(self, w):
        outer = self

        class S:
            peak_space = 0
            sent = False

            def step(self, cell, rng):
                if not self.sent:
                    self.sent = True
                    return VerifierStepResult(message=outer.request)
                return VerifierStepResult(verdict=Verdict.ACCEPT)

        return S()


@dataclass
class MuteProver:
    """Never responds; any communicating verifier rejects it immediately."""

    input_alphabet: tuple | None = None
    comm_alphabet: tuple | None = None

    def session(self, w):
        class S:
            peak_space = 0

            def step(self, fresh, rng):
                return None

        return S()


@dataclass
class EchoProver:
    """Echoes every fresh symbol back."""

    input_alphabet: tuple | None = None
    comm_alphabet: tuple | None = None

    def session(self, w):
        class S:
            peak_space = 0

            def step(self, fresh, rng):
                return fresh

        return S()


def transcript_to_csv(rows) -> str:
    """Transcript dump: CSV with columns step,actor,symbol."""
    out = ["step,actor,symbol"]
    out.extend(f"{r.step},{r.actor},{r.symbol}" for r in rows)
    return "\n".join(out) + "\n"


def outcome_to_dict(outcome: InteractionOutcome) -> dict:
    return {
        "verdict": outcome.verdict.value,
        "verifier_steps": outcome.verifier_steps,
        "prover_steps": outcome.prover_steps,
        "messages_exchanged": outcome.messages_exchanged,
        "verifier_peak_space": outcome.verifier_peak_space,
        "prover_peak_space": outcome.prover_peak_space,
    }
