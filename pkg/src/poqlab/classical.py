"""Execution engines for the classical models: work-tape probabilistic
Turing machines (two-way, endmarked input) and two-head deterministic
automata with optional supersafe heads.

Transition probabilities are exact rationals; simulation samples them by
64-bit-resolution inverse CDF so that runs are reproducible and row sums
stay exact.  Deterministic transitions consume no randomness.
"""

from __future__ import annotations

import enum
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction

from .languages import LEFT_END, RIGHT_END

BLANK = "_"

_SCALE = 1 << 64


class MalformedMachineError(ValueError):
    """The machine's tables are inconsistent or a run left their domain."""


class NotSupersafeError(ValueError):
    """The companion automaton failed to halt within the cap."""


class Verdict(enum.Enum):
    ACCEPT = "Accept"
    REJECT = "Reject"
    TIMEOUT = "Timeout"


@dataclass(frozen=True)
class RunOutcome:
    verdict: Verdict
    steps: int
    peak_space: int = 0


def tape_of(w: str) -> str:
    return LEFT_END + w + RIGHT_END


# --- probabilistic Turing machines -----------------------------------------

# one transition outcome: (next state, work symbol written, input move, work move)
Outcome = tuple[str, str, int, int]


@dataclass
class PtmSpec:
    """Probabilistic machine with a read-only endmarked input tape and a
    one-way-infinite work tape.

    transitions: (state, input symbol, work symbol) -> list of
    (probability, outcome) with exact rational probabilities summing to 1.
    Machines that never write a non-blank work symbol behave as finite
    automata and meter zero space.
    """

    name: str
    states: list[str]
    input_alphabet: list[str]
    work_alphabet: list[str]
    transitions: dict[tuple[str, str, str], list[tuple[Fraction, Outcome]]]
    start: str
    accept: str
    reject: str
    initial_head: str = "left"  # "left" = on the left endmarker

    def __post_init__(self):
        self.validate()
        self._compiled = _compile_rows(self.transitions)

    def validate(self) -> None:
        if self.accept == self.reject:
            raise MalformedMachineError("accept and reject states must differ")
        declared = set(self.states)
        for s in (self.start, self.accept, self.reject):
            if s not in declared:
                raise MalformedMachineError(f"undeclared special state {s!r}")
        work = set(self.work_alphabet) | {BLANK}
        inp = set(self.input_alphabet) | {LEFT_END, RIGHT_END}
        for (s, sym, wsym), rows in self.transitions.items():
            if s in (self.accept, self.reject):
                raise MalformedMachineError(f"halting state {s!r} has transitions")
            if s not in declared or sym not in inp or wsym not in work:
                raise MalformedMachineError(f"bad transition key {(s, sym, wsym)!r}")
            total = Fraction(0)
            for p, (s2, w2, di, dw) in rows:
                if not 0 <= p <= 1:
                    raise MalformedMachineError(f"probability {p} out of range")
                if s2 not in declared or w2 not in work:
                    raise MalformedMachineError(f"bad outcome {(s2, w2)!r}")
                if di not in (-1, 0, 1) or dw not in (-1, 0, 1):
                    raise MalformedMachineError("head moves must be in {-1, 0, 1}")
                if sym == LEFT_END and di < 0:
                    raise MalformedMachineError("move past the left endmarker")
                if sym == RIGHT_END and di > 0:
                    raise MalformedMachineError("move past the right endmarker")
                total += p
            if total != 1:
                raise MalformedMachineError(
                    f"row {(s, sym, wsym)!r} sums to {total}, not 1"
                )


def _compile_rows(transitions):
    """Precompute 64-bit cumulative thresholds per row for sampling."""
    compiled = {}
    for key, rows in transitions.items():
        if len(rows) == 1:
            compiled[key] = (None, (rows[0][1],))
            continue
        cum = Fraction(0)
        thresholds, outcomes = [], []
        for p, out in rows:
            cum += p
            thresholds.append((cum.numerator * _SCALE) // cum.denominator)
            outcomes.append(out)
        compiled[key] = (thresholds, tuple(outcomes))
    return compiled


@dataclass
class ClassicalConfiguration:
    """Full instantaneous description of a PTM run."""

    state: str
    input_head: int
    work_tape: dict[int, str] = field(default_factory=dict)
    work_head: int = 0
    touched_cells: int = 0
    _touched: set[int] = field(default_factory=set)

    def work_symbol(self) -> str:
        return self.work_tape.get(self.work_head, BLANK)


def initial_configuration(spec: PtmSpec, w: str) -> ClassicalConfiguration:
    head = 0 if spec.initial_head == "left" else len(w) + 1
    return ClassicalConfiguration(state=spec.start, input_head=head)


def step_ptm(spec: PtmSpec, cfg: ClassicalConfiguration, tape: str, rng) -> None:
    """Advance cfg by one sampled transition, in place."""
    if cfg.state in (spec.accept, spec.reject):
        raise MalformedMachineError("stepping a halted machine")
    key = (cfg.state, tape[cfg.input_head], cfg.work_symbol())
    entry = spec._compiled.get(key)
    if entry is None:
        raise MalformedMachineError(f"undefined transition for {key!r}")
    thresholds, outcomes = entry
    if thresholds is None:
        s2, w2, di, dw = outcomes[0]
    else:
        u = int(rng.integers(0, _SCALE, dtype="uint64"))
        s2, w2, di, dw = outcomes[bisect_right(thresholds, u)]
    if w2 != BLANK:
        cfg._touched.add(cfg.work_head)
        cfg.touched_cells = len(cfg._touched)
        cfg.work_tape[cfg.work_head] = w2
    elif cfg.work_head in cfg.work_tape:
        cfg.work_tape[cfg.work_head] = w2
    cfg.state = s2
    cfg.input_head += di
    cfg.work_head += dw
    if cfg.work_head < 0:
        raise MalformedMachineError("work head moved off the left tape end")


def run_machine(spec: PtmSpec, w: str, rng, step_cap: int = 10**7) -> RunOutcome:
    """Iterate from the initial configuration until a verdict or the cap."""
    tape = tape_of(w)
    cfg = initial_configuration(spec, w)
    steps = 0
    while steps < step_cap:
        if cfg.state == spec.accept:
            return RunOutcome(Verdict.ACCEPT, steps, cfg.touched_cells)
        if cfg.state == spec.reject:
            return RunOutcome(Verdict.REJECT, steps, cfg.touched_cells)
        step_ptm(spec, cfg, tape, rng)
        steps += 1
    if cfg.state == spec.accept:
        return RunOutcome(Verdict.ACCEPT, steps, cfg.touched_cells)
    if cfg.state == spec.reject:
        return RunOutcome(Verdict.REJECT, steps, cfg.touched_cells)
    return RunOutcome(Verdict.TIMEOUT, steps, cfg.touched_cells)


# --- single-head deterministic two-way automata (companions) ---------------


@dataclass
class OneHeadDfa:
    """Deterministic two-way automaton used as a supersafe-head companion.

    transitions: (state, symbol) -> (state', move); reaching a state in
    halt_states ends the run.
    """

    name: str
    states: list[str]
    transitions: dict[tuple[str, str], tuple[str, int]]
    start: str
    halt_states: frozenset[str]

    def trajectory(self, w: str, cap: int = 10**6) -> list[int]:
        """Head positions at every step until the halting transition."""
        tape = tape_of(w)
        pos, state = 0, self.start
        positions = [0]
        for _ in range(cap):
            key = (state, tape[pos])
            if key not in self.transitions:
                raise MalformedMachineError(f"companion has no move for {key!r}")
            state, d = self.transitions[key]
            if state in self.halt_states:
                return positions
            pos += d
            if not 0 <= pos < len(tape):
                raise MalformedMachineError("companion left the tape")
            positions.append(pos)
        raise NotSupersafeError(f"companion {self.name} did not halt within {cap}")


# --- two-head deterministic automata ----------------------------------------


@dataclass
class TwoHeadDfaSpec:
    """Two-head two-way deterministic automaton.

    transitions: (state, symbol under head 1, symbol under head 2) ->
    (state', d1, d2).  Totality over non-halting states is enforced so that
    fabricated readings can never fall outside the tables.
    """

    name: str
    states: list[str]
    input_alphabet: list[str]
    transitions: dict[tuple[str, str, str], tuple[str, int, int]]
    start: str
    accept: str
    reject: str
    supersafe_head: int | None = None
    companion: OneHeadDfa | None = None
    # fabricated head-1 reading stream (prefix, cycle) that drives a
    # single-head simulation of this machine forever; used by worst-case
    # adversaries in the interactive protocols
    loop_stream: tuple[str, str] | None = None

    def __post_init__(self):
        if self.supersafe_head is not None and self.companion is None:
            raise MalformedMachineError("supersafe head declared without companion")
        full = set(self.input_alphabet) | {LEFT_END, RIGHT_END}
        for s in self.states:
            if s in (self.accept, self.reject):
                continue
            for a in full:
                for b in full:
                    if (s, a, b) not in self.transitions:
                        raise MalformedMachineError(
                            f"{self.name}: missing transition {(s, a, b)!r}"
                        )


def run_twohead(spec: TwoHeadDfaSpec, w: str, step_cap: int = 10**6) -> RunOutcome:
    """Deterministic two-head run; Timeout flags a non-halting machine."""
    tape = tape_of(w)
    state, h1, h2 = spec.start, 0, 0
    steps = 0
    while steps < step_cap:
        if state == spec.accept:
            return RunOutcome(Verdict.ACCEPT, steps)
        if state == spec.reject:
            return RunOutcome(Verdict.REJECT, steps)
        state, d1, d2 = spec.transitions[(state, tape[h1], tape[h2])]
        h1 += d1
        h2 += d2
        if not (0 <= h1 < len(tape) and 0 <= h2 < len(tape)):
            raise MalformedMachineError(f"{spec.name}: head left the tape on {w!r}")
        steps += 1
    if state == spec.accept:
        return RunOutcome(Verdict.ACCEPT, steps)
    if state == spec.reject:
        return RunOutcome(Verdict.REJECT, steps)
    return RunOutcome(Verdict.TIMEOUT, steps)


def supersafe_trajectory(spec: TwoHeadDfaSpec, w: str) -> list[int]:
    """The companion automaton's full head trajectory on w."""
    if spec.supersafe_head is None or spec.companion is None:
        raise ValueError(f"{spec.name} has no supersafe head")
    return spec.companion.trajectory(w)


def head_readings(w: str, trajectory: list[int]) -> list[str]:
    """Tape symbols along a trajectory."""
    tape = tape_of(w)
    return [tape[p] for p in trajectory]


def simulate_own_head(
    spec: TwoHeadDfaSpec, w: str, other_readings, cap: int | None = None
) -> tuple[list[int], str | None]:
    """Single-head simulation: our head imitates the supersafe head while the
    other head's readings come from the supplied iterator.

    Returns (positions per step, final state or None if the reading stream or
    cap ran out first).
    """
    tape = tape_of(w)
    idx = spec.supersafe_head
    state, pos = spec.start, 0
    positions = [0]
    it = iter(other_readings)
    steps = 0
    while state not in (spec.accept, spec.reject):
        if cap is not None and steps >= cap:
            return positions, None
        try:
            fake = next(it)
        except StopIteration:
            return positions, None
        own = tape[pos]
        key = (state, own, fake) if idx == 1 else (state, fake, own)
        state, d1, d2 = spec.transitions[key]
        if state in (spec.accept, spec.reject):
            break
        pos += d1 if idx == 1 else d2
        if not 0 <= pos < len(tape):
            return positions, None
        positions.append(pos)
        steps += 1
    return positions, state


def fuzz_supersafety(spec: TwoHeadDfaSpec, w: str, rng, trials: int = 200) -> bool:
    """Drive the single-head projection with uniformly random fake readings
    and confirm every run's trajectory is a prefix of the companion's,
    followed by a halt."""
    target = supersafe_trajectory(spec, w)
    symbols = list(spec.input_alphabet) + [LEFT_END, RIGHT_END]
    cap = len(target) + 1
    for _ in range(trials):
        fakes = (symbols[int(rng.integers(0, len(symbols)))] for _ in range(cap))
        positions, final = simulate_own_head(spec, w, fakes, cap=cap)
        if final is None:
            return False  # ran past the companion's trajectory without halting
        if positions != target[: len(positions)]:
            return False
    return True
