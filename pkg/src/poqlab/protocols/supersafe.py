"""Round-based proof system for languages with a supersafe-head two-head
recognizer.

Per round the verifier repositions (sweeping its head to the right end and
back, which gives the prover time to go home), announces a round start,
then either traces the companion automaton itself and checks the prover's
reported readings (probability 1-p), or simulates the two-head machine
using the prover's stream as the supersafe head's readings while its own
head plays the other head (probability p).  A reported-reading mismatch or
a rejecting simulation rejects; m clean rounds accept.

Two equivalent realizations are provided: lockstep sessions for the generic
interaction engine, and round-level samplers for high-trial-count runs.
Each round reduces to one branch draw and one honesty draw, so the verdict
distributions coincide by construction; tests additionally pin the fast
path's step accounting to the engine's, including the dependence of the
repositioning cost on where the previous round parked the head.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..classical import (
    TwoHeadDfaSpec,
    Verdict,
    head_readings,
    run_twohead,
    supersafe_trajectory,
    tape_of,
)
from ..interaction import VerifierStepResult
from .params import parse_rational

MSG_START = "R"
MSG_REQ = "?"
MSG_OVER = "O"
MSG_ACK = "k"
MSG_POLL = "p"
MSG_WORKING = "w"
MSG_YES = "Y"
MSG_NO = "N"


@dataclass
class AdversaryStrategy:
    """Prover behavior knob for soundness experiments.

    kind: honest | always-truthful | always-lying | mix | no-answer |
    random-answer | strategy1 | strategy2.
    t_vector: per-round match probabilities (mix).
    mislead: "loop" drives the simulated machine into a non-halting fake
    computation on lying rounds; "member_replay" replays a member's genuine
    reading stream instead.
    announce: answer-stage policy for the composite protocols.
    """

    kind: str = "honest"
    t_vector: tuple = ()
    defect_position: int = 1
    lie_after: int | None = None
    mislead: str = "loop"
    announce: str = "uniform"  # uniform | wrong | correct

    @classmethod
    def parse(cls, text: str) -> "AdversaryStrategy":
        name, _, payload = text.partition(":")
        if name == "mix":
            t = tuple(Fraction(x) for x in payload.split(","))
            return cls(kind="mix", t_vector=t)
        if name == "strategy1":
            return cls(kind="strategy1", defect_position=int(payload or 1))
        if name == "strategy2":
            return cls(kind="strategy2", lie_after=int(payload) if payload else None)
        return cls(kind=name)


def _bernoulli(frac: Fraction, rng) -> bool:
    """Exact rational coin."""
    if frac <= 0:
        return False
    if frac >= 1:
        return True
    return int(rng.integers(0, frac.denominator)) < frac.numerator


def _stream_symbol(stream: tuple[str, str], j: int) -> str:
    prefix, cycle = stream
    if j < len(prefix):
        return prefix[j]
    return cycle[(j - len(prefix)) % len(cycle)]


def simulate_own_head_by_other(machine: TwoHeadDfaSpec, w: str, stream):
    """Machine simulation where our head plays the non-supersafe head and the
    supersafe head's readings come from the stream.

    Returns (readings consumed, final state or None, final head position);
    final state None means the stream ran out or the head left the tape.
    """
    tape = tape_of(w)
    state, pos = machine.start, 0
    consumed = 0
    for fake in stream:
        if state in (machine.accept, machine.reject):
            break
        state, d1, d2 = machine.transitions[(state, fake, tape[pos])]
        consumed += 1
        if state in (machine.accept, machine.reject):
            return consumed, state, pos
        pos += d2
        if not 0 <= pos < len(tape):
            return consumed, None, pos
    if state in (machine.accept, machine.reject):
        return consumed, state, pos
    return consumed, None, pos


@dataclass
class RoundData:
    """Per-(machine, input) facts shared by both simulation paths."""

    w: str
    tape: str
    trajectory: list[int]
    readings: list[str]
    machine_verdict: Verdict
    sim_m_len: int  # readings consumed by a truthful machine simulation
    sim_m_end: int  # verifier head position when that simulation halts
    loop_divergence: int  # first index where the loop stream differs
    replay_readings: list[str] | None = None
    replay_divergence: int = 0
    replay_sim_len: int = 0
    replay_sim_end: int = 0

    @property
    def n(self) -> int:
        return len(self.w)

    @property
    def n1_len(self) -> int:
        return len(self.trajectory)

    @property
    def n1_end(self) -> int:
        return self.trajectory[-1]


def _first_divergence(readings, fabricated) -> int:
    return next(
        (j for j in range(len(readings)) if fabricated(j) != readings[j]),
        len(readings),
    )


def precompute(
    machine: TwoHeadDfaSpec, w: str, member_example: str | None = None
) -> RoundData:
    trajectory = supersafe_trajectory(machine, w)
    readings = head_readings(w, trajectory)
    verdict = run_twohead(machine, w).verdict
    sim_len, final, sim_end = simulate_own_head_by_other(machine, w, readings)
    if final is None:
        raise RuntimeError(
            f"{machine.name}: truthful simulation did not halt on {w!r}"
        )
    loop_div = 0
    if machine.loop_stream is not None:
        loop_div = _first_divergence(
            readings, lambda j: _stream_symbol(machine.loop_stream, j)
        )
    replay = None
    replay_div = 0
    replay_len = 0
    replay_end = 0
    if member_example is not None:
        replay = head_readings(
            member_example, supersafe_trajectory(machine, member_example)
        )
        replay_div = _first_divergence(
            readings, lambda j: replay[min(j, len(replay) - 1)]
        )
        replay_len, rfinal, replay_end = simulate_own_head_by_other(
            machine, w, replay
        )
        if rfinal != machine.accept:
            raise ValueError(
                f"replayed readings of {member_example!r} do not drive "
                f"{machine.name} to acceptance on {w!r}"
            )
    return RoundData(
        w=w,
        tape=tape_of(w),
        trajectory=trajectory,
        readings=readings,
        machine_verdict=verdict,
        sim_m_len=sim_len,
        sim_m_end=sim_end,
        loop_divergence=loop_div,
        replay_readings=replay,
        replay_divergence=replay_div,
        replay_sim_len=replay_len,
        replay_sim_end=replay_end,
    )


# --- lockstep sessions --------------------------------------------------------


def _comm_alphabet(machine: TwoHeadDfaSpec):
    readings = set(machine.input_alphabet) | set(tape_of(""))
    return tuple(sorted(readings) + [MSG_START, MSG_REQ, MSG_OVER, MSG_ACK])


@dataclass
class SupersafeVerifier:
    """Engine-compatible round verifier for a supersafe-head machine."""

    machine: TwoHeadDfaSpec
    p: Fraction
    m: int
    name: str = ""

    def __post_init__(self):
        self.p = parse_rational(self.p)
        if self.machine.supersafe_head is None:
            raise ValueError("verifier needs a machine with a supersafe head")
        self.input_alphabet = tuple(self.machine.input_alphabet)
        self.comm_alphabet = _comm_alphabet(self.machine)
        if not self.name:
            self.name = f"supersafe-{self.machine.name}"

    def session(self, w: str):
        return _VerifierSession(self, w)


class _VerifierSession:
    def __init__(self, spec: SupersafeVerifier, w: str):
        self.spec = spec
        self.machine = spec.machine
        self.companion = spec.machine.companion
        self.tape = tape_of(w)
        self.n = len(w)
        self.pos = 0
        self.round = 0
        self.phase = "repo"
        self.out_leg = True  # repositioning direction
        self.sim_state = None
        self.peak_space = 0

    def step(self, cell: str, rng) -> VerifierStepResult:
        phase = self.phase
        if phase == "repo":
            return self._repo_move()
        if phase == "send_start":
            sim_m = _bernoulli(self.spec.p, rng)
            if sim_m:
                self.phase = "sim_m"
                self.sim_state = self.machine.start
            else:
                self.phase = "sim_n1"
                self.sim_state = self.companion.start
            self.pos = 0
            return VerifierStepResult(message=MSG_START)
        if phase == "sim_n1":
            own = self.tape[self.pos]
            if cell != own:
                return VerifierStepResult(verdict=Verdict.REJECT)
            state, d = self.companion.transitions[(self.sim_state, own)]
            if state in self.companion.halt_states:
                return self._finish_round()
            self.sim_state = state
            self.pos += d
            return VerifierStepResult(message=MSG_REQ)
        if phase == "sim_m":
            own = self.tape[self.pos]
            state, d1, d2 = self.machine.transitions[(self.sim_state, cell, own)]
            if state == self.machine.reject:
                return VerifierStepResult(verdict=Verdict.REJECT)
            if state == self.machine.accept:
                return self._finish_round()
            self.sim_state = state
            self.pos += d2
            if not 0 <= self.pos < len(self.tape):
                # a fabricated stream pushed the simulated head off the tape
                return VerifierStepResult(verdict=Verdict.REJECT)
            return VerifierStepResult(message=MSG_REQ)
        if phase == "after_over":
            if self.round == self.spec.m:
                return VerifierStepResult(verdict=Verdict.ACCEPT)
            self.phase = "repo"
            self.out_leg = self.pos < self.n + 1
            return self._repo_move()
        raise RuntimeError(f"unknown phase {phase!r}")

    def _repo_move(self) -> VerifierStepResult:
        if self.out_leg:
            self.pos += 1
            if self.pos == self.n + 1:
                self.out_leg = False
        else:
            self.pos -= 1
            if self.pos == 0:
                self.phase = "send_start"
                self.out_leg = True
        return VerifierStepResult()

    def _finish_round(self) -> VerifierStepResult:
        self.round += 1
        self.phase = "after_over"
        return VerifierStepResult(message=MSG_OVER)


@dataclass
class HonestSupersafeProver:
    """Streams the companion automaton's genuine head readings each round."""

    machine: TwoHeadDfaSpec
    name: str = ""

    def __post_init__(self):
        self.input_alphabet = tuple(self.machine.input_alphabet)
        self.comm_alphabet = _comm_alphabet(self.machine)
        if not self.name:
            self.name = f"honest-{self.machine.name}"

    def session(self, w: str):
        return _HonestProverSession(self.machine, w)


class _HonestProverSession:
    def __init__(self, machine: TwoHeadDfaSpec, w: str):
        self.companion = machine.companion
        self.tape = tape_of(w)
        self.state = None
        self.pos = 0
        self.peak_space = 0

    def step(self, fresh: str | None, rng) -> str | None:
        if fresh is None:
            if self.pos > 0:
                self.pos -= 1  # wander home between rounds
            return None
        if fresh == MSG_START:
            self.state = self.companion.start
            self.pos = 0
            return self.tape[self.pos]
        if fresh == MSG_REQ:
            state, d = self.companion.transitions[(self.state, self.tape[self.pos])]
            if state in self.companion.halt_states:
                return self.tape[self.pos]
            self.state = state
            self.pos += d
            return self.tape[self.pos]
        return MSG_ACK


@dataclass
class ReadingAdversary:
    """Adversarial prover for the round protocol; lies per round according to
    the strategy, feeding either the machine's loop stream or a member's
    replayed readings on lying rounds."""

    machine: TwoHeadDfaSpec
    strategy: AdversaryStrategy
    member_example: str | None = None
    name: str = ""

    def __post_init__(self):
        self.input_alphabet = tuple(self.machine.input_alphabet)
        self.comm_alphabet = _comm_alphabet(self.machine)
        if not self.name:
            self.name = f"{self.strategy.kind}-{self.machine.name}"

    def session(self, w: str):
        if self.strategy.kind == "no-answer":
            return _NoAnswerSession()
        return _AdversarySession(self, w)


class _NoAnswerSession:
    peak_space = 0

    def step(self, fresh, rng):
        return None


class _AdversarySession:
    def __init__(self, spec: ReadingAdversary, w: str):
        self.spec = spec
        self.machine = spec.machine
        self.companion = spec.machine.companion
        self.tape = tape_of(w)
        self.symbols = sorted(
            set(spec.machine.input_alphabet) | {self.tape[0], self.tape[-1]}
        )
        self.round = 0
        self.lying = False
        self.stream_idx = 0
        self.state = None
        self.pos = 0
        self.replay = None
        if spec.strategy.mislead == "member_replay" and spec.member_example:
            self.replay = head_readings(
                spec.member_example,
                supersafe_trajectory(spec.machine, spec.member_example),
            )
        self.peak_space = 0

    def _match_probability(self) -> Fraction:
        st = self.spec.strategy
        if st.kind in ("honest", "always-truthful"):
            return Fraction(1)
        if st.kind == "always-lying":
            return Fraction(0)
        if st.kind == "mix":
            if self.round - 1 < len(st.t_vector):
                return parse_rational(st.t_vector[self.round - 1])
            return Fraction(0)
        if st.kind == "random-answer":
            return Fraction(0)  # uniform symbols; modeled per reading below
        return Fraction(1)

    def _fabricated(self, j: int, rng) -> str:
        if self.spec.strategy.kind == "random-answer":
            return self.symbols[int(rng.integers(0, len(self.symbols)))]
        if self.replay is not None:
            return self.replay[min(j, len(self.replay) - 1)]
        stream = self.machine.loop_stream
        if stream is None:
            raise ValueError(f"{self.machine.name} has no loop stream configured")
        return _stream_symbol(stream, j)

    def step(self, fresh: str | None, rng) -> str | None:
        if fresh is None:
            if self.pos > 0:
                self.pos -= 1
            return None
        if fresh == MSG_START:
            self.round += 1
            self.lying = not _bernoulli(self._match_probability(), rng)
            self.stream_idx = 0
            self.state = self.companion.start
            self.pos = 0
            if self.lying:
                sym = self._fabricated(0, rng)
                self.stream_idx = 1
                return sym
            return self.tape[self.pos]
        if fresh == MSG_REQ:
            if self.lying:
                sym = self._fabricated(self.stream_idx, rng)
                self.stream_idx += 1
                return sym
            state, d = self.companion.transitions[(self.state, self.tape[self.pos])]
            if state in self.companion.halt_states:
                return self.tape[self.pos]
            self.state = state
            self.pos += d
            return self.tape[self.pos]
        return MSG_ACK


# --- round-level fast samplers ------------------------------------------------


VERDICT_CODE = {Verdict.ACCEPT: 0, Verdict.REJECT: 1, Verdict.TIMEOUT: 2}


@dataclass
class BatchResult:
    """Per-trial verdict codes (0 accept, 1 reject, 2 timeout) and verifier
    step counts."""

    verdicts: np.ndarray
    steps: np.ndarray

    def counts(self) -> dict[str, int]:
        return {
            "Accept": int((self.verdicts == 0).sum()),
            "Reject": int((self.verdicts == 1).sum()),
            "Timeout": int((self.verdicts == 2).sum()),
        }


def sample_honest_batch(
    data: RoundData, p: Fraction, m: int, trials: int, rng
) -> BatchResult:
    """Honest prover: every round passes regardless of branch on members; on
    a non-member the first machine-simulation round rejects.  Step counts
    track the branch draws and where each round parks the verifier's head."""
    p = parse_rational(p)
    branch = rng.integers(0, p.denominator, size=(trials, m)) < p.numerator
    n1p = data.n + 1
    ends = np.where(branch, data.sim_m_end, data.n1_end)
    prev = np.concatenate(
        [np.zeros((trials, 1), dtype=np.int64), ends[:, :-1]], axis=1
    )
    stage = np.where(branch, data.sim_m_len, data.n1_len)
    per_round = (n1p - prev) + n1p + 1 + stage
    if data.machine_verdict is Verdict.ACCEPT:
        steps = per_round.sum(axis=1) + 1
        return BatchResult(np.zeros(trials, dtype=np.int8), steps.astype(np.int64))
    # truthful readings on a non-member: the first machine round rejects
    has_m = branch.any(axis=1)
    first_m = np.where(has_m, np.argmax(branch, axis=1), m - 1)
    cum = per_round.cumsum(axis=1)
    upto_first = cum[np.arange(trials), first_m]
    steps = np.where(has_m, upto_first, cum[:, -1] + 1)
    verdicts = has_m.astype(np.int8)
    return BatchResult(verdicts, steps.astype(np.int64))


def sample_adversary_batch(
    data: RoundData,
    p: Fraction,
    m: int,
    strategy: AdversaryStrategy,
    trials: int,
    rng,
    step_cap: int,
) -> BatchResult:
    """Round-level adversary sampler.

    Per active round: branch ~ Bernoulli(p) picks machine simulation, lie ~
    Bernoulli(1-t_i).  Reading check + lie rejects at the stream's first
    divergence; machine simulation + truth yields the machine's verdict on
    the input; machine simulation + lie either drives a never-halting fake
    computation (loop mislead: timeout at the step cap) or replays a member
    run to acceptance and passes the round.
    """
    p = parse_rational(p)
    n1p = data.n + 1
    if strategy.kind == "no-answer":
        steps = np.full(trials, 2 * n1p + 2, dtype=np.int64)
        return BatchResult(np.ones(trials, dtype=np.int8), steps)
    if strategy.kind in ("honest", "always-truthful"):
        return sample_honest_batch(data, p, m, trials, rng)

    def t_of(i: int) -> Fraction:
        if strategy.kind == "always-lying":
            return Fraction(0)
        if strategy.kind == "mix":
            return (
                parse_rational(strategy.t_vector[i])
                if i < len(strategy.t_vector)
                else Fraction(0)
            )
        raise ValueError(f"fast path does not model strategy {strategy.kind!r}")

    replay = strategy.mislead == "member_replay"
    if replay and data.replay_readings is None:
        raise ValueError("member replay requested but no member precomputed")
    div = data.replay_divergence if replay else data.loop_divergence
    member = data.machine_verdict is Verdict.ACCEPT

    verdicts = np.full(trials, -1, dtype=np.int8)
    steps = np.zeros(trials, dtype=np.int64)
    endpos = np.zeros(trials, dtype=np.int64)
    active = np.ones(trials, dtype=bool)
    for i in range(m):
        if not active.any():
            break
        t_i = t_of(i)
        n_act = int(active.sum())
        branch_m = rng.integers(0, p.denominator, size=n_act) < p.numerator
        if t_i <= 0:
            truthful = np.zeros(n_act, dtype=bool)
        elif t_i >= 1:
            truthful = np.ones(n_act, dtype=bool)
        else:
            truthful = rng.integers(0, t_i.denominator, size=n_act) < t_i.numerator
        idx = np.flatnonzero(active)
        repo = (n1p - endpos[idx]) + n1p
        n1_truth = ~branch_m & truthful
        n1_lie = ~branch_m & ~truthful
        m_truth = branch_m & truthful
        m_lie = branch_m & ~truthful
        # reading check, truthful: round passes
        steps[idx[n1_truth]] += repo[n1_truth] + 1 + data.n1_len
        endpos[idx[n1_truth]] = data.n1_end
        # reading check, lying: mismatch detected at the first divergence
        verdicts[idx[n1_lie]] = 1
        steps[idx[n1_lie]] += repo[n1_lie] + 1 + min(div, data.n1_len - 1) + 1
        active[idx[n1_lie]] = False
        # machine simulation, truthful: the machine's verdict decides
        steps[idx[m_truth]] += repo[m_truth] + 1 + data.sim_m_len
        if member:
            endpos[idx[m_truth]] = data.sim_m_end
        else:
            verdicts[idx[m_truth]] = 1
            active[idx[m_truth]] = False
        # machine simulation, lying
        if replay:
            steps[idx[m_lie]] += repo[m_lie] + 1 + data.replay_sim_len
            endpos[idx[m_lie]] = data.replay_sim_end
        else:
            verdicts[idx[m_lie]] = 2
            steps[idx[m_lie]] = step_cap
            active[idx[m_lie]] = False
    survivors = verdicts == -1
    verdicts[survivors] = 0
    steps[survivors] += 1
    return BatchResult(verdicts, steps)


@dataclass
class SupersafeProtocol:
    """Harness-facing bundle: one supersafe-head machine plus (p, m)."""

    machine: TwoHeadDfaSpec
    p: Fraction
    m: int
    member_example: str | None = None
    step_cap: int = 10**7

    def __post_init__(self):
        self.p = parse_rational(self.p)
        self.name = f"supersafe-{self.machine.name}"
        self._cache: dict[str, RoundData] = {}

    def promise_ok(self, w: str) -> bool:
        return not (set(w) - set(self.machine.input_alphabet))

    def data_for(self, w: str) -> RoundData:
        if w not in self._cache:
            self._cache[w] = precompute(self.machine, w, self.member_example)
        return self._cache[w]

    def verifier_spec(self) -> SupersafeVerifier:
        return SupersafeVerifier(self.machine, self.p, self.m)

    def prover_spec(self, strategy: AdversaryStrategy):
        if strategy.kind in ("honest", "quantum", "always-truthful"):
            return HonestSupersafeProver(self.machine)
        return ReadingAdversary(
            self.machine, strategy, member_example=self.member_example
        )

    def sample_batch(
        self,
        w: str,
        strategy: AdversaryStrategy,
        trials: int,
        rng,
        step_cap: int | None = None,
    ) -> BatchResult:
        step_cap = self.step_cap if step_cap is None else step_cap
        data = self.data_for(w)
        if strategy.kind in ("honest", "quantum", "always-truthful"):
            return sample_honest_batch(data, self.p, self.m, trials, rng)
        if strategy.kind in ("always-lying", "mix", "no-answer"):
            return sample_adversary_batch(
                data, self.p, self.m, strategy, trials, rng, step_cap
            )
        # reading-level strategies (e.g. random-answer) go through the engine
        return self._engine_batch(w, strategy, trials, rng, step_cap)

    def _engine_batch(self, w, strategy, trials, rng, step_cap) -> BatchResult:
        from ..interaction import run_interaction

        ver = self.verifier_spec()
        pro = self.prover_spec(strategy)
        verdicts = np.empty(trials, dtype=np.int8)
        steps = np.empty(trials, dtype=np.int64)
        cap = min(step_cap, 10**5)  # engine-level trials stay bounded
        for t in range(trials):
            out = run_interaction(ver, pro, w, rng, cap)
            verdicts[t] = VERDICT_CODE[out.verdict]
            steps[t] = out.verifier_steps
        return BatchResult(verdicts, steps)
