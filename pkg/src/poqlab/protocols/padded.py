"""Composite protocol for exponentially padded languages.

The verifier runs a polynomial clock, polling the prover every step for a
Yes/No claim about the input; a missing claim at clock expiry rejects.  A
received claim is then checked by the round-based verification stage scoped
to the core segment (everything before the first padding star), using the
recognizer for the claimed side (the machine for Yes, its complement for
No).  The honest prover runs the modeled quantum solver on the core and
then streams genuine companion readings.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..classical import TwoHeadDfaSpec, Verdict
from ..interaction import VerifierStepResult
from ..languages import STAR, LanguageId, check_promise, membership
from ..quantum import ModeledSolverSpec, modeled_solve
from .clock import IdealizedClock
from .params import ProtocolParams
from .supersafe import (
    MSG_ACK,
    MSG_NO,
    MSG_POLL,
    MSG_WORKING,
    MSG_YES,
    AdversaryStrategy,
    BatchResult,
    HonestSupersafeProver,
    ReadingAdversary,
    SupersafeVerifier,
    precompute,
    sample_adversary_batch,
    sample_honest_batch,
)


def core_of(w: str) -> str:
    cut = w.find(STAR)
    return w if cut == -1 else w[:cut]


@dataclass
class PaddedProtocol:
    """Bundles the language, its recognizer pair, the solver model, and the
    protocol parameters; exposes both lockstep parties and fast samplers."""

    lang: LanguageId
    machine: TwoHeadDfaSpec
    machine_co: TwoHeadDfaSpec
    params: ProtocolParams
    solver: ModeledSolverSpec | None = None

    def __post_init__(self):
        self.name = f"padded-{self.lang.value.lower()}"
        if self.solver is None:
            self.solver = ModeledSolverSpec(
                target=self.lang,
                error_bound=float(self.params.eps_q),
                runtime_exponent=self.params.k,
                runtime_law=self.params.runtime_law,
            )
        self.clock = IdealizedClock(
            c=self.params.c1, t=self.params.k, eps_premature=self.params.eps_premature
        )

    # promise: exponential padding and core over the language's alphabet
    def promise_ok(self, w: str) -> bool:
        core, ok = check_promise(w)
        if not ok:
            return False
        try:
            membership(self.lang, core)
        except Exception:
            return False
        return True

    def machine_for(self, claim_yes: bool) -> TwoHeadDfaSpec:
        return self.machine if claim_yes else self.machine_co

    def verifier_spec(self) -> "PaddedVerifier":
        return PaddedVerifier(self)

    def prover_spec(self, strategy: AdversaryStrategy) -> "PaddedProver":
        return PaddedProver(self, strategy)

    # --- fast sampling --------------------------------------------------

    def _announce(self, strategy: AdversaryStrategy, truth: bool, rng):
        """Returns (claim or None, announce round)."""
        kind = strategy.kind
        if kind == "no-answer":
            return None, None
        if kind in ("honest", "quantum"):
            res = modeled_solve(self.solver, self._core, rng)
            return res.answer, max(1, res.steps_consumed)
        if kind == "random-answer":
            return bool(rng.integers(0, 2)), 1
        if kind == "always-lying" or strategy.announce == "wrong":
            return not truth, 1
        if strategy.announce == "correct":
            return truth, 1
        return bool(rng.integers(0, 2)), 1

    def prepare(self, w: str) -> None:
        core = core_of(w)
        self._core = core
        self._truth = membership(self.lang, core)
        self._data = {
            True: precompute(self.machine, core),
            False: precompute(self.machine_co, core),
        }

    def sample_batch(
        self, w: str, strategy: AdversaryStrategy, trials: int, rng
    ) -> BatchResult:
        self.prepare(w)
        n = len(w)
        p, m = self.params.p, self.params.m
        verdicts = np.empty(trials, dtype=np.int8)
        steps = np.empty(trials, dtype=np.int64)
        claims = np.empty(trials, dtype=np.int8)  # -1 none, 0 No, 1 Yes
        announce = np.empty(trials, dtype=np.int64)
        halts = np.empty(trials, dtype=np.int64)
        for i in range(trials):
            halts[i] = self.clock.halt_time(n, rng)
            claim, t_ann = self._announce(strategy, self._truth, rng)
            if claim is None or t_ann > halts[i]:
                claims[i] = -1
                announce[i] = 0
            else:
                claims[i] = int(claim)
                announce[i] = t_ann
        timeout = claims == -1
        verdicts[timeout] = 1  # rejected at clock expiry
        steps[timeout] = halts[timeout] + 1
        for claim_yes in (False, True):
            mask = claims == int(claim_yes)
            count = int(mask.sum())
            if count == 0:
                continue
            data = self._data[claim_yes]
            if strategy.kind in ("honest", "quantum", "random-answer", "always-lying"):
                sub = sample_honest_batch(data, p, m, count, rng)
            else:
                sub = sample_adversary_batch(
                    data, p, m, strategy, count, rng, self.params.step_cap
                )
            verdicts[mask] = sub.verdicts
            capped = sub.verdicts == 2
            total = announce[mask] + sub.steps
            total[capped] = self.params.step_cap
            steps[mask] = total
        return BatchResult(verdicts, steps)


@dataclass
class PaddedVerifier:
    protocol: PaddedProtocol

    def __post_init__(self):
        proto = self.protocol
        self.name = f"padded-{proto.lang.value.lower()}"
        self.input_alphabet = tuple(
            sorted(set(proto.machine.input_alphabet) | {STAR})
        )
        sub = SupersafeVerifier(proto.machine, proto.params.p, proto.params.m)
        self.comm_alphabet = tuple(
            sorted(
                set(sub.comm_alphabet)
                | {MSG_POLL, MSG_WORKING, MSG_YES, MSG_NO, MSG_ACK, STAR}
            )
        )

    def session(self, w: str):
        return _PaddedVerifierSession(self.protocol, w)


class _PaddedVerifierSession:
    def __init__(self, proto: PaddedProtocol, w: str):
        self.proto = proto
        self.core = core_of(w)
        self.n = len(w)
        self.t_halt = None
        self.polls = 0
        self.sub = None
        self.peak_space = 0

    def step(self, cell: str, rng) -> VerifierStepResult:
        if self.sub is not None:
            return self.sub.step(cell, rng)
        if self.t_halt is None:
            self.t_halt = self.proto.clock.halt_time(self.n, rng)
        if cell in (MSG_YES, MSG_NO):
            machine = self.proto.machine_for(cell == MSG_YES)
            sub_spec = SupersafeVerifier(
                machine, self.proto.params.p, self.proto.params.m
            )
            self.sub = sub_spec.session(self.core)
            return self.sub.step(cell, rng)
        if self.polls >= self.t_halt:
            return VerifierStepResult(verdict=Verdict.REJECT)
        self.polls += 1
        return VerifierStepResult(message=MSG_POLL)


@dataclass
class PaddedProver:
    protocol: PaddedProtocol
    strategy: AdversaryStrategy

    def __post_init__(self):
        self.name = f"{self.strategy.kind}-padded"
        self.input_alphabet = None  # adopt the verifier's
        self.comm_alphabet = None

    def session(self, w: str):
        return _PaddedProverSession(self.protocol, self.strategy, w)


class _PaddedProverSession:
    """Stage 1 answers clock polls (working / claim); stage 2 delegates to a
    reading prover on the core: honest streaming, or the reading adversary
    for lying strategies."""

    def __init__(self, proto: PaddedProtocol, strategy: AdversaryStrategy, w: str):
        self.proto = proto
        self.strategy = strategy
        self.core = core_of(w)
        self.truth = membership(proto.lang, self.core)
        self.polls = 0
        self.claim = None
        self.t_announce = None
        if strategy.kind in ("honest", "quantum", "random-answer", "always-lying"):
            self._mk_sub = lambda mach: HonestSupersafeProver(mach).session(self.core)
        else:
            self._mk_sub = lambda mach: ReadingAdversary(mach, strategy).session(
                self.core
            )
        self.sub = None
        self.peak_space = 0

    def _decide(self, rng):
        st = self.strategy
        if st.kind == "no-answer":
            self.claim, self.t_announce = None, None
        elif st.kind in ("honest", "quantum"):
            res = modeled_solve(self.proto.solver, self.core, rng)
            self.claim, self.t_announce = res.answer, max(1, res.steps_consumed)
        elif st.kind == "random-answer":
            self.claim, self.t_announce = bool(rng.integers(0, 2)), 1
        elif st.kind == "always-lying" or st.announce == "wrong":
            self.claim, self.t_announce = not self.truth, 1
        elif st.announce == "correct":
            self.claim, self.t_announce = self.truth, 1
        else:
            self.claim, self.t_announce = bool(rng.integers(0, 2)), 1

    def step(self, fresh: str | None, rng) -> str | None:
        if fresh is None:
            if self.sub is not None:
                return self.sub.step(None, rng)
            return None
        if fresh == MSG_POLL:
            if self.polls == 0:
                self._decide(rng)
            self.polls += 1
            if self.claim is not None and self.polls >= self.t_announce:
                machine = self.proto.machine_for(self.claim)
                self.sub = self._mk_sub(machine)
                return MSG_YES if self.claim else MSG_NO
            return MSG_WORKING
        if self.sub is not None:
            return self.sub.step(fresh, rng)
        return MSG_ACK
