"""Protocol for the block-counting separation: cores a^i b^j with j = i^2
versus j < i^2, padded to exponential length.

After the clock stage the prover repeatedly transmits ruler segments of
i - 1 z's followed by #.  One verifier branch checks the segment format
while flipping low-probability accept coins over the a-block; the other
treats the #'s received while scanning the b-block as unary marks and
compares their count against the a-count with the coin-group tournament,
deciding per the prover's announced answer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..classical import Verdict
from ..interaction import VerifierStepResult
from ..languages import STAR, LanguageId, check_promise, membership
from ..quantum import ModeledSolverSpec, modeled_solve
from .clock import IdealizedClock
from .freivalds import runtime_exponent
from .params import ProtocolParams
from .supersafe import (
    MSG_ACK,
    MSG_NO,
    MSG_POLL,
    MSG_REQ,
    MSG_WORKING,
    MSG_YES,
    AdversaryStrategy,
    BatchResult,
    _bernoulli,
)
from .padded import core_of

MSG_START_PROOF = "S"
SYM_Z = "z"
SYM_HASH = "#"


def parse_core(core: str) -> tuple[int, int] | None:
    i = 0
    while i < len(core) and core[i] == "a":
        i += 1
    j = len(core) - i
    if any(c != "b" for c in core[i:]):
        return None
    return i, j


@dataclass
class StreamModel:
    """Closed-form view of a prover's transmission.

    Position s (1-based) carries # iff the conforming ruler would (s % i == 0),
    except for strategy-specific deviations: a single flipped position, or a
    switched regime after `lie_after` (all z's, or segments of period v).
    """

    i: int
    kind: str = "honest"  # honest | flip | all_z_after | period_after
    flip_at: int = 0
    lie_after: int = 0
    period: int = 0

    def symbol(self, s: int) -> str:
        conforming = SYM_HASH if s % self.i == 0 else SYM_Z
        if self.kind == "honest":
            return conforming
        if self.kind == "flip":
            if s == self.flip_at:
                return SYM_HASH if conforming == SYM_Z else SYM_Z
            return conforming
        if s <= self.lie_after:
            return conforming
        if self.kind == "all_z_after":
            return SYM_Z
        # period_after: fresh segments of z^{period-1} # starting past the lie
        return SYM_HASH if (s - self.lie_after) % self.period == 0 else SYM_Z

    def first_ruler_defect(self, horizon: int = 1 << 30) -> int | None:
        """First position where the stream violates the conforming pattern."""
        if self.kind == "honest":
            return None
        if self.kind == "flip":
            return self.flip_at
        if self.kind == "all_z_after":
            nxt = (self.lie_after // self.i + 1) * self.i
            return nxt if nxt <= horizon else None
        scan_to = self.lie_after + self.i * self.period + max(self.i, self.period) + 1
        for s in range(self.lie_after + 1, min(scan_to, horizon) + 1):
            conforming = SYM_HASH if s % self.i == 0 else SYM_Z
            if self.symbol(s) != conforming:
                return s
        return None

    def hash_count(self, lo: int, hi: int) -> int:
        """Number of #'s among positions lo..hi (inclusive)."""
        return sum(1 for s in range(lo, hi + 1) if self.symbol(s) == SYM_HASH)


def build_stream(strategy: AdversaryStrategy, i: int, j: int, claim_yes: bool, horizon: int) -> StreamModel:
    if strategy.kind == "strategy1":
        return StreamModel(i=i, kind="flip", flip_at=strategy.defect_position)
    if strategy.kind == "strategy2":
        lie_after = strategy.lie_after if strategy.lie_after is not None else horizon
        if claim_yes and j > 0 and i > 0 and j % i == 0 and j // i > 0:
            # force a balanced comparison agreeing with a wrong Yes
            return StreamModel(i=i, kind="period_after", lie_after=lie_after, period=j // i)
        return StreamModel(i=i, kind="all_z_after", lie_after=lie_after)
    return StreamModel(i=i)


@dataclass
class SquareProtocol:
    """Bundles parameters and solver; exposes lockstep parties and samplers."""

    params: ProtocolParams
    solver: ModeledSolverSpec | None = None

    def __post_init__(self):
        self.name = "square"
        if self.solver is None:
            self.solver = ModeledSolverSpec(
                target=LanguageId.SQUARE,
                error_bound=float(self.params.eps_q),
                runtime_exponent=self.params.k,
                runtime_law=self.params.runtime_law,
            )
        self.clock = IdealizedClock(
            c=self.params.c1, t=self.params.k, eps_premature=self.params.eps_premature
        )
        self.k_f = runtime_exponent(self.params.d_f)

    def promise_ok(self, w: str) -> bool:
        core, ok = check_promise(w)
        if not ok:
            return False
        parsed = parse_core(core)
        if parsed is None:
            return False
        i, j = parsed
        return i >= 1 and j <= i * i

    def horizon(self, i: int) -> int:
        """Symbol-request budget i·K·2^(k_f·i) from the runtime analysis."""
        return i * self.params.K * (2 ** (self.k_f * i))

    def verifier_spec(self) -> "SquareVerifier":
        return SquareVerifier(self)

    def prover_spec(self, strategy: AdversaryStrategy) -> "SquareProver":
        return SquareProver(self, strategy)

    # --- fast sampler -----------------------------------------------------

    def _announce(self, strategy, truth, rng):
        kind = strategy.kind
        if kind == "no-answer":
            return None, None
        if kind in ("honest", "quantum"):
            res = modeled_solve(self.solver, self._core, rng)
            return res.answer, max(1, res.steps_consumed)
        if strategy.announce == "wrong":
            return not truth, 1
        if strategy.announce == "correct":
            return truth, 1
        return bool(rng.integers(0, 2)), 1

    def prepare(self, w: str):
        core = core_of(w)
        self._core = core
        self._truth = membership(LanguageId.SQUARE, core)
        parsed = parse_core(core)
        if parsed is None:
            raise ValueError(f"core {core!r} is not block-shaped")
        self._i, self._j = parsed

    def sample_one(self, strategy: AdversaryStrategy, n: int, rng) -> tuple[int, int]:
        """One trial; returns (verdict code, verifier steps)."""
        params = self.params
        i, j = self._i, self._j
        t_halt = self.clock.halt_time(n, rng)
        claim, t_ann = self._announce(strategy, self._truth, rng)
        if claim is None or t_ann > t_halt:
            return 1, t_halt + 1
        base = t_ann + 2 * len(self._core) + 1
        stream = build_stream(strategy, i, j, claim, self.horizon(max(1, i)))
        if _bernoulli(params.p, rng):
            verdict, steps = self._sample_ruler(stream, i, rng)
        else:
            verdict, steps = self._sample_comparison(stream, i, j, claim, rng)
        if verdict == 2 or base + steps > params.step_cap:
            return 2, params.step_cap
        return verdict, base + steps

    def _sample_ruler(self, stream: StreamModel, i: int, rng) -> tuple[int, int]:
        """Accept on an all-heads sweep of the a-block; reject at the first
        transmitted defect, whichever comes first."""
        theta = 2.0 ** (-self.params.h_v * i)
        defect = stream.first_ruler_defect()
        accept_sweep = int(rng.geometric(theta))
        if defect is None or accept_sweep < (defect + i - 1) // i:
            return 0, accept_sweep * (i + 1)
        defect_sweep = (defect + i - 1) // i
        offset = defect - (defect_sweep - 1) * i
        return 1, (defect_sweep - 1) * (i + 1) + offset

    def _sample_comparison(
        self, stream: StreamModel, i: int, j: int, claim_yes: bool, rng
    ) -> tuple[int, int]:
        """Pass-by-pass count comparison driven by the stream model."""
        params = self.params
        c_f, d_f = params.c_f, params.d_f
        pa = 2.0**-i
        ca = cb = 0
        pos = 0  # stream cursor
        passes = 0
        pass_len = i + j + 1
        while True:
            passes += 1
            lo, hi = pos + 1, pos + j
            pos = hi
            hashes = stream.hash_count(lo, hi) if j else 0
            boundary_ok = j == 0 or stream.symbol(hi) == SYM_HASH
            if (i - hashes) % c_f != 0 or not boundary_ok:
                # concluded the counts differ: agree with a No announcement
                return (1 if claim_yes else 0), passes * pass_len
            goal_a = rng.random() < pa
            goal_b = rng.random() < 2.0**-hashes
            if goal_a != goal_b:
                if goal_a:
                    ca += 1
                else:
                    cb += 1
                if ca + cb == d_f:
                    equal = ca > 0 and cb > 0
                    agree = equal == claim_yes
                    return (0 if agree else 1), passes * pass_len
            if passes > 10**7:
                return 2, 0

    def sample_batch(
        self, w: str, strategy: AdversaryStrategy, trials: int, rng
    ) -> BatchResult:
        self.prepare(w)
        n = len(w)
        verdicts = np.empty(trials, dtype=np.int8)
        steps = np.empty(trials, dtype=np.int64)
        for t in range(trials):
            v, s = self.sample_one(strategy, n, rng)
            verdicts[t] = v
            steps[t] = s
        return BatchResult(verdicts, steps)


# --- lockstep sessions ---------------------------------------------------------


@dataclass
class SquareVerifier:
    protocol: SquareProtocol

    def __post_init__(self):
        self.name = "square"
        self.input_alphabet = ("a", "b", STAR)
        self.comm_alphabet = (
            MSG_POLL,
            MSG_WORKING,
            MSG_YES,
            MSG_NO,
            MSG_START_PROOF,
            MSG_REQ,
            MSG_ACK,
            SYM_Z,
            SYM_HASH,
        )

    def session(self, w: str):
        return _SquareVerifierSession(self.protocol, w)


class _SquareVerifierSession:
    def __init__(self, proto: SquareProtocol, w: str):
        self.proto = proto
        self.core = core_of(w)
        parsed = parse_core(self.core)
        if parsed is None:
            raise ValueError("square verifier needs a block-shaped core")
        self.i, self.j = parsed
        self.n = len(w)
        self.t_halt = None
        self.polls = 0
        self.claim = None
        self.phase = "clock"
        self.pos = 0
        # ruler bookkeeping
        self.slot = 0
        self.heads_run = 0
        # comparison bookkeeping
        self.ca = self.cb = 0
        self.hashes = 0
        self.a_alive = True
        self.b_alive = True
        self.cells_left = 0
        self.last_b_hash = True
        self.pending = False
        self.peak_space = 0

    def step(self, cell: str, rng) -> VerifierStepResult:
        proto, params = self.proto, self.proto.params
        phase = self.phase
        if phase == "clock":
            if self.t_halt is None:
                self.t_halt = proto.clock.halt_time(self.n, rng)
            if cell in (MSG_YES, MSG_NO):
                self.claim = cell == MSG_YES
                self.phase = "repo_out"
                self.pos = 0
                return VerifierStepResult()
            if self.polls >= self.t_halt:
                return VerifierStepResult(verdict=Verdict.REJECT)
            self.polls += 1
            return VerifierStepResult(message=MSG_POLL)
        if phase == "repo_out":
            self.pos += 1
            if self.pos >= len(self.core):
                self.phase = "repo_back"
            return VerifierStepResult()
        if phase == "repo_back":
            self.pos -= 1
            if self.pos <= 0:
                self.phase = "choose"
            return VerifierStepResult()
        if phase == "choose":
            if _bernoulli(params.p, rng):
                self.phase = "ruler"
                self.slot = 0
                self.heads_run = 0
            else:
                self.phase = "compare_start"
            return VerifierStepResult(message=MSG_START_PROOF)
        if phase == "ruler":
            if cell in (SYM_Z, SYM_HASH) and self.slot > 0:
                expected = SYM_HASH if self.slot % self.i == 0 else SYM_Z
                if cell != expected:
                    return VerifierStepResult(verdict=Verdict.REJECT)
                if self.slot % self.i == 0:
                    if self.heads_run == self.i:
                        return VerifierStepResult(verdict=Verdict.ACCEPT)
                    self.heads_run = 0
                    self.phase = "ruler_pause"
                    return VerifierStepResult()
            self.slot += 1
            if int(rng.integers(0, 2**params.h_v)) == 0:
                self.heads_run += 1
            return VerifierStepResult(message=MSG_REQ)
        if phase == "ruler_pause":
            self.phase = "ruler"
            self.slot += 1
            if int(rng.integers(0, 2**params.h_v)) == 0:
                self.heads_run += 1
            return VerifierStepResult(message=MSG_REQ)
        if phase == "compare_start":
            # response to the start-proof message arrives here; begin a pass
            self._begin_pass()
            self.phase = "compare"
            return self._compare_step(None, rng)
        if phase == "compare":
            return self._compare_step(cell, rng)
        raise RuntimeError(f"unknown phase {phase!r}")

    def _begin_pass(self):
        self.cells_left = self.i + self.j
        self.a_done = 0
        self.hashes = 0
        self.a_alive = True
        self.b_alive = True
        self.last_b_hash = True

    def _compare_step(self, cell, rng) -> VerifierStepResult:
        params = self.proto.params
        if self.pending and cell in (SYM_Z, SYM_HASH):
            self.pending = False
            if cell == SYM_HASH:
                self.hashes += 1
                if rng.random() >= 0.5:
                    self.b_alive = False
            self.last_b_hash = cell == SYM_HASH
        if self.cells_left == 0:
            # pass completed: evaluate, then start the next pass
            bad_counts = (self.i - self.hashes) % params.c_f != 0
            bad_boundary = self.j > 0 and not self.last_b_hash
            if bad_counts or bad_boundary:
                agree = not self.claim
                return VerifierStepResult(
                    verdict=Verdict.ACCEPT if agree else Verdict.REJECT
                )
            goal_a = self.a_alive
            goal_b = self.b_alive
            if goal_a != goal_b:
                if goal_a:
                    self.ca += 1
                else:
                    self.cb += 1
                if self.ca + self.cb == params.d_f:
                    equal = self.ca > 0 and self.cb > 0
                    agree = equal == self.claim
                    return VerifierStepResult(
                        verdict=Verdict.ACCEPT if agree else Verdict.REJECT
                    )
            self._begin_pass()
            return self._consume_cell(rng)
        return self._consume_cell(rng)

    def _consume_cell(self, rng) -> VerifierStepResult:
        """Scan one core cell; request a symbol on b-cells."""
        if self.a_done < self.i:
            self.a_done += 1
            self.cells_left -= 1
            if rng.random() >= 0.5:
                self.a_alive = False
            return VerifierStepResult()
        self.cells_left -= 1
        self.pending = True
        return VerifierStepResult(message=MSG_REQ)


@dataclass
class SquareProver:
    protocol: SquareProtocol
    strategy: AdversaryStrategy

    def __post_init__(self):
        self.name = f"{self.strategy.kind}-square"
        self.input_alphabet = None
        self.comm_alphabet = None

    def session(self, w: str):
        return _SquareProverSession(self.protocol, self.strategy, w)


class _SquareProverSession:
    def __init__(self, proto: SquareProtocol, strategy: AdversaryStrategy, w: str):
        self.proto = proto
        self.strategy = strategy
        self.core = core_of(w)
        parsed = parse_core(self.core)
        self.i = parsed[0] if parsed else 1
        self.j = parsed[1] if parsed else 0
        self.truth = membership(LanguageId.SQUARE, self.core)
        self.polls = 0
        self.claim = None
        self.t_announce = None
        self.stream = None
        self.cursor = 0
        self.peak_space = 0

    def step(self, fresh, rng):
        if fresh is None:
            return None
        if fresh == MSG_POLL:
            if self.polls == 0:
                self._decide(rng)
            self.polls += 1
            if self.claim is not None and self.polls >= self.t_announce:
                self.stream = build_stream(
                    self.strategy,
                    self.i,
                    self.j,
                    self.claim,
                    self.proto.horizon(max(1, self.i)),
                )
                return MSG_YES if self.claim else MSG_NO
            return MSG_WORKING
        if fresh == MSG_START_PROOF:
            self.cursor = 0
            return MSG_ACK
        if fresh == MSG_REQ:
            self.cursor += 1
            return self.stream.symbol(self.cursor)
        return MSG_ACK

    def _decide(self, rng):
        st = self.strategy
        if st.kind == "no-answer":
            self.claim, self.t_announce = None, None
        elif st.kind in ("honest", "quantum"):
            res = modeled_solve(self.proto.solver, self.core, rng)
            self.claim, self.t_announce = res.answer, max(1, res.steps_consumed)
        elif st.announce == "wrong":
            self.claim, self.t_announce = not self.truth, 1
        elif st.announce == "correct":
            self.claim, self.t_announce = self.truth, 1
        else:
            self.claim, self.t_announce = bool(rng.integers(0, 2)), 1
