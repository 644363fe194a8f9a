"""Quantum-register machinery: a two-way classical controller driving a
constant-size quantum register through unitaries and projective measurements,
plus the modeled solver used where protocols only rely on an (error bound,
expected runtime) contract for the quantum subroutine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .classical import MalformedMachineError, RunOutcome, Verdict, tape_of
from .languages import LanguageId, membership

UNITARY_TOL = 1e-12
PROJECTOR_TOL = 1e-12
NORM_TOL = 1e-9
DEGENERATE_TOL = 1e-12


class DegenerateMeasurementError(RuntimeError):
    """All measurement outcomes had vanishing probability."""


@dataclass
class Unitary:
    matrix: np.ndarray

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        u = self.matrix
        err = np.abs(u.conj().T @ u - np.eye(u.shape[0])).max()
        if err > UNITARY_TOL:
            raise MalformedMachineError(f"matrix is not unitary (deviation {err:.2e})")


@dataclass
class Measurement:
    """Projective measurement: outcome label -> projector."""

    projectors: dict[str, np.ndarray]

    def __post_init__(self):
        self.projectors = {
            tau: np.asarray(p, dtype=complex) for tau, p in self.projectors.items()
        }
        mats = list(self.projectors.values())
        dim = mats[0].shape[0]
        for tau, p in self.projectors.items():
            if np.abs(p @ p - p).max() > PROJECTOR_TOL:
                raise MalformedMachineError(f"projector {tau!r} is not idempotent")
            if np.abs(p.conj().T - p).max() > PROJECTOR_TOL:
                raise MalformedMachineError(f"projector {tau!r} is not Hermitian")
        labels = list(self.projectors)
        for i, a in enumerate(labels):
            for b in labels[i + 1 :]:
                prod = self.projectors[a] @ self.projectors[b]
                if np.abs(prod).max() > PROJECTOR_TOL:
                    raise MalformedMachineError(f"projectors {a!r},{b!r} overlap")
        if np.abs(sum(mats) - np.eye(dim)).max() > PROJECTOR_TOL:
            raise MalformedMachineError("projectors do not sum to the identity")


Action = Unitary | Measurement


@dataclass
class QuantumRegister:
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        self.check_norm()

    def check_norm(self):
        nrm = float(np.vdot(self.amplitudes, self.amplitudes).real)
        if abs(nrm - 1.0) > NORM_TOL:
            raise MalformedMachineError(f"register norm² drifted to {nrm}")

    @classmethod
    def basis_state(cls, dim: int, index: int) -> "QuantumRegister":
        amps = np.zeros(dim, dtype=complex)
        amps[index] = 1.0
        return cls(amps)


def apply_action(reg: QuantumRegister, action: Action, rng):
    """Apply one action; returns (new register, outcome label or None)."""
    psi = reg.amplitudes
    if isinstance(action, Unitary):
        return QuantumRegister(action.matrix @ psi), None
    labels = list(action.projectors)
    collapsed = [action.projectors[tau] @ psi for tau in labels]
    probs = [float(np.vdot(v, v).real) for v in collapsed]
    if max(probs) < DEGENERATE_TOL:
        raise DegenerateMeasurementError("all outcome probabilities vanish")
    u = rng.random() * sum(probs)
    acc = 0.0
    pick = len(labels) - 1
    for idx, p in enumerate(probs):
        acc += p
        if u < acc:
            pick = idx
            break
    v = collapsed[pick] / math.sqrt(probs[pick])
    return QuantumRegister(v), labels[pick]


@dataclass
class QcfaSpec:
    """Two-way automaton with quantum and classical states.

    Each step first performs quantum_actions[(s, σ)] on the register, then a
    classical transition: keyed (s, σ) after a unitary, (s, σ, τ) after a
    measurement with outcome τ.
    """

    name: str
    basis: list[str]
    initial_quantum: str
    states: list[str]
    input_alphabet: list[str]
    quantum_actions: dict[tuple[str, str], Action]
    classical_transitions: dict[tuple, tuple[str, int]]
    start: str
    accept: str
    reject: str

    def __post_init__(self):
        if self.accept == self.reject:
            raise MalformedMachineError("accept and reject states must differ")
        for (s, sym), action in self.quantum_actions.items():
            if isinstance(action, Measurement):
                for tau in action.projectors:
                    if (s, sym, tau) not in self.classical_transitions:
                        raise MalformedMachineError(
                            f"no classical transition for outcome {(s, sym, tau)!r}"
                        )
            else:
                if (s, sym) not in self.classical_transitions:
                    raise MalformedMachineError(
                        f"no classical transition for {(s, sym)!r}"
                    )

    def initial_register(self) -> QuantumRegister:
        return QuantumRegister.basis_state(
            len(self.basis), self.basis.index(self.initial_quantum)
        )


def run_qcfa(spec: QcfaSpec, w: str, rng, step_cap: int = 10**6) -> RunOutcome:
    """Two-stage step loop from (q0, s0, head on the left endmarker)."""
    tape = tape_of(w)
    reg = spec.initial_register()
    state, head = spec.start, 0
    steps = 0
    while steps < step_cap:
        if state == spec.accept:
            return RunOutcome(Verdict.ACCEPT, steps)
        if state == spec.reject:
            return RunOutcome(Verdict.REJECT, steps)
        sym = tape[head]
        action = spec.quantum_actions.get((state, sym))
        if action is None:
            raise MalformedMachineError(f"no quantum action for {(state, sym)!r}")
        reg, outcome = apply_action(reg, action, rng)
        key = (state, sym) if outcome is None else (state, sym, outcome)
        if key not in spec.classical_transitions:
            raise MalformedMachineError(f"no classical transition for {key!r}")
        state, d = spec.classical_transitions[key]
        head += d
        if not 0 <= head < len(tape):
            raise MalformedMachineError("input head left the tape")
        steps += 1
    if state == spec.accept:
        return RunOutcome(Verdict.ACCEPT, steps)
    if state == spec.reject:
        return RunOutcome(Verdict.REJECT, steps)
    return RunOutcome(Verdict.TIMEOUT, steps)


def identity_action(dim: int = 2) -> Unitary:
    return Unitary(np.eye(dim))


def hadamard() -> Unitary:
    return Unitary(np.array([[1, 1], [1, -1]]) / math.sqrt(2))


def basis_measurement(dim: int = 2) -> Measurement:
    projectors = {}
    for k in range(dim):
        p = np.zeros((dim, dim), dtype=complex)
        p[k, k] = 1.0
        projectors[str(k)] = p
    return Measurement(projectors)


def coin_qcfa() -> QcfaSpec:
    """Toy machine: mix and measure the register on every input cell; accept
    iff every outcome is 0.  Acceptance on a^m is exactly 2^{-m}."""
    ident = identity_action()
    had = hadamard()
    meas = basis_measurement()
    qa = {
        ("mix", "▷"): ident,
        ("mix", "a"): had,
        ("mix", "◁"): ident,
        ("look", "a"): meas,
    }
    ct = {
        ("mix", "▷"): ("mix", 1),
        ("mix", "a"): ("look", 0),
        ("mix", "◁"): ("acc", 0),
        ("look", "a", "0"): ("mix", 1),
        ("look", "a", "1"): ("rej", 0),
    }
    return QcfaSpec(
        name="coin-qcfa",
        basis=["0", "1"],
        initial_quantum="0",
        states=["mix", "look", "acc", "rej"],
        input_alphabet=["a"],
        quantum_actions=qa,
        classical_transitions=ct,
        start="mix",
        accept="acc",
        reject="rej",
    )


def rotation_qcfa() -> QcfaSpec:
    """All-rational toy machine (3/5-4/5 rotation per cell, measured at the
    right endmarker); used for machine-file round-trips."""
    rot = Unitary(np.array([[0.6, -0.8], [0.8, 0.6]]))
    meas = basis_measurement()
    qa = {
        ("go", "▷"): identity_action(),
        ("go", "a"): rot,
        ("go", "◁"): meas,
    }
    ct = {
        ("go", "▷"): ("go", 1),
        ("go", "a"): ("go", 1),
        ("go", "◁", "0"): ("acc", 0),
        ("go", "◁", "1"): ("rej", 0),
    }
    return QcfaSpec(
        name="rotation-qcfa",
        basis=["0", "1"],
        initial_quantum="0",
        states=["go", "acc", "rej"],
        input_alphabet=["a"],
        quantum_actions=qa,
        classical_transitions=ct,
        start="go",
        accept="acc",
        reject="rej",
    )


# --- modeled quantum solver --------------------------------------------------


@dataclass
class ModeledSolverSpec:
    """Contract-level stand-in for a language-solving quantum routine: the
    answer is wrong with probability exactly error_bound, independently per
    call, and the step count follows runtime_law with mean <= 2^(k*m) for
    core length m.

    runtime_law: "deterministic" (ceil(2^(k*m)), the worst case for the
    budget analysis), "geometric" (mean 2^(k*m)), or "lognormal" (sigma 0.5,
    mean 2^(k*m), truncated at 100x mean).
    """

    target: LanguageId
    error_bound: float = 0.0
    runtime_exponent: float = 1.0
    runtime_law: str = "deterministic"

    def __post_init__(self):
        if not 0 <= self.error_bound < 0.5:
            raise ValueError("error bound must lie in [0, 1/2)")
        if self.runtime_exponent <= 0:
            raise ValueError("runtime exponent must be positive")
        if self.runtime_law not in ("deterministic", "geometric", "lognormal"):
            raise ValueError(f"unknown runtime law {self.runtime_law!r}")

    def mean_runtime(self, m: int) -> float:
        return 2.0 ** (self.runtime_exponent * m)

    def draw_runtime(self, m: int, rng) -> int:
        mean = self.mean_runtime(m)
        if self.runtime_law == "deterministic":
            return math.ceil(mean)
        if self.runtime_law == "geometric":
            return int(rng.geometric(min(1.0, 1.0 / mean)))
        sigma = 0.5
        mu = math.log(mean) - sigma**2 / 2
        for _ in range(1000):
            t = rng.lognormal(mu, sigma)
            if t <= 100 * mean:
                return max(1, int(round(t)))
        return max(1, int(mean))


@dataclass
class SolverResult:
    answer: bool
    steps_consumed: int


def modeled_solve(spec: ModeledSolverSpec, core: str, rng) -> SolverResult:
    """Answer membership of the core, flipped with probability error_bound;
    steps drawn from the runtime law at m = |core|."""
    truth = membership(spec.target, core)
    wrong = spec.error_bound > 0 and rng.random() < spec.error_bound
    return SolverResult(
        answer=truth != wrong,
        steps_consumed=spec.draw_runtime(len(core), rng),
    )
