"""Trial orchestration: seeded reproducible batches, interval statistics,
success-gap estimation, and result serialization.

Randomness is counter-based: every batch draws from a Philox stream keyed by
(seed, hash of the batch labels), so batches reproduce bit-identically and
may run in any order or in parallel without affecting each other.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np
from scipy import stats as _scipy_stats

from .protocols.supersafe import AdversaryStrategy, BatchResult


def stream_for(seed: int, *labels) -> np.random.Generator:
    """Independent Philox stream for (seed, labels)."""
    digest = hashlib.sha256("\x1f".join(str(x) for x in labels).encode()).digest()
    key = int.from_bytes(digest[:8], "big")
    return np.random.Generator(np.random.Philox(key=[seed & (2**64 - 1), key]))


@dataclass
class TrialBatch:
    protocol: str
    input: str
    prover: str
    trials: int
    seed: int
    histogram: dict[str, int]
    steps_mean: float
    steps_p50: float
    steps_p99: float
    space_peak: int = 0
    params: str = ""

    @property
    def accept_rate(self) -> float:
        return self.histogram["Accept"] / self.trials

    @property
    def reject_rate(self) -> float:
        return self.histogram["Reject"] / self.trials

    @property
    def timeout_rate(self) -> float:
        return self.histogram["Timeout"] / self.trials

    @property
    def halting_rate(self) -> float:
        return 1.0 - self.timeout_rate


def batch_from_result(
    protocol: str, w: str, prover: str, seed: int, result: BatchResult,
    params: str = "",
) -> TrialBatch:
    steps = result.steps
    hist = result.counts()
    n = len(steps)
    assert sum(hist.values()) == n
    return TrialBatch(
        protocol=protocol,
        input=w,
        prover=prover,
        trials=n,
        seed=seed,
        histogram=hist,
        steps_mean=float(steps.mean()),
        steps_p50=float(np.quantile(steps, 0.5)),
        steps_p99=float(np.quantile(steps, 0.99)),
        params=params,
    )


def run_trials(
    protocol, w: str, strategy: AdversaryStrategy | str, trials: int, seed: int
) -> TrialBatch:
    """N independent interactions with a batch stream derived from the seed
    and the batch labels; the same call reproduces byte-identical results."""
    if trials < 1:
        raise ValueError("need at least one trial")
    if isinstance(strategy, str):
        strategy = AdversaryStrategy.parse(strategy)
    label = strategy.kind
    if strategy.kind == "mix":
        label += ":" + ",".join(str(t) for t in strategy.t_vector)
    rng = stream_for(seed, protocol.name, w, label, trials)
    result = protocol.sample_batch(w, strategy, trials, rng)
    proto_params = getattr(protocol, "params", None)
    params_label = ""
    if proto_params is not None and hasattr(proto_params, "to_dict"):
        d = proto_params.to_dict()
        params_label = f"p={d['p']},m={d['m']},eps_v={d['eps_v']}"
    return batch_from_result(protocol.name, w, label, seed, result, params_label)


# --- intervals ----------------------------------------------------------------


def wilson_interval(successes: int, trials: int, confidence: float):
    """Wilson score interval for a binomial proportion."""
    if not 0 <= successes <= trials:
        raise ValueError("successes must lie in [0, trials]")
    z = NormalDist().inv_cdf((1 + confidence) / 2)
    n = trials
    phat = successes / n
    denom = n + z * z
    center = (successes + z * z / 2) / denom
    half = z * math.sqrt(phat * (1 - phat) * n + z * z / 4) / denom
    return max(0.0, center - half), min(1.0, center + half)


def binomial_interval(p: float, trials: int, confidence: float = 0.99):
    """Acceptance region for a Binomial(trials, p) count."""
    lo, hi = _scipy_stats.binom.interval(confidence, trials, p)
    return int(lo), int(hi)


# --- success-gap estimation -----------------------------------------------------


@dataclass
class GapReport:
    """Library-relative success-gap estimate over a finite test set.

    The quantum side takes the worst (lowest) acceptance lower bound over
    the test set; the classical side takes the best (highest) non-rejection
    upper bound over all library adversaries and inputs.  The gap subtracts
    conservative interval ends, never raw point estimates.
    """

    protocol: str
    test_set: list[str]
    excluded: list[tuple[str, str]]
    confidence: float
    quantum_rows: list[dict]
    classical_rows: list[dict]
    quantum_low: float
    classical_high: float
    gap: float
    p_halt: float
    halting_regime: str
    scope_note: str = (
        "classical bound is library-relative over the listed adversaries "
        "and the finite test set shown"
    )

    def to_dict(self) -> dict:
        return {
            "protocol": self.protocol,
            "test_set": self.test_set,
            "excluded": self.excluded,
            "confidence": self.confidence,
            "quantum_rows": self.quantum_rows,
            "classical_rows": self.classical_rows,
            "quantum_lower_bound": self.quantum_low,
            "classical_upper_bound": self.classical_high,
            "gap_estimate": self.gap,
            "halting_probability_estimate": self.p_halt,
            "halting_regime": self.halting_regime,
            "scope_note": self.scope_note,
        }


def estimate_gap(
    protocol,
    test_set,
    adversaries,
    trials: int,
    seed: int,
    quantum: AdversaryStrategy | str = "quantum",
    confidence: float = 0.99,
) -> GapReport:
    """Trial batches for the quantum prover and every library adversary on
    every promise-satisfying input; conservative gap from interval ends."""
    included, excluded = [], []
    for w in test_set:
        if hasattr(protocol, "promise_ok") and not protocol.promise_ok(w):
            excluded.append((w, "promise violation"))
        else:
            included.append(w)
    if not included:
        raise ValueError("no promise-satisfying inputs in the test set")
    quantum_rows, classical_rows = [], []
    total_runs = 0
    total_halts = 0
    q_low = 1.0
    for w in included:
        batch = run_trials(protocol, w, quantum, trials, seed)
        low, _ = wilson_interval(batch.histogram["Accept"], trials, confidence)
        quantum_rows.append(
            {"input": w, "accept_rate": batch.accept_rate, "lower": low}
        )
        q_low = min(q_low, low)
        total_runs += trials
        total_halts += trials - batch.histogram["Timeout"]
    c_high = 0.0
    for adv in adversaries:
        strategy = AdversaryStrategy.parse(adv) if isinstance(adv, str) else adv
        for w in included:
            batch = run_trials(protocol, w, strategy, trials, seed)
            nonreject = trials - batch.histogram["Reject"]
            _, high = wilson_interval(nonreject, trials, confidence)
            classical_rows.append(
                {
                    "adversary": batch.prover,
                    "input": w,
                    "nonreject_rate": nonreject / trials,
                    "upper": high,
                }
            )
            c_high = max(c_high, high)
            total_runs += trials
            total_halts += trials - batch.histogram["Timeout"]
    return GapReport(
        protocol=protocol.name,
        test_set=included,
        excluded=excluded,
        confidence=confidence,
        quantum_rows=quantum_rows,
        classical_rows=classical_rows,
        quantum_low=q_low,
        classical_high=c_high,
        gap=q_low - c_high,
        p_halt=total_halts / total_runs,
        halting_regime="promise-satisfying inputs only",
    )


# --- serialization ---------------------------------------------------------------

CSV_COLUMNS = [
    "protocol",
    "input",
    "prover",
    "trials",
    "accept",
    "reject",
    "timeout",
    "steps_mean",
    "steps_p99",
    "space_peak",
    "seed",
]


def batches_to_csv(batches) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for b in batches:
        writer.writerow(
            [
                b.protocol,
                b.input,
                b.prover,
                b.trials,
                b.histogram["Accept"],
                b.histogram["Reject"],
                b.histogram["Timeout"],
                repr(b.steps_mean),
                repr(b.steps_p99),
                b.space_peak,
                b.seed,
            ]
        )
    return buf.getvalue()


def batches_from_csv(text: str) -> list[TrialBatch]:
    rows = list(csv.reader(io.StringIO(text)))
    if rows and rows[0] == CSV_COLUMNS:
        rows = rows[1:]
    out = []
    for r in rows:
        if not r:
            continue
        accept, reject, timeout = int(r[4]), int(r[5]), int(r[6])
        out.append(
            TrialBatch(
                protocol=r[0],
                input=r[1],
                prover=r[2],
                trials=int(r[3]),
                seed=int(r[10]),
                histogram={"Accept": accept, "Reject": reject, "Timeout": timeout},
                steps_mean=float(r[7]),
                steps_p50=float("nan"),
                steps_p99=float(r[8]),
                space_peak=int(r[9]),
            )
        )
    return out


def emit_results(payload, path, fmt: str = "csv") -> None:
    """Bit-reproducible serialization of batches or a gap report."""
    if fmt == "csv":
        if isinstance(payload, TrialBatch):
            payload = [payload]
        text = batches_to_csv(payload)
    elif fmt in ("json", "structured-text"):
        if isinstance(payload, GapReport):
            text = json.dumps(payload.to_dict(), indent=1) + "\n"
        elif isinstance(payload, TrialBatch):
            text = json.dumps(payload.__dict__, indent=1) + "\n"
        else:
            text = json.dumps(payload, indent=1, default=str) + "\n"
    else:
        raise ValueError(f"unknown format {fmt!r}")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
