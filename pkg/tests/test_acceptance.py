"""Acceptance suite: every criterion at its stated tolerance, one printed
pass/fail line each.  Run with `pytest -s tests/test_acceptance.py` to see
the lines; each criterion also records its runtime against its budget.
"""

import itertools
import math
import time
from fractions import Fraction

import numpy as np

from poqlab.harness import (
    batches_to_csv,
    binomial_interval,
    estimate_gap,
    run_trials,
    stream_for,
)
from poqlab.languages import LanguageId, membership, pad
from poqlab.machines_zoo import ANALYZER_PTMS, complement, eq_machine, pal_machine
from poqlab.markov import analyze, run_batch_compiled, wrap_for_analysis
from poqlab.protocols.clock import CALIBRATION, ClockSampler
from poqlab.protocols.freivalds import exact_accept_probability, parse_blocks
from poqlab.protocols.padded import PaddedProtocol
from poqlab.protocols.params import default_params, rounds_for
from poqlab.protocols.recursion import exhaustive_min_f1, f_recursion, min_f1
from poqlab.protocols.square import SquareProtocol
from poqlab.protocols.supersafe import (
    AdversaryStrategy,
    SupersafeProtocol,
    precompute,
    sample_adversary_batch,
)
from poqlab.quantum import basis_measurement, coin_qcfa, hadamard, run_qcfa
from poqlab.classical import Verdict


def report(num, description, ok, started, budget_s, detail=""):
    elapsed = time.time() - started
    line = f"[criterion {num:2d}] {'PASS' if ok else 'FAIL'} " \
           f"({elapsed:6.1f}s / {budget_s}s budget) {description}"
    if detail:
        line += f" :: {detail}"
    print(line)
    assert ok, line
    assert elapsed < budget_s, f"criterion {num} exceeded its runtime budget"


def eq_members(max_len):
    out = []
    for n in range(0, max_len + 1, 2):
        for tup in itertools.product("ab", repeat=n):
            w = "".join(tup)
            if membership(LanguageId.EQ, w):
                out.append(w)
    return out


def test_criterion_1_honest_completeness():
    started = time.time()
    members = eq_members(10)
    assert len(members) == 351
    bad = 0
    for p, m in ((Fraction(1, 4), 5), (Fraction(1, 4), 33)):
        proto = SupersafeProtocol(eq_machine(), p, m)
        for w in members:
            batch = run_trials(proto, w, "honest", 1000, seed=101)
            if batch.histogram["Reject"] or batch.histogram["Timeout"]:
                bad += 1
    report(
        1,
        "honest completeness: zero rejections/timeouts over all members",
        bad == 0,
        started,
        60,
        f"{len(members)} members x 2 configs x 1000 trials",
    )


def test_criterion_2_recursion_law():
    started = time.time()
    ok = True
    for p in (Fraction(1, 10), Fraction(1, 5), Fraction(1, 4), Fraction(1, 3)):
        m = rounds_for(p)
        _, value = min_f1(p, m)
        ok &= value >= 1 - p
    for m in range(1, 13):
        ok &= min_f1(Fraction(1, 4), m)[1] == exhaustive_min_f1(Fraction(1, 4), m)
    report(
        2,
        "rejection-recursion law and endpoint-vs-exhaustive equality",
        ok,
        started,
        60,
    )


def _mix_grid():
    ps = (Fraction(1, 10), Fraction(1, 5), Fraction(1, 4), Fraction(1, 3))
    ms = (1, 3, 5, 8, 12)
    base = [
        Fraction(1, 2), Fraction(0), Fraction(1), Fraction(1, 3),
        Fraction(3, 4), Fraction(1, 4), Fraction(2, 3), Fraction(1, 2),
        Fraction(1), Fraction(0), Fraction(1, 5), Fraction(4, 5),
    ]
    grid = []
    for p in ps:
        for m in ms:
            t = tuple(base[(i * 7 + m) % len(base)] for i in range(m))
            grid.append((p, m, t))
    return grid


def test_criterion_3_adversarial_soundness():
    started = time.time()
    grid = _mix_grid()
    assert len(grid) == 20
    machine = eq_machine()
    data = precompute(machine, "aab")
    n = 10**4
    failures = []
    for cell, (p, m, t) in enumerate(grid):
        f1 = float(f_recursion(p, m, t))
        rng = stream_for(303, "criterion3", cell)
        batch = sample_adversary_batch(
            data, p, m, AdversaryStrategy(kind="mix", t_vector=t), n, rng, 10**7
        )
        lo, hi = binomial_interval(f1, n, 0.99)
        rejects = batch.counts()["Reject"]
        if not lo <= rejects <= hi:
            failures.append((str(p), m, rejects, lo, hi))
    report(
        3,
        "per-round-mix rejection matches f(1) within the 99% interval",
        not failures,
        started,
        600,
        f"20 cells x 10^4 trials{'; failures: ' + repr(failures) if failures else ''}",
    )


def test_criterion_4_clock_contract():
    started = time.time()
    eps = 0.1
    n_trials = 10**4
    ok = True
    details = []
    for c, t in ((1, 1), (1, 2)):
        reps, cc = CALIBRATION[(c, t)]
        for n in (4, 8, 16):
            sampler = ClockSampler(n, t, reps)
            steps = sampler.sample_many(n_trials, stream_for(404, "clock", c, t, n))
            premature = float((steps < c * n**t).mean())
            mean = float(steps.mean())
            ok &= premature <= eps + 0.03
            ok &= mean <= cc * n ** (t + 1)
            details.append(f"({c},{t},{n}): prem={premature:.3f} mean={mean:.0f}")
    report(4, "alarm-clock contract", ok, started, 600, "; ".join(details))


PAL_CORES = ["aba", "abba", "ababa", "abbbba"]


def _pal_protocol():
    m = pal_machine()
    return PaddedProtocol(
        LanguageId.PAL, m, complement(m), default_params("padded-pal")
    )


def test_criterion_5_padded_completeness():
    started = time.time()
    params = default_params("padded-pal")
    target = (
        (1 - float(params.eps_premature))
        * (1 - 1 / params.c1)
        * (1 - float(params.eps_q))
    )
    assert target >= 0.9
    proto = _pal_protocol()
    ok = True
    details = []
    for core in PAL_CORES:
        w = pad(core).render()
        batch = run_trials(proto, w, "quantum", 10**4, seed=505)
        rate = batch.accept_rate
        ok &= rate >= 0.87
        details.append(f"{core}: {rate:.4f}")
    report(
        5,
        "padded completeness >= 0.87 (parameter product >= 0.9)",
        ok,
        started,
        900,
        "; ".join(details),
    )


def test_criterion_6_padded_soundness():
    started = time.time()
    proto = _pal_protocol()
    eps_v = float(proto.params.eps_v)
    floor = (1 - eps_v) / 2 - 0.03
    ok = True
    details = []
    # conditioning on wrong announcements: the uniform announcement draw is
    # independent of the rest of the run, so the conditional rejection law
    # equals the wrong-forced strategy's unconditional law
    wrong = AdversaryStrategy(
        kind="mix", t_vector=(Fraction(1),) * proto.params.m, announce="wrong"
    )
    for core in PAL_CORES:
        w = pad(core).render()
        batch = proto.sample_batch(w, wrong, 10**4, stream_for(606, "c6", core))
        rate = batch.counts()["Reject"] / 10**4
        ok &= rate >= floor
        details.append(f"{core}: rej|wrong={rate:.4f}")
        batch = run_trials(proto, w, "no-answer", 10**4, seed=607)
        ok &= batch.histogram["Reject"] == 10**4
    report(
        6,
        f"padded soundness: rejection|wrong >= {floor:.3f}; silence always rejected",
        ok,
        started,
        900,
        "; ".join(details),
    )


def test_criterion_7_square_bounds():
    started = time.time()
    params = default_params("square")
    proto = SquareProtocol(params)
    p = float(params.p)
    k_f = proto.k_f
    ok = True
    details = []
    for i in (1, 2, 3):
        core = "a" * i + "b" * (i * i)
        w = pad(core).render()
        batch = run_trials(proto, w, "quantum", 10**4, seed=707)
        rate = batch.accept_rate
        ok &= rate >= 0.85
        details.append(f"honest i={i}: {rate:.4f}")
        # strategy 1 at two defect positions
        horizon = params.K * 2 ** (k_f * i)
        ruler_term = (1 - 2.0 ** (-params.h_v * i)) ** min(horizon, 10**9)
        bound1 = 1 - p * ruler_term + 0.03
        for pos in (1, 3 * i):
            st = AdversaryStrategy(
                kind="strategy1", defect_position=pos, announce="wrong"
            )
            batch = proto.sample_batch(w, st, 10**4, stream_for(708, "s1", i, pos))
            c = batch.counts()
            nonreject = (c["Accept"] + c["Timeout"]) / 10**4
            ok &= nonreject <= bound1
        # strategy 2 on wrong-announcement cores
        st2 = AdversaryStrategy(kind="strategy2", announce="wrong")
        batch = proto.sample_batch(w, st2, 10**4, stream_for(709, "s2", i))
        c = batch.counts()
        nonreject = (c["Accept"] + c["Timeout"]) / 10**4
        bound2 = p + (1 - p) / params.K + (1 - p) / 2 + 0.03
        ok &= nonreject <= bound2
        details.append(f"s2 i={i}: {nonreject:.3f}<={bound2:.3f}")
    gap = estimate_gap(
        proto,
        [pad("a" * i + "b" * (i * i)).render() for i in (1, 2, 3)],
        ["no-answer", "random-answer", "strategy1:1", "strategy2"],
        trials=10**4,
        seed=710,
    )
    ok &= gap.gap > 0.15
    ok &= gap.classical_high <= 2 / 3 + 0.05
    details.append(
        f"gap={gap.gap:.3f} classical_high={gap.classical_high:.3f}"
    )
    report(7, "square-protocol bounds and library-relative gap", ok, started,
           1800, "; ".join(details))


def test_criterion_8_freivalds_recognizer():
    started = time.time()
    c_f, d_f = 8, 8
    n = 10**4
    worst = 0.0
    ok = True
    idx = 0
    for total in range(0, 21):
        for i in range(0, total + 1):
            j = total - i
            w = "a" * i + "b" * j
            member = i == j
            exact = float(exact_accept_probability(w, c_f, d_f))
            shape = parse_blocks(w)
            rng = stream_for(808, "freivalds", idx)
            idx += 1
            if shape.format_defect is not None or (
                (shape.i, shape.j) != (0, 0) and (shape.i - shape.j) % c_f
            ):
                accepts = 0  # deterministic screening
            elif (shape.i, shape.j) == (0, 0):
                accepts = n
            else:
                from poqlab.protocols.freivalds import sample_recognizer_batch

                accepts = sample_recognizer_batch(w, c_f, d_f, n, rng)
            err = 1 - accepts / n if member else accepts / n
            worst = max(worst, err)
            ok &= err <= 0.1
    report(
        8,
        "comparator two-sided error <= 0.1 on all block inputs to n=20",
        ok,
        started,
        600,
        f"worst observed error {worst:.4f}",
    )


SPLITS = [("a", "b"), ("ab", "a"), ("aab", "ab"), ("ab", "bab"), ("b", "a")]


def test_criterion_9_markov_faithfulness():
    started = time.time()
    n = 10**5
    ok = True
    details = []
    for name, factory in sorted(ANALYZER_PTMS.items()):
        spec = factory()
        for x, y in SPLITS[:2] if name != "shuttle" else SPLITS:
            res = analyze(spec, x, y)
            # rewired rows sum to exactly 1 in rational arithmetic
            for row in res.rewired.matrix:
                assert sum(row) == 1
            exact = float(res.report.p_accept)
            verdict, _, _, _ = run_batch_compiled(
                wrap_for_analysis(spec),
                x + y,
                n,
                stream_for(909, "markov", name, x, y),
                2000,
            )
            accepts = int((verdict == 0).sum())
            lo, hi = binomial_interval(exact, n, 0.99)
            cell_ok = lo <= accepts <= hi
            ok &= cell_ok
            if not cell_ok:
                details.append(f"{name} {x}|{y}: {accepts} not in [{lo},{hi}]")
    report(
        9,
        "exact absorption matches 10^5-trial simulation on all shipped machines",
        ok,
        started,
        600,
        "; ".join(details) if details else "all cells in interval",
    )


def test_criterion_10_quantum_engine():
    started = time.time()
    rng = stream_for(1010, "quantum")
    # invariants on 100 random registers per shipped action
    from poqlab.quantum import QuantumRegister, apply_action

    ok = True
    for action in (hadamard(), basis_measurement()):
        for _ in range(100):
            v = rng.normal(size=2) + 1j * rng.normal(size=2)
            reg = QuantumRegister(v / np.linalg.norm(v))
            out, _ = apply_action(reg, action, rng)
            ok &= abs(float(np.vdot(out.amplitudes, out.amplitudes).real) - 1) <= 1e-9
    spec = coin_qcfa()
    n = 10**5
    details = []
    for m in range(1, 7):
        g = stream_for(1011, "coin", m)
        accepts = sum(
            run_qcfa(spec, "a" * m, g).verdict is Verdict.ACCEPT for _ in range(n)
        )
        pexp = 2.0**-m
        sigma = math.sqrt(pexp * (1 - pexp) / n)
        dev = abs(accepts / n - pexp)
        ok &= dev <= 3 * sigma
        details.append(f"m={m}: dev={dev / sigma:.2f} sigma")
    report(10, "quantum engine invariants and coin-machine curve", ok, started,
           300, "; ".join(details))


def test_criterion_11_witnesses():
    started = time.time()
    from poqlab.witnesses import check_separation_witness, pal_witness, twin_witness

    pal = check_separation_witness(pal_witness(samples=(2, 4, 6, 8)))
    twin = check_separation_witness(twin_witness(samples=(3, 5, 7)))
    report(
        11,
        "padded separation witnesses verified verbatim at the sampled sizes",
        pal.all_pass and twin.all_pass,
        started,
        60,
    )


def test_criterion_12_reproducibility():
    started = time.time()
    proto = SupersafeProtocol(eq_machine(), Fraction(1, 4), 5)
    rows1 = [run_trials(proto, w, "honest", 1000, seed=101) for w in ("ab", "abab")]
    rows2 = [run_trials(proto, w, "honest", 1000, seed=101) for w in ("ab", "abab")]
    csv1, csv2 = batches_to_csv(rows1), batches_to_csv(rows2)
    sq = SquareProtocol(default_params("square"))
    w = pad("aabbbb").render()
    b1 = run_trials(sq, w, "strategy2", 2000, seed=7)
    b2 = run_trials(sq, w, "strategy2", 2000, seed=7)
    ok = csv1.encode() == csv2.encode() and batches_to_csv([b1]) == batches_to_csv(
        [b2]
    )
    report(12, "same seed emits byte-identical CSV", ok, started, 120)
