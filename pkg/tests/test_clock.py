from fractions import Fraction

import numpy as np
import pytest

from poqlab.classical import Verdict, run_machine
from poqlab.markov import analyze
from poqlab.protocols.clock import (
    ClockSampler,
    IdealizedClock,
    calibrate_clock,
    default_reps,
    make_clock,
    measure_clock,
    round_distribution,
    ruin_walk,
)


def rng(seed=0):
    return np.random.default_rng(seed)


def test_ruin_walk_win_probability():
    g = rng(1)
    for n in (1, 3):
        wins = sum(ruin_walk(n, g)[0] for _ in range(2 * 10**4))
        assert abs(wins / (2 * 10**4) - 1 / (n + 1)) < 0.02


def test_round_distribution_win_mass():
    for n in (1, 2, 5):
        ls, lp, ws, wp = round_distribution(n)
        assert abs(lp.sum() + wp.sum() - 1) < 1e-12
        assert abs(wp.sum() - 1 / (n + 1)) < 1e-9
        # walk parity: steps to the top have the same parity as n
        assert all((s - n) % 2 == 0 for s in ws)


def test_clock_machine_always_accepts():
    spec = make_clock(1, 1, Fraction(1, 10), reps=1)
    out = run_machine(spec, "ab", rng(0), step_cap=10**6)
    assert out.verdict is Verdict.ACCEPT


def test_sampler_distribution_matches_machine():
    spec = make_clock(1, 1, Fraction(1, 10), reps=2)
    g = rng(1)
    n_trials = 3000
    gen = np.array(
        [run_machine(spec, "ab", g, 10**6).steps for _ in range(n_trials)]
    )
    fast = ClockSampler(2, 1, 2).sample_many(n_trials, rng(2))
    assert abs(gen.mean() - fast.mean()) < 3 * gen.std() / np.sqrt(n_trials) + 1e-9
    assert gen.min() == fast.min()
    assert np.median(gen) == np.median(fast)


def test_chain_analysis_of_clock_halts_certainly():
    spec = make_clock(1, 1, Fraction(1, 10), reps=1)
    res = analyze(spec, "a", "b")
    assert res.report.p_accept == 1
    assert not res.looping_states


def test_premature_bound_and_mean():
    for c, t in ((1, 1), (1, 2)):
        reps = default_reps(c, t)
        for n in (4, 8):
            row = measure_clock(n, t, reps, 3000, rng(42), c)
            assert row["premature"] <= 0.1 + 0.03
            assert row["mean_steps"] <= 3.5 * n ** (t + 1)


def test_calibration_returns_constants():
    out = calibrate_clock(1, 1, Fraction(1, 10), n_grid=(4, 8), trials=1500)
    assert out["reps"] >= 1 and out["C"] > 0


def test_idealized_clock_contract():
    clock = IdealizedClock(c=2, t=1, eps_premature=Fraction(1, 10))
    g = rng(3)
    n = 16
    thr = clock.threshold(n)
    assert thr == 32
    draws = np.array([clock.halt_time(n, g) for _ in range(2 * 10**4)])
    premature = (draws < thr).mean()
    assert abs(premature - 0.1) < 0.01  # mass below the threshold is exactly eps
    assert draws.min() >= 1
    assert draws.mean() <= 3 * thr  # O(n^t) tail


def test_idealized_clock_tiny_threshold():
    clock = IdealizedClock(c=1, t=1, eps_premature=Fraction(1, 10))
    g = rng(4)
    draws = [clock.halt_time(1, g) for _ in range(500)]
    assert all(d >= 1 for d in draws)


def test_make_clock_rejects_bad_parameters():
    with pytest.raises(ValueError):
        make_clock(0, 1, Fraction(1, 10))
    with pytest.raises(ValueError):
        make_clock(1, 1, Fraction(0))
