import math
from fractions import Fraction

import numpy as np
import pytest

from poqlab.classical import Verdict, run_machine
from poqlab.protocols.freivalds import (
    analytic_max_error,
    calibrate_freivalds,
    equal_conclusion_probability,
    exact_accept_probability,
    freivalds_eq_table,
    goal_probability,
    runtime_exponent,
    sample_recognizer,
    sample_recognizer_batch,
    win_statistics,
)


def rng(seed=0):
    return np.random.default_rng(seed)


def test_goal_probability():
    assert goal_probability(0) == 1
    assert goal_probability(3) == Fraction(1, 8)


def test_equal_counts_win_split():
    p_win, q = win_statistics(4, 4)
    assert q == Fraction(1, 2)
    assert p_win == 2 * Fraction(1, 16) * Fraction(15, 16)


def test_exact_formulas():
    # members: wrong iff all wins land on one side
    assert exact_accept_probability("aabb", 3, 4) == 1 - Fraction(2, 16)
    # congruence screening is deterministic
    assert exact_accept_probability("aab", 5, 8) == 0  # 2 vs 1 differ mod 5
    assert exact_accept_probability("ba", 3, 2) == 0  # format violation
    assert exact_accept_probability("", 3, 2) == 1


def test_a_goal_frequency():
    # all-heads probability for three fair coins is 1/8
    g = rng(1)
    n = 10**5
    goals = (g.random((n, 3)) < 0.5).all(axis=1).sum()
    assert abs(goals / n - 0.125) <= 0.01


def test_table_machine_agrees_with_formula():
    spec = freivalds_eq_table(3, 2)
    g = rng(2)
    for w in ("ab", "aabb", "ba", "aab", "aaa"):
        n = 2500
        acc = sum(
            run_machine(spec, w, g, 10**5).verdict is Verdict.ACCEPT
            for _ in range(n)
        )
        exact = float(exact_accept_probability(w, 3, 2))
        assert abs(acc / n - exact) < 0.035, w


def test_sweep_sampler_agrees_with_formula():
    g = rng(3)
    for w in ("ab", "aaabbb", "aaaabbbb", "a" * 8):
        n = 4000
        acc = sample_recognizer_batch(w, 3, 4, n, g)
        exact = float(exact_accept_probability(w, 3, 4))
        assert abs(acc / n - exact) < 0.03, w


def test_sample_recognizer_outcome_and_steps():
    g = rng(4)
    out = sample_recognizer("aab", 5, 8, g)  # caught by congruence mod 5
    assert out.verdict is Verdict.REJECT
    assert out.steps == len("aab") + 2
    out = sample_recognizer("ba", 5, 8, g)
    assert out.verdict is Verdict.REJECT


def test_calibrated_defaults_meet_target():
    assert float(analytic_max_error(8, 8, 20)) <= 0.1


def test_calibration_search():
    res = calibrate_freivalds(target=0.1, n_max=12)
    assert float(res["max_error"]) <= 0.1


def test_runtime_exponent_monotone():
    assert runtime_exponent(8) >= runtime_exponent(2)


def test_member_acceptance_at_example_modulus():
    acc = exact_accept_probability("aaabbb", 5, 8)
    assert float(acc) >= 1 - 2 ** (1 - 8)
    g = rng(5)
    n = 10**4
    hits = sample_recognizer_batch("aabb", 5, 8, n, g)
    assert hits / n >= 1 - 2 ** (1 - 8) - 0.02


def test_empty_groups():
    # one empty group: its goal is vacuous, so wins go one way only
    p_win, q = win_statistics(0, 3)
    assert q == 1  # the empty a-group scores whenever the b-group misses
    assert equal_conclusion_probability(0, 3, 8) == 0
