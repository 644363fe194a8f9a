"""Exact rejection-probability recursion for the round-based verifier.

Against a prover whose round-i transmissions match the genuine readings with
probability t_i, the verifier's rejection probability on a non-member is at
least f(1), where

    f(i) = (1-p)·t_i·f(i+1) + (1-p)·(1-t_i) + p·t_i      for i < m
    f(m) = (1-p)·(1-t_m) + p·t_m

f(i) is linear in t_i, so per-coordinate minima sit at endpoints, and f(i)
is nondecreasing in f(i+1), so backward induction over {0,1} choices yields
the global minimum of f(1).
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from .params import parse_rational


def f_recursion(p, m: int, t) -> Fraction:
    """Evaluate f(1) exactly for the given per-round match probabilities."""
    p = parse_rational(p)
    t = [parse_rational(x) for x in t]
    if len(t) != m:
        raise ValueError(f"need {m} per-round probabilities, got {len(t)}")
    if not all(0 <= x <= 1 for x in t):
        raise ValueError("match probabilities must lie in [0, 1]")
    f = (1 - p) * (1 - t[m - 1]) + p * t[m - 1]
    for i in range(m - 2, -1, -1):
        f = (1 - p) * t[i] * f + (1 - p) * (1 - t[i]) + p * t[i]
    return f


def f_profile(p, m: int, t) -> list[Fraction]:
    """All values f(1..m), mostly for tests and reports."""
    p = parse_rational(p)
    t = [parse_rational(x) for x in t]
    out = [Fraction(0)] * m
    out[m - 1] = (1 - p) * (1 - t[m - 1]) + p * t[m - 1]
    for i in range(m - 2, -1, -1):
        out[i] = (1 - p) * t[i] * out[i + 1] + (1 - p) * (1 - t[i]) + p * t[i]
    return out


def min_f1(p, m: int, grid_resolution: int = 2) -> tuple[tuple[int, ...], Fraction]:
    """Minimize f(1) over per-round strategies.

    Linearity in each t_i puts every optimum at an endpoint of any grid
    {0, 1/(g-1), ..., 1}, so backward induction over {0,1} suffices for any
    grid_resolution >= 2.  Returns (minimizing endpoint vector, min f(1)).
    """
    if grid_resolution < 2:
        raise ValueError("grid resolution must be at least 2")
    p = parse_rational(p)
    zero_val = 1 - p  # f(i) with t_i = 0, any continuation
    # base round
    one_val = p
    if one_val <= zero_val:
        f_min, choice = one_val, 1
    else:
        f_min, choice = zero_val, 0
    choices = [choice]
    for _ in range(m - 1):
        one_val = f_min + p * (1 - f_min)
        if one_val <= zero_val:
            f_min, choice = one_val, 1
        else:
            f_min, choice = zero_val, 0
        choices.append(choice)
    choices.reverse()
    return tuple(choices), f_min


def exhaustive_min_f1(p, m: int, grid_resolution: int = 2) -> Fraction:
    """Brute-force minimum of f(1) over the full grid; cross-check oracle."""
    p = parse_rational(p)
    g = grid_resolution
    levels = [Fraction(i, g - 1) for i in range(g)]
    best = None
    for t in itertools.product(levels, repeat=m):
        val = f_recursion(p, m, t)
        if best is None or val < best:
            best = val
    return best
