import math
from fractions import Fraction

import pytest

from poqlab.protocols.params import rounds_for
from poqlab.protocols.recursion import (
    exhaustive_min_f1,
    f_profile,
    f_recursion,
    min_f1,
)


def test_single_round_extremes():
    p = Fraction(1, 4)
    assert f_recursion(p, 1, [0]) == Fraction(3, 4)  # 1 - p
    assert f_recursion(p, 1, [1]) == Fraction(1, 4)  # p


def test_two_round_all_truthful():
    p = Fraction(1, 4)
    prof = f_profile(p, 2, [1, 1])
    assert prof[1] == Fraction(1, 4)
    assert prof[0] == Fraction(7, 16)


def test_all_truthful_closed_form():
    # t = 1 everywhere gives f(1) = 1 - (1-p)^m
    p = Fraction(1, 5)
    for m in range(1, 8):
        assert f_recursion(p, m, [1] * m) == 1 - (1 - p) ** m


def test_all_lying_gives_one_minus_p():
    p = Fraction(1, 3)
    for m in range(1, 8):
        assert f_recursion(p, m, [0] * m) == 1 - p


def test_min_f1_single_round():
    for p in (Fraction(1, 10), Fraction(2, 5)):
        t, v = min_f1(p, 1)
        assert v == p and t == (1,)


@pytest.mark.parametrize(
    "p", [Fraction(1, 10), Fraction(1, 5), Fraction(1, 4), Fraction(1, 3)]
)
def test_lower_bound_law(p):
    m = rounds_for(p)
    assert m == 2 * math.ceil(1 / (p * p)) + 1
    _, v = min_f1(p, m)
    assert v >= 1 - p
    assert v == 1 - p  # the cap is tight at this m


def test_endpoint_matches_exhaustive():
    p = Fraction(1, 4)
    for m in range(1, 10):
        assert min_f1(p, m)[1] == exhaustive_min_f1(p, m)


def test_endpoint_matches_finer_grid():
    # linearity per coordinate: finer grids cannot do better
    p = Fraction(3, 10)
    for m in range(1, 6):
        assert min_f1(p, m, 4)[1] == exhaustive_min_f1(p, m, 4)


def test_interior_grid_never_beats_endpoints():
    p = Fraction(1, 4)
    for m in (2, 3):
        assert exhaustive_min_f1(p, m, 5) >= min_f1(p, m)[1]


def test_invalid_inputs():
    with pytest.raises(ValueError):
        f_recursion(Fraction(1, 4), 3, [0, 1])
    with pytest.raises(ValueError):
        f_recursion(Fraction(1, 4), 1, [2])
    with pytest.raises(ValueError):
        min_f1(Fraction(1, 4), 3, grid_resolution=1)


def test_one_third_minimizes_square_tradeoff():
    # max(1-p, (1+p)/2) over a p grid is smallest at p = 1/3 with value 2/3
    grid = [Fraction(k, 100) for k in range(5, 100, 5)]
    if Fraction(1, 3) not in grid:
        grid.append(Fraction(1, 3))
    best = min(grid, key=lambda p: max(1 - p, (1 + p) / 2))
    assert best == Fraction(1, 3)
    assert max(1 - best, (1 + best) / 2) == Fraction(2, 3)
