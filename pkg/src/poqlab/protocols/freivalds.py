"""Probabilistic equality of two symbol counts by coin-group tournaments.

Per sweep of the input, every a and every b gets a fair coin; a group whose
coins all land heads scores a goal, and a sweep where exactly one group
scores is a win for that group.  After d_F total wins, both counters being
nonzero is read as "counts equal".  A modulo-c_F congruence check runs in
parallel and catches any count gap below c_F deterministically, so the
tournament only ever has to separate goal probabilities at ratio 2^{c_F} or
more.

Used standalone as a recognizer for a^n b^n, and embedded in the square
protocol to compare the a-block against the prover's segment separators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from ..classical import BLANK, PtmSpec, RunOutcome, Verdict
from ..languages import LEFT_END, RIGHT_END

DEFAULT_CF = 8
DEFAULT_DF = 8


def goal_probability(count: int) -> Fraction:
    """All fair coins of a group land heads; an empty group scores always."""
    return Fraction(1, 2**count)


def win_statistics(count_a: int, count_b: int) -> tuple[Fraction, Fraction]:
    """(per-sweep win probability, probability a win is an a-type win)."""
    pa, pb = goal_probability(count_a), goal_probability(count_b)
    p_win = pa * (1 - pb) + pb * (1 - pa)
    if p_win == 0:
        return p_win, Fraction(0)
    return p_win, pa * (1 - pb) / p_win


def equal_conclusion_probability(count_a: int, count_b: int, d_f: int) -> Fraction:
    """Probability the tournament ends with both counters nonzero."""
    p_win, q = win_statistics(count_a, count_b)
    if p_win == 0:
        raise ValueError("tournament never finishes for these counts")
    return 1 - q**d_f - (1 - q) ** d_f


@dataclass
class BlockShape:
    """a^i b^j parse of an input, or None when the shape is violated."""

    i: int
    j: int
    format_defect: int | None  # 1-based position of the first a after a b


def parse_blocks(w: str) -> BlockShape:
    i = 0
    while i < len(w) and w[i] == "a":
        i += 1
    rest = w[i:]
    defect = next(
        (i + k + 1 for k, c in enumerate(rest) if c != "b"),
        None,
    )
    return BlockShape(i=i, j=len(rest), format_defect=defect)


def exact_accept_probability(w: str, c_f: int, d_f: int) -> Fraction:
    """Closed-form acceptance probability of the recognizer."""
    shape = parse_blocks(w)
    if shape.format_defect is not None:
        return Fraction(0)
    i, j = shape.i, shape.j
    if i == 0 and j == 0:
        return Fraction(1)
    if (i - j) % c_f != 0:
        return Fraction(0)
    return equal_conclusion_probability(i, j, d_f)


def sample_recognizer(w: str, c_f: int, d_f: int, rng) -> RunOutcome:
    """Sweep-level run of the recognizer: deterministic format/congruence
    screening, then the tournament sampled win by win."""
    n = len(w)
    shape = parse_blocks(w)
    if shape.format_defect is not None:
        return RunOutcome(Verdict.REJECT, shape.format_defect + 1)
    i, j = shape.i, shape.j
    if i == 0 and j == 0:
        return RunOutcome(Verdict.ACCEPT, 2)
    first_pass = n + 2
    if (i - j) % c_f != 0:
        return RunOutcome(Verdict.REJECT, first_pass)
    p_win, q = win_statistics(i, j)
    sweeps = int(rng.geometric(float(p_win), size=d_f).sum())
    wins_a = int(rng.binomial(d_f, float(q)))
    both = 0 < wins_a < d_f
    verdict = Verdict.ACCEPT if both else Verdict.REJECT
    return RunOutcome(verdict, first_pass + sweeps * (n + 1))


def sample_recognizer_batch(w: str, c_f: int, d_f: int, trials: int, rng):
    """Vectorized acceptance count over independent runs on one input."""
    shape = parse_blocks(w)
    if shape.format_defect is not None:
        return 0
    if shape.i == 0 and shape.j == 0:
        return trials
    if (shape.i - shape.j) % c_f != 0:
        return 0
    _, q = win_statistics(shape.i, shape.j)
    wins_a = rng.binomial(d_f, float(q), size=trials)
    return int(((wins_a > 0) & (wins_a < d_f)).sum())


def analytic_max_error(c_f: int, d_f: int, n_max: int = 20) -> Fraction:
    """Worst two-sided error over all block-shaped inputs with |w| <= n_max."""
    worst = Fraction(0)
    for i in range(n_max + 1):
        for j in range(n_max + 1 - i):
            if i == j == 0:
                continue
            acc = exact_accept_probability("a" * i + "b" * j, c_f, d_f)
            err = 1 - acc if i == j else acc
            worst = max(worst, err)
    return worst


def calibrate_freivalds(
    target: float = 0.1, n_max: int = 20, c_range=range(2, 12), d_range=range(2, 14)
):
    """Smallest (c_f, d_f) meeting the target analytic error on the grid."""
    best = None
    for c_f in c_range:
        for d_f in d_range:
            err = analytic_max_error(c_f, d_f, n_max)
            if float(err) <= target and (best is None or c_f + d_f < best[0] + best[1]):
                best = (c_f, d_f, err)
    if best is None:
        raise RuntimeError("no parameters met the target on the grid")
    return {"c_f": best[0], "d_f": best[1], "max_error": float(best[2])}


def runtime_exponent(d_f: int, i_max: int = 6) -> int:
    """Smallest integer k with expected tournament steps <= 2^(k*i) for all
    block sizes up to i_max, sizing the square protocol's request horizon."""
    k = 1
    for i in range(1, i_max + 1):
        p_win, _ = win_statistics(i, i)
        mean_steps = (i + i * i + 2) + d_f / float(p_win) * (i + i * i + 1)
        k = max(k, math.ceil(math.log2(mean_steps) / i))
    return k


# --- literal transition table (small parameters) -----------------------------


def freivalds_eq_table(c_f: int = 3, d_f: int = 2, alphabet=("a", "b")) -> PtmSpec:
    """Explicit 2PFA for the recognizer; practical for small (c_f, d_f)."""
    half = Fraction(1, 2)
    one = Fraction(1)
    trans = {}
    states = {"acc", "rej", "init", "virgin"}

    # phase 1: format and (i - j) mod c_f screening, one left-to-right pass
    trans[("init", LEFT_END, BLANK)] = [(one, ("virgin", BLANK, 1, 0))]
    trans[("virgin", RIGHT_END, BLANK)] = [(one, ("acc", BLANK, 0, 0))]
    trans[("virgin", "a", BLANK)] = [(one, (f"p1a_{1 % c_f}", BLANK, 1, 0))]
    trans[("virgin", "b", BLANK)] = [(one, (f"p1b_{(-1) % c_f}", BLANK, 1, 0))]
    for d in range(c_f):
        states.add(f"p1a_{d}")
        states.add(f"p1b_{d}")
        trans[(f"p1a_{d}", "a", BLANK)] = [(one, (f"p1a_{(d + 1) % c_f}", BLANK, 1, 0))]
        trans[(f"p1a_{d}", "b", BLANK)] = [(one, (f"p1b_{(d - 1) % c_f}", BLANK, 1, 0))]
        trans[(f"p1b_{d}", "b", BLANK)] = [(one, (f"p1b_{(d - 1) % c_f}", BLANK, 1, 0))]
        trans[(f"p1b_{d}", "a", BLANK)] = [(one, ("rej", BLANK, 0, 0))]
        for st in (f"p1a_{d}", f"p1b_{d}"):
            target = "t_L_11_0_0" if d == 0 else "rej"
            move = -1 if d == 0 else 0
            trans[(st, RIGHT_END, BLANK)] = [(one, (target, BLANK, move, 0))]

    # tournament states: t_{dir}_{aliveA}{aliveB}_{ca}_{cb}
    def tname(direction, a_alive, b_alive, ca, cb):
        return f"t_{direction}_{int(a_alive)}{int(b_alive)}_{ca}_{cb}"

    counter_pairs = [
        (ca, cb) for ca in range(d_f) for cb in range(d_f) if ca + cb < d_f
    ]
    for direction in "LR":
        step = -1 if direction == "L" else 1
        for a_alive in (False, True):
            for b_alive in (False, True):
                for ca, cb in counter_pairs:
                    name = tname(direction, a_alive, b_alive, ca, cb)
                    states.add(name)
                    # interior coins
                    if a_alive:
                        trans[(name, "a", BLANK)] = [
                            (half, (name, BLANK, step, 0)),
                            (half, (tname(direction, False, b_alive, ca, cb), BLANK, step, 0)),
                        ]
                    else:
                        trans[(name, "a", BLANK)] = [(one, (name, BLANK, step, 0))]
                    if b_alive:
                        trans[(name, "b", BLANK)] = [
                            (half, (name, BLANK, step, 0)),
                            (half, (tname(direction, a_alive, False, ca, cb), BLANK, step, 0)),
                        ]
                    else:
                        trans[(name, "b", BLANK)] = [(one, (name, BLANK, step, 0))]
                    # sweep end: evaluate goals, maybe a win, reset coins
                    end_sym = LEFT_END if direction == "L" else RIGHT_END
                    new_dir = "R" if direction == "L" else "L"
                    move = 1 if direction == "L" else -1
                    win_a = a_alive and not b_alive
                    win_b = b_alive and not a_alive
                    ca2, cb2 = ca + int(win_a), cb + int(win_b)
                    if win_a or win_b:
                        if ca2 + cb2 == d_f:
                            verdict = "acc" if (ca2 > 0 and cb2 > 0) else "rej"
                            trans[(name, end_sym, BLANK)] = [
                                (one, (verdict, BLANK, 0, 0))
                            ]
                            continue
                    trans[(name, end_sym, BLANK)] = [
                        (one, (tname(new_dir, True, True, ca2, cb2), BLANK, move, 0))
                    ]
                    # stray opposite endmarker rows for totality on n=0 cases
                    other = RIGHT_END if direction == "L" else LEFT_END
                    trans.setdefault(
                        (name, other, BLANK), [(one, ("rej", BLANK, 0, 0))]
                    )
    return PtmSpec(
        name=f"freivalds_eq_c{c_f}_d{d_f}",
        states=sorted(states),
        input_alphabet=list(alphabet),
        work_alphabet=[BLANK],
        transitions=trans,
        start="init",
        accept="acc",
        reject="rej",
    )
