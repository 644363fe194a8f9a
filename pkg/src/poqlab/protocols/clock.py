"""Polynomial alarm clocks built from gambler's-ruin rounds.

The machine repeats symmetric random walks from position 1 over the input
(absorbing at both endmarkers).  Reaching the right end is a win; a streak
of t consecutive wins completes one experiment, and the machine halts after
`reps` completed experiments.  Expected runtime is Θ(n^{t+1}); the
premature-halt probability P[halt < c·n^t] shrinks geometrically in `reps`
and is calibrated per (c, t, ε).

Protocol composites use the idealized mode instead: an explicit halting-time
law with exactly ε premature mass below c·n^t and O(n^t) expected value,
which meets the same contract without paying per-step simulation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..classical import BLANK, PtmSpec
from ..languages import LEFT_END, RIGHT_END

CLOCK_ALPHABET = ["a", "b", "#", "0", "1", "⋆"]

# (c, t) -> (reps, C) frozen from clock-calibrate runs; C bounds mean/n^(t+1)
CALIBRATION = {
    (1, 1): (1, 3.0),
    (1, 2): (2, 3.5),
    (2, 1): (1, 3.0),
    (2, 2): (2, 3.5),
}


def default_reps(c: int, t: int) -> int:
    return CALIBRATION.get((c, t), (3, None))[0]


def make_clock(
    c: int,
    t: int,
    eps_premature,
    reps: int | None = None,
    alphabet=None,
) -> PtmSpec:
    """Build the streak-of-wins walk machine as an explicit 2PFA table."""
    if c < 1 or t < 1:
        raise ValueError("c and t must be positive")
    eps = Fraction(eps_premature)
    if not 0 < eps < 1:
        raise ValueError("premature bound must lie in (0, 1)")
    if reps is None:
        reps = default_reps(c, t)
    alphabet = list(alphabet) if alphabet else list(CLOCK_ALPHABET)
    half = Fraction(1, 2)
    trans = {}
    states = ["s0", "acc", "rej"]
    trans[("s0", LEFT_END, BLANK)] = [(Fraction(1), ("walk_0_0", BLANK, 1, 0))]
    for r in range(reps):
        for s in range(t):
            walk = f"walk_{s}_{r}"
            states.append(walk)
            for sym in alphabet:
                trans[(walk, sym, BLANK)] = [
                    (half, (walk, BLANK, 1, 0)),
                    (half, (walk, BLANK, -1, 0)),
                ]
            trans[(walk, LEFT_END, BLANK)] = [
                (Fraction(1), (f"walk_0_{r}", BLANK, 1, 0))
            ]
            if s + 1 == t:
                target = "acc" if r + 1 == reps else f"ret_0_{r + 1}"
            else:
                target = f"ret_{s + 1}_{r}"
            move = 0 if target == "acc" else -1
            trans[(walk, RIGHT_END, BLANK)] = [
                (Fraction(1), (target, BLANK, move, 0))
            ]
    # retreat rows (entered with streak value s after a non-final win)
    needed = {out[0] for rows in trans.values() for _, out in rows}
    for name in sorted(needed):
        if not name.startswith("ret_"):
            continue
        states.append(name)
        _, s, r = name.split("_")
        for sym in alphabet:
            trans[(name, sym, BLANK)] = [(Fraction(1), (name, BLANK, -1, 0))]
        trans[(name, LEFT_END, BLANK)] = [
            (Fraction(1), (f"walk_{s}_{r}", BLANK, 1, 0))
        ]
        trans[(name, RIGHT_END, BLANK)] = [
            (Fraction(1), (name, BLANK, -1, 0))
        ]
    return PtmSpec(
        name=f"clock_c{c}_t{t}_r{reps}",
        states=states,
        input_alphabet=alphabet,
        work_alphabet=[BLANK],
        transitions=trans,
        start="s0",
        accept="acc",
        reject="rej",
    )


def ruin_walk(n: int, rng) -> tuple[bool, int]:
    """One symmetric walk from position 1 with barriers at 0 and n+1;
    returns (absorbed at the top, steps taken)."""
    pos, steps, top = 1, 0, n + 1
    while 0 < pos < top:
        pos += 1 if rng.random() < 0.5 else -1
        steps += 1
    return pos == top, steps


def round_distribution(n: int, tail: float = 1e-14, max_steps: int | None = None):
    """Distribution of (win, steps) for one walk round from position 1.

    Returns (steps_lose, probs_lose, steps_win, probs_win), truncated once the
    unabsorbed mass drops below `tail` and renormalized.
    """
    if n == 0:
        return np.array([], int), np.array([]), np.array([0]), np.array([1.0])
    if max_steps is None:
        max_steps = max(200, 60 * (n + 1) ** 2)
    interior = np.zeros(n, dtype=float)  # positions 1..n
    interior[0] = 1.0
    lose_steps, lose_probs, win_steps, win_probs = [], [], [], []
    for k in range(1, max_steps + 1):
        lost = 0.5 * interior[0]
        won = 0.5 * interior[-1]
        nxt = np.zeros_like(interior)
        nxt[:-1] += 0.5 * interior[1:]
        nxt[1:] += 0.5 * interior[:-1]
        interior = nxt
        if lost > 0:
            lose_steps.append(k)
            lose_probs.append(lost)
        if won > 0:
            win_steps.append(k)
            win_probs.append(won)
        if interior.sum() < tail:
            break
    total = sum(lose_probs) + sum(win_probs)
    return (
        np.array(lose_steps, int),
        np.array(lose_probs) / total,
        np.array(win_steps, int),
        np.array(win_probs) / total,
    )


class ClockSampler:
    """Samples full halting times of the streak machine by drawing each
    round's (win, steps) from the walk's exact per-round distribution and
    replaying the machine's streak/repetition/retreat bookkeeping."""

    def __init__(self, n: int, t: int, reps: int):
        self.n, self.t, self.reps = n, t, reps
        ls, lp, ws, wp = round_distribution(n)
        self._steps = np.concatenate([ls, ws])
        self._wins = np.concatenate(
            [np.zeros(len(ls), bool), np.ones(len(ws), bool)]
        )
        self._cdf = np.cumsum(np.concatenate([lp, wp]))
        self._cdf[-1] = 1.0

    def sample(self, rng) -> int:
        n, t, reps = self.n, self.t, self.reps
        total = 1  # initial step off the left endmarker
        streak = done = 0
        cdf, steps_tab, wins_tab = self._cdf, self._steps, self._wins
        while True:
            idx = int(np.searchsorted(cdf, rng.random(), side="right"))
            w = int(steps_tab[idx])
            if wins_tab[idx]:
                streak += 1
                if streak == t:
                    done += 1
                    streak = 0
                    if done == reps:
                        return total + w + 1  # halting transition
                total += w + n + 2  # turn, retreat to start, re-enter
            else:
                total += w + 1  # restart step off the left endmarker

    def sample_many(self, trials: int, rng) -> np.ndarray:
        return np.array([self.sample(rng) for _ in range(trials)], dtype=np.int64)


@dataclass
class IdealizedClock:
    """Explicit halting-time law meeting the alarm-clock contract: premature
    mass exactly eps below the threshold c·n^t, geometric tail above it."""

    c: int
    t: int
    eps_premature: Fraction

    def threshold(self, n: int) -> int:
        return self.c * max(1, n) ** self.t

    def halt_time(self, n: int, rng) -> int:
        thr = self.threshold(n)
        eps = Fraction(self.eps_premature)
        if thr >= 2 and int(rng.integers(0, eps.denominator)) < eps.numerator:
            lo = max(1, thr // 2)
            return int(rng.integers(lo, thr))
        tail_mean = max(1, n) ** self.t
        return thr + int(rng.geometric(1.0 / tail_mean))


def measure_clock(n, t, reps, trials, rng, c):
    """Monte Carlo premature fraction and mean runtime of the walk clock."""
    sampler = ClockSampler(n, t, reps)
    steps = sampler.sample_many(trials, rng)
    threshold = c * n**t
    return {
        "n": n,
        "reps": reps,
        "premature": float((steps < threshold).mean()),
        "mean_steps": float(steps.mean()),
        "p99_steps": float(np.quantile(steps, 0.99)),
    }


def calibrate_clock(
    c: int,
    t: int,
    eps_premature,
    n_grid=(4, 8, 16),
    trials: int = 4000,
    rng=None,
    max_reps: int = 10,
):
    """Pick the smallest repetition count whose measured premature fraction
    stays below the target on the whole grid; also report the runtime
    constant C = max mean/n^{t+1} with a 1.5x safety margin."""
    if rng is None:
        rng = np.random.default_rng(0)
    eps = float(Fraction(eps_premature))
    margin = 2.5 * math.sqrt(eps * (1 - eps) / trials) if eps > 0 else 0.0
    for reps in range(1, max_reps + 1):
        rows = [measure_clock(n, t, reps, trials, rng, c) for n in n_grid]
        worst = max(r["premature"] for r in rows)
        if worst <= max(0.0, eps - margin) or worst == 0.0:
            const = 1.5 * max(r["mean_steps"] / n ** (t + 1) for r, n in zip(rows, n_grid))
            return {"c": c, "t": t, "reps": reps, "C": const, "rows": rows}
    raise RuntimeError(f"no repetition count up to {max_reps} met the target")
