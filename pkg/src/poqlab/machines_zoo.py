"""Shipped machines: the supersafe-head two-head automata for the counting
and matching languages, their complements, and small probabilistic machines
used by the chain analyzer and engine tests.

All two-head machines share the same companion for head 1: a full sweep from
the left endmarker to the right and back.  Head 1's moves never depend on
head 2's reading; only halting does, which keeps its trajectory a prefix of
the companion's under arbitrary fabricated readings.
"""

from __future__ import annotations

from fractions import Fraction

from .classical import BLANK, OneHeadDfa, PtmSpec, TwoHeadDfaSpec
from .languages import LEFT_END as L
from .languages import RIGHT_END as R


def sweep_companion() -> OneHeadDfa:
    """Walk from the left endmarker to the right one and back, then halt."""
    trans = {}
    for sym in "ab#01":
        trans[("fwd", sym)] = ("fwd", 1)
        trans[("bwd", sym)] = ("bwd", -1)
    trans[("fwd", L)] = ("fwd", 1)
    trans[("fwd", R)] = ("bwd", -1)
    trans[("bwd", L)] = ("halt", 0)
    trans[("bwd", R)] = ("bwd", -1)  # unreachable; totality
    return OneHeadDfa(
        name="sweep",
        states=["fwd", "bwd", "halt"],
        transitions=trans,
        start="fwd",
        halt_states=frozenset({"halt"}),
    )


def _total(trans, states, symbols, accept, reject, default):
    """Fill undefined (state, s1, s2) triples with the default verdict state."""
    for s in states:
        if s in (accept, reject):
            continue
        for a in symbols:
            for b in symbols:
                trans.setdefault((s, a, b), (default, 0, 0))


def eq_machine() -> TwoHeadDfaSpec:
    """Accept iff the input has equally many a's and b's.

    Head 1 sweeps right then left; head 2 steps right per a scanned on the
    way out and left per b scanned on the way back, and must come home.
    """
    sym = ["a", "b", L, R]
    t = {}
    for s2 in sym:
        t[("fwd", L, s2)] = ("fwd", 1, 0)
        t[("fwd", "b", s2)] = ("fwd", 1, 0)
        t[("fwd", "a", s2)] = ("rej", 0, 0) if s2 == R else ("fwd", 1, 1)
        t[("fwd", R, s2)] = ("bwd", -1, 0)
        t[("bwd", "a", s2)] = ("bwd", -1, 0)
        t[("bwd", "b", s2)] = ("rej", 0, 0) if s2 == L else ("bwd", -1, -1)
        t[("bwd", L, s2)] = ("acc", 0, 0) if s2 == L else ("rej", 0, 0)
    _total(t, ["fwd", "bwd"], sym, "acc", "rej", "rej")
    return TwoHeadDfaSpec(
        name="eq",
        states=["fwd", "bwd", "acc", "rej"],
        input_alphabet=["a", "b"],
        transitions=t,
        start="fwd",
        accept="acc",
        reject="rej",
        supersafe_head=1,
        companion=sweep_companion(),
        loop_stream=("", "b"),
    )


def eq_ab_machine() -> TwoHeadDfaSpec:
    """Accept iff the input is a^n b^n (block format checked on the way out)."""
    sym = ["a", "b", L, R]
    t = {}
    for s2 in sym:
        t[("fwd0", L, s2)] = ("fwd0", 1, 0)
        t[("fwd0", "a", s2)] = ("rej", 0, 0) if s2 == R else ("fwd0", 1, 1)
        t[("fwd0", "b", s2)] = ("fwd1", 1, 0)
        t[("fwd0", R, s2)] = ("bwd", -1, 0)
        t[("fwd1", "a", s2)] = ("rej", 0, 0)  # a after b
        t[("fwd1", "b", s2)] = ("fwd1", 1, 0)
        t[("fwd1", R, s2)] = ("bwd", -1, 0)
        t[("bwd", "a", s2)] = ("bwd", -1, 0)
        t[("bwd", "b", s2)] = ("rej", 0, 0) if s2 == L else ("bwd", -1, -1)
        t[("bwd", L, s2)] = ("acc", 0, 0) if s2 == L else ("rej", 0, 0)
    _total(t, ["fwd0", "fwd1", "bwd"], sym, "acc", "rej", "rej")
    return TwoHeadDfaSpec(
        name="eq_ab",
        states=["fwd0", "fwd1", "bwd", "acc", "rej"],
        input_alphabet=["a", "b"],
        transitions=t,
        start="fwd0",
        accept="acc",
        reject="rej",
        supersafe_head=1,
        companion=sweep_companion(),
        loop_stream=("", "b"),
    )


def pal_machine() -> TwoHeadDfaSpec:
    """Accept palindromes: head 2 climbs while head 1 descends, so they scan
    mirrored positions on the return sweep."""
    sym = ["a", "b", L, R]
    t = {}
    for s2 in sym:
        t[("fwd", L, s2)] = ("fwd", 1, 0)
        t[("fwd", "a", s2)] = ("fwd", 1, 0)
        t[("fwd", "b", s2)] = ("fwd", 1, 0)
        t[("fwd", R, s2)] = ("bwd", -1, 1)
        t[("bwd", "a", s2)] = ("bwd", -1, 1) if s2 == "a" else ("rej", 0, 0)
        t[("bwd", "b", s2)] = ("bwd", -1, 1) if s2 == "b" else ("rej", 0, 0)
        t[("bwd", L, s2)] = ("acc", 0, 0) if s2 == R else ("rej", 0, 0)
    _total(t, ["fwd", "bwd"], sym, "acc", "rej", "rej")
    return TwoHeadDfaSpec(
        name="pal",
        states=["fwd", "bwd", "acc", "rej"],
        input_alphabet=["a", "b"],
        transitions=t,
        start="fwd",
        accept="acc",
        reject="rej",
        supersafe_head=1,
        companion=sweep_companion(),
        loop_stream=("", "a"),
    )


def twin_machine() -> TwoHeadDfaSpec:
    """Accept u#u: head 2 measures |u| on the way out, then the return sweep
    matches the right block against u and checks both blocks end together."""
    sym = ["a", "b", "#", L, R]
    t = {}
    for s2 in sym:
        t[("fwd0", L, s2)] = ("fwd0", 1, 0)
        for c in "ab":
            t[("fwd0", c, s2)] = ("rej", 0, 0) if s2 == R else ("fwd0", 1, 1)
        t[("fwd0", "#", s2)] = ("fwd1", 1, 0)
        t[("fwd0", R, s2)] = ("rej", 0, 0)  # no separator
        for c in "ab":
            t[("fwd1", c, s2)] = ("fwd1", 1, 0)
        t[("fwd1", "#", s2)] = ("rej", 0, 0)  # second separator
        t[("fwd1", R, s2)] = ("bwdv", -1, 0)
        for c in "ab":
            t[("bwdv", c, s2)] = ("bwdv", -1, -1) if s2 == c else ("rej", 0, 0)
        t[("bwdv", "#", s2)] = ("bwdu", -1, 0) if s2 == L else ("rej", 0, 0)
        for c in "ab":
            t[("bwdu", c, s2)] = ("bwdu", -1, 0)
        t[("bwdu", L, s2)] = ("acc", 0, 0)
    _total(t, ["fwd0", "fwd1", "bwdv", "bwdu"], sym, "acc", "rej", "rej")
    return TwoHeadDfaSpec(
        name="twin",
        states=["fwd0", "fwd1", "bwdv", "bwdu", "acc", "rej"],
        input_alphabet=["a", "b", "#"],
        transitions=t,
        start="fwd0",
        accept="acc",
        reject="rej",
        supersafe_head=1,
        companion=sweep_companion(),
        loop_stream=("#", "a"),
    )


def complement(spec: TwoHeadDfaSpec) -> TwoHeadDfaSpec:
    """Swap accept and reject (supersafe machines are closed under this)."""
    return TwoHeadDfaSpec(
        name=spec.name + "-co",
        states=spec.states,
        input_alphabet=spec.input_alphabet,
        transitions=spec.transitions,
        start=spec.start,
        accept=spec.reject,
        reject=spec.accept,
        supersafe_head=spec.supersafe_head,
        companion=spec.companion,
        loop_stream=spec.loop_stream,
    )


def not_supersafe_machine() -> TwoHeadDfaSpec:
    """Counterexample: head 1 stalls whenever head 2 reports a b, so a
    fabricated reading stream can knock its trajectory off the companion's."""
    sym = ["a", "b", L, R]
    t = {}
    for s2 in sym:
        t[("s0", L, s2)] = ("s0", 1, 0)
        for c in "ab":
            t[("s0", c, s2)] = ("s0", 0, 0) if s2 == "b" else ("s0", 1, 0)
        t[("s0", R, s2)] = ("acc", 0, 0)
    _total(t, ["s0"], sym, "acc", "rej", "rej")
    return TwoHeadDfaSpec(
        name="not-supersafe",
        states=["s0", "acc", "rej"],
        input_alphabet=["a", "b"],
        transitions=t,
        start="s0",
        accept="acc",
        reject="rej",
        supersafe_head=1,
        companion=sweep_companion(),
    )


TWOHEAD_MACHINES = {
    "eq": eq_machine,
    "eq_ab": eq_ab_machine,
    "pal": pal_machine,
    "twin": twin_machine,
}


# --- small probabilistic machines -------------------------------------------


def _det(s, w=BLANK, di=0, dw=0):
    return [(Fraction(1), (s, w, di, dw))]


def parity_2dfa() -> PtmSpec:
    """Accept iff the input length is even; single left-to-right sweep."""
    trans = {}
    for par, other in (("even", "odd"), ("odd", "even")):
        trans[(par, L, BLANK)] = _det(par, di=1)
        for c in "ab":
            trans[(par, c, BLANK)] = _det(other, di=1)
    trans[("even", R, BLANK)] = _det("acc")
    trans[("odd", R, BLANK)] = _det("rej")
    return PtmSpec(
        name="parity",
        states=["even", "odd", "acc", "rej"],
        input_alphabet=["a", "b"],
        work_alphabet=[BLANK],
        transitions=trans,
        start="even",
        accept="acc",
        reject="rej",
    )


def fair_coin_ptm() -> PtmSpec:
    """Accept or reject on the first step with probability one half each."""
    half = Fraction(1, 2)
    trans = {}
    for sym in ["a", "b", L, R]:
        trans[("s0", sym, BLANK)] = [
            (half, ("acc", BLANK, 0, 0)),
            (half, ("rej", BLANK, 0, 0)),
        ]
    return PtmSpec(
        name="fair-coin",
        states=["s0", "acc", "rej"],
        input_alphabet=["a", "b"],
        work_alphabet=[BLANK],
        transitions=trans,
        start="s0",
        accept="acc",
        reject="rej",
    )


def instant_accept_ptm() -> PtmSpec:
    trans = {}
    for sym in ["a", "b", L, R]:
        trans[("s0", sym, BLANK)] = _det("acc")
    return PtmSpec(
        name="instant-accept",
        states=["s0", "acc", "rej"],
        input_alphabet=["a", "b"],
        work_alphabet=[BLANK],
        transitions=trans,
        start="s0",
        accept="acc",
        reject="rej",
    )


def self_loop_ptm() -> PtmSpec:
    """Never halts: stays put on every symbol."""
    trans = {}
    for sym in ["a", "b", L, R]:
        trans[("s0", sym, BLANK)] = _det("s0")
    return PtmSpec(
        name="self-loop",
        states=["s0", "acc", "rej"],
        input_alphabet=["a", "b"],
        work_alphabet=[BLANK],
        transitions=trans,
        start="s0",
        accept="acc",
        reject="rej",
    )


def drift_walk_ptm(p_right=Fraction(2, 3)) -> PtmSpec:
    """Biased walk over the input; accept at the right endmarker, reject at
    the left.  Absorption odds follow the classic ruin formula."""
    p = Fraction(p_right)
    q = 1 - p
    trans = {("s0", L, BLANK): _det("walk", di=1)}
    for sym in "ab":
        trans[("walk", sym, BLANK)] = [
            (p, ("walk", BLANK, 1, 0)),
            (q, ("walk", BLANK, -1, 0)),
        ]
    trans[("walk", R, BLANK)] = _det("acc")
    trans[("walk", L, BLANK)] = _det("rej")
    return PtmSpec(
        name="drift-walk",
        states=["s0", "walk", "acc", "rej"],
        input_alphabet=["a", "b"],
        work_alphabet=[BLANK],
        transitions=trans,
        start="s0",
        accept="acc",
        reject="rej",
    )


def shuttle_ptm() -> PtmSpec:
    """With probability one half, walk right and accept; otherwise enter a
    deterministic ping-pong between the endmarkers that never halts.  The
    ping-pong configurations are the looping set the analyzer must rewire."""
    half = Fraction(1, 2)
    trans = {
        ("s0", L, BLANK): [
            (half, ("runR", BLANK, 1, 0)),
            (half, ("pingR", BLANK, 1, 0)),
        ]
    }
    for sym in "ab":
        trans[("runR", sym, BLANK)] = _det("runR", di=1)
        trans[("pingR", sym, BLANK)] = _det("pingR", di=1)
        trans[("pingL", sym, BLANK)] = _det("pingL", di=-1)
    trans[("runR", R, BLANK)] = _det("acc")
    trans[("pingR", R, BLANK)] = _det("pingL", di=-1)
    trans[("pingL", L, BLANK)] = _det("pingR", di=1)
    trans[("runR", L, BLANK)] = _det("rej")  # unreachable
    return PtmSpec(
        name="shuttle",
        states=["s0", "runR", "pingR", "pingL", "acc", "rej"],
        input_alphabet=["a", "b"],
        work_alphabet=[BLANK],
        transitions=trans,
        start="s0",
        accept="acc",
        reject="rej",
    )


def scratch_ptm() -> PtmSpec:
    """Writes one work mark, decides by a coin, walks to the right end, wipes
    the mark, then halts; exercises megastates with work content and the
    clean-tape halting convention."""
    half = Fraction(1, 2)
    trans = {
        ("s0", L, BLANK): _det("flip", w="x"),
        ("flip", L, "x"): [
            (half, ("goA", "x", 1, 0)),
            (half, ("goB", "x", 1, 0)),
        ],
    }
    for v in ("A", "B"):
        for sym in "ab":
            trans[(f"go{v}", sym, "x")] = _det(f"go{v}", w="x", di=1)
        trans[(f"go{v}", R, "x")] = _det(f"wipe{v}", w="x")
        trans[(f"wipe{v}", R, "x")] = _det("acc" if v == "A" else "rej")
    return PtmSpec(
        name="scratch",
        states=["s0", "flip", "goA", "goB", "wipeA", "wipeB", "acc", "rej"],
        input_alphabet=["a", "b"],
        work_alphabet=[BLANK, "x"],
        transitions=trans,
        start="s0",
        accept="acc",
        reject="rej",
    )


def confined_looper_ptm() -> PtmSpec:
    """With probability one half, walk right and accept; otherwise bounce
    forever between the first cell and the left endmarker.  On splits whose
    left part has two or more cells the loop never touches the boundary, so
    the chain's reject/loop trap must absorb it with no rewiring at all."""
    half = Fraction(1, 2)
    trans = {
        ("s0", L, BLANK): [
            (half, ("runR", BLANK, 1, 0)),
            (half, ("inA", BLANK, 1, 0)),
        ]
    }
    for sym in "ab":
        trans[("runR", sym, BLANK)] = _det("runR", di=1)
        trans[("inA", sym, BLANK)] = _det("inB", di=-1)
    trans[("runR", R, BLANK)] = _det("acc")
    trans[("runR", L, BLANK)] = _det("rej")  # unreachable
    trans[("inA", R, BLANK)] = _det("inB", di=-1)
    trans[("inB", L, BLANK)] = _det("inA", di=1)
    for sym in "ab":
        trans[("inB", sym, BLANK)] = _det("inB")  # unreachable
    trans[("inB", R, BLANK)] = _det("inB")  # unreachable
    return PtmSpec(
        name="confined-looper",
        states=["s0", "runR", "inA", "inB", "acc", "rej"],
        input_alphabet=["a", "b"],
        work_alphabet=[BLANK],
        transitions=trans,
        start="s0",
        accept="acc",
        reject="rej",
    )


ANALYZER_PTMS = {
    "instant-accept": instant_accept_ptm,
    "fair-coin": fair_coin_ptm,
    "drift-walk": drift_walk_ptm,
    "shuttle": shuttle_ptm,
    "scratch": scratch_ptm,
    "confined-looper": confined_looper_ptm,
}
