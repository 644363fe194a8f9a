from fractions import Fraction

import numpy as np
import pytest

from poqlab.classical import BLANK, PtmSpec, Verdict, run_machine
from poqlab.harness import binomial_interval
from poqlab.machines_zoo import (
    ANALYZER_PTMS,
    drift_walk_ptm,
    fair_coin_ptm,
    instant_accept_ptm,
    scratch_ptm,
    shuttle_ptm,
)
from poqlab.markov import (
    ConventionError,
    MarkovChain,
    NotAbsorbingError,
    SpaceBudgetError,
    absorption,
    analyze,
    build_chain,
    build_config_graph,
    check_conventions,
    detect_looping,
    enumerate_megastates,
    first_passage_enumeration,
    rewire_looping,
    run_batch_compiled,
    wrap_for_analysis,
)


def test_instant_accept_chain():
    res = analyze(instant_accept_ptm(), "a", "b")
    assert res.report.p_accept == 1
    assert res.report.p_other == 0


def test_fair_coin_chain():
    res = analyze(fair_coin_ptm(), "a", "b")
    assert res.report.p_accept == Fraction(1, 2)
    assert res.report.p_other == Fraction(1, 2)


def test_drift_walk_exact_ruin_probability():
    # biased walk enters at position 1 over n = 2 cells: classic ruin odds
    res = analyze(drift_walk_ptm(Fraction(2, 3)), "a", "b")
    assert res.report.p_accept == Fraction(4, 7)
    res = analyze(drift_walk_ptm(Fraction(2, 3)), "ab", "ba")
    q_over_p = Fraction(1, 2)
    expect = (1 - q_over_p) / (1 - q_over_p**5)
    assert res.report.p_accept == expect


def test_megastate_enumeration_bound():
    # 2-state machine with <=2 work cells over {blank, x}: within 2*4*3
    spec = PtmSpec(
        name="tiny",
        states=["s0", "acc", "rej"],
        input_alphabet=["a"],
        work_alphabet=[BLANK, "x"],
        transitions={("s0", sym, BLANK): [(Fraction(1), ("acc", BLANK, 0, 0))]
                     for sym in ("a", "▷", "◁")},
        start="s0",
        accept="acc",
        reject="rej",
    )
    megas = enumerate_megastates(spec, 2)
    assert len(megas) <= 3 * 4 * 3
    assert megas[0] == ("s0", (), 0)
    assert megas[-2][0] == "rej" and megas[-1][0] == "acc"


def test_chain_row_matches_path_enumeration():
    # 4-state machine: truncated enumeration to depth 40 agrees within 1e-9
    spec = drift_walk_ptm(Fraction(2, 3))
    chain, graph = build_chain(spec, "a", "b")
    hits, tail = first_passage_enumeration(spec, "a", "b", 40)
    assert float(tail) < 1e-9
    wrapped = wrap_for_analysis(spec)
    # compare the enumerated mass to row 1 of the chain
    row = chain.matrix[0]
    mega_index = {m: k + 1 for k, m in enumerate(chain.megastates)}
    enum_row = [Fraction(0)] * chain.size
    for key, mass in hits.items():
        if key[0] == "halt":
            target = chain.accept_trap if key[1] > 0 else chain.reject_trap
        else:
            cfg = key[1]
            j = mega_index[(cfg[0], cfg[1], cfg[2])]
            target = j if cfg[3] == chain.left_pos else chain.c + j - 1
        enum_row[target - 1] += mass
    for a, b in zip(row, enum_row):
        assert abs(float(a) - float(b)) < 1e-9


def test_shuttle_looping_set_is_the_pingpong_cycle():
    looping = detect_looping(shuttle_ptm(), "a", "b")
    states = {cfg[0] for cfg in looping}
    assert states == {"pingR", "pingL"}
    # the ping-pong on |xy| = 2 visits exactly 6 configurations
    assert len(looping) == 6


def test_rewire_moves_exact_mass():
    chain, graph = build_chain(shuttle_ptm(), "a", "b")
    flags = graph.looping_flags()
    looping = {cfg for i, cfg in enumerate(graph.configs) if flags[i]}
    from poqlab.markov import looping_chain_states

    states = looping_chain_states(chain, looping)
    rewired = rewire_looping(chain, states)
    trap = chain.reject_trap - 1
    for i in range(chain.size):
        moved = sum(chain.matrix[i][j - 1] for j in states)
        assert rewired.matrix[i][trap] == chain.matrix[i][trap] + moved
        for j in states:
            assert rewired.matrix[i][j - 1] == 0
        assert sum(rewired.matrix[i]) == 1  # exact stochasticity


def test_rewire_empty_set_is_identity():
    chain, _ = build_chain(fair_coin_ptm(), "a", "b")
    rewired = rewire_looping(chain, set())
    assert rewired.matrix == chain.matrix


def test_rewire_rejects_traps():
    chain, _ = build_chain(fair_coin_ptm(), "a", "b")
    with pytest.raises(ValueError):
        rewire_looping(chain, {chain.reject_trap})


def test_not_absorbing_before_rewiring():
    chain, _ = build_chain(shuttle_ptm(), "a", "b")
    with pytest.raises(NotAbsorbingError):
        absorption(chain)


def test_absorption_toy_chains():
    # deterministic 1 -> 2 -> accept (c = 2: states 1,2, traps 3,4)
    one = Fraction(1)
    zero = Fraction(0)
    m = [
        [zero, one, zero, zero],
        [zero, zero, zero, one],
        [zero, zero, one, zero],
        [zero, zero, zero, one],
    ]
    chain = MarkovChain(c=2, matrix=m, megastates=[("a", (), 0), ("b", (), 0)],
                        left_pos=1, right_pos=2)
    rep = absorption(chain)
    assert rep.p_accept == 1 and rep.expected_time == 2
    half = Fraction(1, 2)
    m = [
        [zero, zero, half, half],
        [zero, one, zero, zero],
        [zero, zero, one, zero],
        [zero, zero, zero, one],
    ]
    chain = MarkovChain(c=2, matrix=m, megastates=[("a", (), 0), ("b", (), 0)],
                        left_pos=1, right_pos=2)
    rep = absorption(chain)
    assert rep.p_accept == half and rep.expected_time == 1


@pytest.mark.parametrize("name", sorted(ANALYZER_PTMS))
def test_faithfulness_against_simulation(name):
    spec = ANALYZER_PTMS[name]()
    exact = float(analyze(spec, "ab", "a").report.p_accept)
    n = 20000
    verdict, steps, prefix, _ = run_batch_compiled(
        wrap_for_analysis(spec), "aba", n, np.random.default_rng(3), 2000
    )
    accepts = int((verdict == 0).sum())
    lo, hi = binomial_interval(exact, n, 0.999)
    assert lo <= accepts <= hi, (name, exact, accepts / n)


def test_compiled_runner_matches_step_runner():
    spec = wrap_for_analysis(drift_walk_ptm())
    rng = np.random.default_rng(0)
    direct = [run_machine(spec, "ab", rng, 10**5) for _ in range(3000)]
    d_acc = sum(o.verdict is Verdict.ACCEPT for o in direct) / 3000
    d_steps = np.mean([o.steps for o in direct])
    verdict, steps, _, _ = run_batch_compiled(
        spec, "ab", 3000, np.random.default_rng(1), 10**5
    )
    assert abs((verdict == 0).mean() - d_acc) < 0.04
    assert abs(steps.mean() - d_steps) < 0.5


def test_expected_time_bound_coherence():
    # chain steps are multi-step transitions of the machine, so the chain's
    # expected absorption time is bounded by the machine's halting-run mean
    # plus the mean non-looping prefix of looping runs
    spec = shuttle_ptm()
    res = analyze(spec, "a", "b")
    verdict, steps, prefix, _ = run_batch_compiled(
        wrap_for_analysis(spec), "ab", 30000, np.random.default_rng(5), 2000,
        track_looping=True,
    )
    halted = verdict != 2
    halting_mean = steps[halted].mean()
    loop_prefix_mean = prefix[prefix >= 0].mean() if (prefix >= 0).any() else 0.0
    budget = halting_mean + loop_prefix_mean
    assert float(res.report.expected_time) <= budget + 3 * steps[halted].std() / np.sqrt(halted.sum())


def test_convention_validator_rejects_dirty_halt():
    # machine that halts with a mark still on its work tape
    spec = PtmSpec(
        name="dirty",
        states=["s0", "acc", "rej"],
        input_alphabet=["a", "b"],
        work_alphabet=[BLANK, "x"],
        transitions={
            ("s0", sym, BLANK): [(Fraction(1), ("acc", "x", 0, 0))]
            for sym in ("a", "b", "▷", "◁")
        },
        start="s0",
        accept="acc",
        reject="rej",
    )
    graph = build_config_graph(wrap_for_analysis(spec), "ab")
    with pytest.raises(ConventionError):
        check_conventions(graph)


def test_split_length_budget():
    with pytest.raises(SpaceBudgetError):
        build_chain(fair_coin_ptm(), "a" * 6, "b" * 6)


def test_scratch_machine_megastates_include_work_content():
    chain, _ = build_chain(scratch_ptm(), "a", "b")
    contents = {m[1] for m in chain.megastates}
    assert ("x",) in contents


def test_bare_state_megastates_for_finite_automaton():
    megas = enumerate_megastates(fair_coin_ptm(), 0)
    assert len(megas) == 3  # no work tape: megastates are the bare states
    assert {m[0] for m in megas} == {"s0", "acc", "rej"}


def test_chain_equals_closed_form_for_comparator_machine():
    # two fully independent exact derivations of the same probability:
    # rational absorption analysis vs the tournament closed form
    from poqlab.protocols.freivalds import (
        exact_accept_probability,
        freivalds_eq_table,
    )

    spec = freivalds_eq_table(3, 2)
    for x, y in [("a", "b"), ("ab", "ab"), ("a", "ab"), ("", "ab"), ("ab", "")]:
        res = analyze(spec, x, y, budget=2)
        assert res.report.p_accept == exact_accept_probability(x + y, 3, 2)


def test_confined_loop_absorbed_without_rewiring():
    from poqlab.machines_zoo import confined_looper_ptm

    spec = confined_looper_ptm()
    # left part of two cells: the bounce stays strictly inside the region
    chain, graph = build_chain(spec, "ab", "a")
    flags = graph.looping_flags()
    assert any(flags)  # looping configurations exist
    from poqlab.markov import looping_chain_states

    looping = {cfg for i, cfg in enumerate(graph.configs) if flags[i]}
    assert looping_chain_states(chain, looping) == set()
    rep = absorption(chain)  # no rewiring needed
    assert rep.p_accept == Fraction(1, 2)
    assert rep.p_other == Fraction(1, 2)


def test_confined_loop_needs_rewiring_when_it_touches_the_boundary():
    from poqlab.machines_zoo import confined_looper_ptm

    spec = confined_looper_ptm()
    # left part of one cell: the bounce crosses the boundary cell
    res = analyze(spec, "a", "b")
    assert res.looping_states
    assert res.report.p_accept == Fraction(1, 2)
