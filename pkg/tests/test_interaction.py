from fractions import Fraction

import numpy as np
import pytest

from poqlab.classical import BLANK, Verdict
from poqlab.interaction import (
    CELL_BLANK,
    ConfigurationError,
    DisciplineError,
    EchoProver,
    ImmediateVerdictVerifier,
    MuteProver,
    OneShotAskVerifier,
    TableClassicalProver,
    TableVerifier,
    run_interaction,
    transcript,
)


def rng(seed=0):
    return np.random.default_rng(seed)


def test_immediate_accept():
    out = run_interaction(ImmediateVerdictVerifier(Verdict.ACCEPT), MuteProver(), "ab", rng())
    assert out.verdict is Verdict.ACCEPT
    assert out.verifier_steps == 1


def test_mute_prover_rejected_at_second_step():
    out = run_interaction(OneShotAskVerifier(), MuteProver(), "ab", rng())
    assert out.verdict is Verdict.REJECT
    assert out.verifier_steps == 2


def test_mute_prover_transcript_single_write():
    rows = transcript(OneShotAskVerifier(), MuteProver(), "ab", rng())
    assert len(rows) == 1 and rows[0].actor == "V"


def test_echo_prover_accepted():
    out = run_interaction(OneShotAskVerifier(), EchoProver(), "ab", rng())
    assert out.verdict is Verdict.ACCEPT
    assert out.messages_exchanged == 2


def test_prover_silence_discipline_in_transcripts():
    # every prover write immediately follows a not-yet-answered verifier write
    from poqlab.machines_zoo import eq_machine
    from poqlab.protocols.supersafe import HonestSupersafeProver, SupersafeVerifier

    rows = transcript(
        SupersafeVerifier(eq_machine(), Fraction(1, 4), 2),
        HonestSupersafeProver(eq_machine()),
        "ab",
        rng(3),
        10**5,
    )
    pending = None
    for row in rows:
        if row.actor == "V":
            assert pending is None
            pending = row.step
        else:
            assert pending == row.step
            pending = None


def test_discipline_error_on_unprompted_write():
    class PushyProver:
        input_alphabet = None
        comm_alphabet = None

        def session(self, w):
            class S:
                peak_space = 0

                def step(self, fresh, rng):
                    return "x"  # writes even without a fresh symbol

            return S()

    class SilentVerifier:
        input_alphabet = ("a", "b")
        comm_alphabet = (CELL_BLANK,)

        def session(self, w):
            class S:
                peak_space = 0

                def step(self, cell, rng):
                    from poqlab.interaction import VerifierStepResult

                    return VerifierStepResult()

            return S()

    with pytest.raises(DisciplineError):
        run_interaction(SilentVerifier(), PushyProver(), "ab", rng())


def test_alphabet_mismatch():
    class OddVerifier(ImmediateVerdictVerifier):
        input_alphabet = ("x",)

    with pytest.raises(ConfigurationError):
        run_interaction(OddVerifier(Verdict.ACCEPT), EchoProver(input_alphabet=("a",)), "a", rng())


def test_input_outside_alphabet():
    with pytest.raises(ConfigurationError):
        run_interaction(OneShotAskVerifier(), MuteProver(), "xyz", rng())


def test_seed_reproducibility():
    from poqlab.machines_zoo import eq_machine
    from poqlab.protocols.supersafe import HonestSupersafeProver, SupersafeVerifier

    ver = SupersafeVerifier(eq_machine(), Fraction(1, 3), 3)
    pro = HonestSupersafeProver(eq_machine())
    a = run_interaction(ver, pro, "abab", rng(42), 10**5)
    b = run_interaction(ver, pro, "abab", rng(42), 10**5)
    assert a == b
    ta = transcript(ver, pro, "abab", rng(42), 10**5)
    tb = transcript(ver, pro, "abab", rng(42), 10**5)
    assert ta == tb


def test_table_verifier_and_prover():
    # verifier asks once and accepts iff the prover echoes "y"
    one = Fraction(1)
    ver = TableVerifier(
        name="ask",
        silent_states=["s0", "judge", "acc", "rej"],
        com_states=["ask"],
        emits={"ask": "q"},
        input_alphabet=["a", "b"],
        work_alphabet=[BLANK],
        comm_alphabet=[CELL_BLANK, "q", "y", "n"],
        transitions={
            ("s0", "▷", BLANK, CELL_BLANK): [(one, ("ask", BLANK, 0, 0))],
            ("ask", "▷", BLANK, "y"): [(one, ("acc", BLANK, 0, 0))],
            ("ask", "▷", BLANK, "n"): [(one, ("rej", BLANK, 0, 0))],
        },
        start="s0",
        accept="acc",
        reject="rej",
    )
    prover = TableClassicalProver(
        name="yes",
        states=["p0"],
        input_alphabet=["a", "b"],
        work_alphabet=[BLANK],
        comm_alphabet=[CELL_BLANK, "q", "y", "n"],
        silent={
            ("p0", s, BLANK): [(one, ("p0", BLANK, 0, 0))]
            for s in ("a", "b", "▷", "◁")
        },
        com={
            ("p0", s, BLANK, "q"): [(one, ("p0", BLANK, "y", 0, 0))]
            for s in ("a", "b", "▷", "◁")
        },
        start="p0",
    )
    out = run_interaction(ver, prover, "ab", rng())
    assert out.verdict is Verdict.ACCEPT
    assert out.verifier_steps == 2  # write on step 1, judge the reply on step 2
    assert out.messages_exchanged == 2


def test_transcript_csv_and_outcome_dict():
    from poqlab.interaction import outcome_to_dict, transcript_to_csv

    rows = transcript(OneShotAskVerifier(), EchoProver(), "ab", rng())
    text = transcript_to_csv(rows)
    lines = text.strip().split("\n")
    assert lines[0] == "step,actor,symbol"
    assert lines[1] == "1,V,?"
    assert lines[2] == "1,P,?"
    out = run_interaction(OneShotAskVerifier(), EchoProver(), "ab", rng())
    doc = outcome_to_dict(out)
    assert doc["verdict"] == "Accept"
    assert set(doc) == {
        "verdict",
        "verifier_steps",
        "prover_steps",
        "messages_exchanged",
        "verifier_peak_space",
        "prover_peak_space",
    }
