from fractions import Fraction

import pytest

from poqlab.languages import STAR, LanguageId, check_promise, membership
from poqlab.witnesses import (
    IncompleteWitnessError,
    SeparationWitness,
    check_separation_witness,
    load_witness,
    mult_witness,
    pal_witness,
    save_witness,
    twin_witness,
)


def test_shipped_witnesses_pass():
    for factory in (pal_witness, twin_witness, mult_witness):
        report = check_separation_witness(factory())
        assert report.all_pass, report.per_m


def test_pal_witness_condition_3b_verbatim():
    # for every pair, exactly one of uwv / uw'v is a padded palindrome
    wit = pal_witness()
    import itertools

    for m in wit.samples:
        for w, w2 in itertools.combinations(wit.word_sets[m], 2):
            u, v = wit.context_for(m, w, w2)
            sides = []
            for s in (u + w + v, u + w2 + v):
                core, ok = check_promise(s)
                sides.append(ok and membership(LanguageId.PAL, core))
            assert sides.count(True) == 1


def test_singleton_word_set_fails_growth():
    wit = SeparationWitness(
        pair=(LanguageId.PAL, LanguageId.PAL),
        samples=[2],
        word_sets={2: ["ab"]},
        contexts={},
        growth_constant=Fraction(2),
    )
    report = check_separation_witness(wit)
    entry = report.per_m[0]
    assert not entry["conditions"]["growth"]  # 1 < 2^2
    assert entry["conditions"]["length_bound"]


def test_missing_context_raises():
    wit = pal_witness(samples=(2,))
    wit.contexts.pop((2, "a", "b"))
    with pytest.raises(IncompleteWitnessError):
        check_separation_witness(wit)


def test_length_violation_detected():
    wit = pal_witness(samples=(2,))
    # oversized context blows the 2^m budget
    for key in list(wit.contexts):
        u, v = wit.contexts[key]
        wit.contexts[key] = (u, v + STAR * 10)
    report = check_separation_witness(wit)
    assert not report.per_m[0]["conditions"]["context_length"]


def test_witness_file_round_trip(tmp_path):
    wit = twin_witness(samples=(3, 5))
    path = tmp_path / "twin.json"
    save_witness(wit, path)
    loaded = load_witness(path)
    assert loaded.pair == wit.pair
    assert loaded.samples == wit.samples
    assert loaded.word_sets == wit.word_sets
    assert loaded.contexts == wit.contexts
    assert loaded.growth_constant == wit.growth_constant
    assert check_separation_witness(loaded).all_pass
