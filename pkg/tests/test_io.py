import json
from fractions import Fraction

import numpy as np
import pytest

from poqlab.classical import Verdict, run_machine, run_twohead
from poqlab.machine_io import (
    builtin_machine,
    load_machine,
    machine_from_dict,
    machine_to_dict,
    parse_rational_str,
    rational_str,
    save_machine,
)
from poqlab.machines_zoo import drift_walk_ptm, eq_machine, fair_coin_ptm
from poqlab.protocols.params import ProtocolParams
from poqlab.quantum import Unitary, coin_qcfa, rotation_qcfa, run_qcfa


def test_rational_strings():
    assert rational_str(Fraction(2, 3)) == "2/3"
    assert parse_rational_str("2/3") == Fraction(2, 3)
    assert parse_rational_str("5") == Fraction(5)


def test_ptm_round_trip_exact(tmp_path):
    spec = drift_walk_ptm(Fraction(2, 3))
    path = tmp_path / "walk.json"
    save_machine(spec, path)
    loaded = load_machine(path)
    assert loaded.transitions == spec.transitions  # exact rationals
    assert loaded.states == spec.states
    out = run_machine(loaded, "ab", np.random.default_rng(0))
    assert out.verdict in (Verdict.ACCEPT, Verdict.REJECT)


def test_twohead_round_trip(tmp_path):
    spec = eq_machine()
    path = tmp_path / "eq.json"
    save_machine(spec, path)
    loaded = load_machine(path)
    assert loaded.transitions == spec.transitions
    assert loaded.supersafe_head == 1
    assert loaded.companion.transitions == spec.companion.transitions
    assert loaded.loop_stream == spec.loop_stream
    assert run_twohead(loaded, "abab").verdict is Verdict.ACCEPT


def test_qcfa_round_trip_bit_exact(tmp_path):
    # dyadic serialization reproduces every double exactly, Hadamard included
    spec = coin_qcfa()
    path = tmp_path / "coin.json"
    save_machine(spec, path)
    loaded = load_machine(path)
    for key, action in spec.quantum_actions.items():
        other = loaded.quantum_actions[key]
        if isinstance(action, Unitary):
            assert (action.matrix == other.matrix).all()
        else:
            for tau, p in action.projectors.items():
                assert (p == other.projectors[tau]).all()
    out = run_qcfa(loaded, "aaa", np.random.default_rng(1))
    assert out.verdict in (Verdict.ACCEPT, Verdict.REJECT)


def test_rational_qcfa_round_trip(tmp_path):
    spec = rotation_qcfa()
    path = tmp_path / "rot.json"
    save_machine(spec, path)
    text = path.read_text()
    assert "3/5" in text or "5404319552844595/9007199254740992" in text
    loaded = load_machine(path)
    assert (
        loaded.quantum_actions[("go", "a")].matrix
        == spec.quantum_actions[("go", "a")].matrix
    ).all()


def test_probabilities_serialized_as_rationals_only(tmp_path):
    path = tmp_path / "coin_ptm.json"
    save_machine(fair_coin_ptm(), path)
    doc = json.loads(path.read_text())
    for row in doc["transitions"]:
        assert "/" in row["prob"]


def test_builtin_registry():
    spec = builtin_machine("shuttle")
    assert spec.name == "shuttle"
    spec = load_machine("builtin:drift-walk")
    assert spec.name == "drift-walk"
    with pytest.raises(ValueError):
        builtin_machine("nope")


def test_params_file_round_trip(tmp_path):
    params = ProtocolParams(p=Fraction(1, 3), m=19, eps_q=Fraction(1, 40))
    path = tmp_path / "params.json"
    params.save(path)
    doc = json.loads(path.read_text())
    assert doc["p"] == "1/3" and doc["eps_q"] == "1/40"
    loaded = ProtocolParams.load(path)
    assert loaded == params


def test_params_validation():
    with pytest.raises(ValueError):
        ProtocolParams(p=Fraction(1, 2))
    with pytest.raises(ValueError):
        ProtocolParams(m=0)
    with pytest.raises(ValueError):
        ProtocolParams(eps_q=Fraction(1, 2))
    with pytest.raises(ValueError):
        ProtocolParams(c_f=1)
    with pytest.raises(ValueError):
        ProtocolParams(K=1)
