"""Machine file schema: JSON documents with exact rational probabilities.

Probabilities and complex amplitude components are serialized only as
"num/den" strings; floats are converted through their exact dyadic rational
form, so round-trips are bit-exact for every representable value.
"""

from __future__ import annotations

import json
from fractions import Fraction

import numpy as np

from .classical import BLANK, OneHeadDfa, PtmSpec, TwoHeadDfaSpec
from .quantum import Measurement, QcfaSpec, Unitary


def rational_str(value) -> str:
    f = Fraction(value)
    return f"{f.numerator}/{f.denominator}"


def parse_rational_str(text: str) -> Fraction:
    num, _, den = text.partition("/")
    return Fraction(int(num), int(den)) if den else Fraction(int(num))


def _complex_pair(z: complex) -> list[str]:
    return [rational_str(Fraction(float(z.real))), rational_str(Fraction(float(z.imag)))]


def _parse_complex(pair) -> complex:
    return complex(float(parse_rational_str(pair[0])), float(parse_rational_str(pair[1])))


def ptm_to_dict(spec: PtmSpec) -> dict:
    rows = []
    for (s, sym, wsym), outs in sorted(spec.transitions.items()):
        for prob, (s2, w2, di, dw) in outs:
            rows.append(
                {
                    "from": s,
                    "read": sym,
                    "work_read": wsym,
                    "prob": rational_str(prob),
                    "to": s2,
                    "write": w2,
                    "di": di,
                    "dw": dw,
                }
            )
    return {
        "model": "ptm",
        "name": spec.name,
        "states": list(spec.states),
        "sigma": list(spec.input_alphabet),
        "kappa": list(spec.work_alphabet),
        "transitions": rows,
        "start": spec.start,
        "accept": spec.accept,
        "reject": spec.reject,
        "initial_head": spec.initial_head,
    }


def ptm_from_dict(d: dict) -> PtmSpec:
    trans: dict = {}
    for row in d["transitions"]:
        key = (row["from"], row["read"], row.get("work_read", BLANK))
        out = (
            row["to"],
            row.get("write", row.get("work_read", BLANK)),
            row["di"],
            row.get("dw", 0),
        )
        trans.setdefault(key, []).append((parse_rational_str(row["prob"]), out))
    return PtmSpec(
        name=d.get("name", "ptm"),
        states=list(d["states"]),
        input_alphabet=list(d["sigma"]),
        work_alphabet=list(d.get("kappa", [BLANK])),
        transitions=trans,
        start=d["start"],
        accept=d["accept"],
        reject=d["reject"],
        initial_head=d.get("initial_head", "left"),
    )


def _companion_to_dict(c: OneHeadDfa) -> dict:
    return {
        "name": c.name,
        "states": list(c.states),
        "transitions": [
            {"from": s, "read": sym, "to": t, "d": d}
            for (s, sym), (t, d) in sorted(c.transitions.items())
        ],
        "start": c.start,
        "halt": sorted(c.halt_states),
    }


def _companion_from_dict(d: dict) -> OneHeadDfa:
    return OneHeadDfa(
        name=d.get("name", "companion"),
        states=list(d["states"]),
        transitions={
            (r["from"], r["read"]): (r["to"], r["d"]) for r in d["transitions"]
        },
        start=d["start"],
        halt_states=frozenset(d["halt"]),
    )


def twohead_to_dict(spec: TwoHeadDfaSpec) -> dict:
    out = {
        "model": "2dfa2",
        "name": spec.name,
        "states": list(spec.states),
        "sigma": list(spec.input_alphabet),
        "transitions": [
            {"from": s, "read": [a, b], "to": t, "d1": d1, "d2": d2}
            for (s, a, b), (t, d1, d2) in sorted(spec.transitions.items())
        ],
        "start": spec.start,
        "accept": spec.accept,
        "reject": spec.reject,
    }
    if spec.supersafe_head is not None:
        out["supersafe_head"] = spec.supersafe_head
        out["companion"] = _companion_to_dict(spec.companion)
    if spec.loop_stream is not None:
        out["loop_stream"] = list(spec.loop_stream)
    return out


def twohead_from_dict(d: dict) -> TwoHeadDfaSpec:
    return TwoHeadDfaSpec(
        name=d.get("name", "2dfa2"),
        states=list(d["states"]),
        input_alphabet=list(d["sigma"]),
        transitions={
            (r["from"], r["read"][0], r["read"][1]): (r["to"], r["d1"], r["d2"])
            for r in d["transitions"]
        },
        start=d["start"],
        accept=d["accept"],
        reject=d["reject"],
        supersafe_head=d.get("supersafe_head"),
        companion=_companion_from_dict(d["companion"]) if "companion" in d else None,
        loop_stream=tuple(d["loop_stream"]) if "loop_stream" in d else None,
    )


def qcfa_to_dict(spec: QcfaSpec) -> dict:
    actions = []
    for (s, sym), action in sorted(spec.quantum_actions.items()):
        entry = {"state": s, "read": sym}
        if isinstance(action, Unitary):
            entry["kind"] = "unitary"
            entry["matrix"] = [
                [_complex_pair(z) for z in row] for row in action.matrix
            ]
        else:
            entry["kind"] = "measure"
            entry["projectors"] = {
                tau: [[_complex_pair(z) for z in row] for row in p]
                for tau, p in action.projectors.items()
            }
        actions.append(entry)
    classical = []
    for key, (to, d) in sorted(spec.classical_transitions.items()):
        entry = {"state": key[0], "read": key[1], "to": to, "d": d}
        if len(key) == 3:
            entry["outcome"] = key[2]
        classical.append(entry)
    return {
        "model": "qcfa",
        "name": spec.name,
        "basis": list(spec.basis),
        "initial_quantum": spec.initial_quantum,
        "states": list(spec.states),
        "sigma": list(spec.input_alphabet),
        "actions": actions,
        "classical": classical,
        "start": spec.start,
        "accept": spec.accept,
        "reject": spec.reject,
    }


def qcfa_from_dict(d: dict) -> QcfaSpec:
    actions: dict = {}
    for entry in d["actions"]:
        key = (entry["state"], entry["read"])
        if entry["kind"] == "unitary":
            mat = np.array(
                [[_parse_complex(z) for z in row] for row in entry["matrix"]]
            )
            actions[key] = Unitary(mat)
        else:
            projs = {
                tau: np.array([[_parse_complex(z) for z in row] for row in mat])
                for tau, mat in entry["projectors"].items()
            }
            actions[key] = Measurement(projs)
    classical: dict = {}
    for entry in d["classical"]:
        if "outcome" in entry:
            key = (entry["state"], entry["read"], entry["outcome"])
        else:
            key = (entry["state"], entry["read"])
        classical[key] = (entry["to"], entry["d"])
    return QcfaSpec(
        name=d.get("name", "qcfa"),
        basis=list(d["basis"]),
        initial_quantum=d["initial_quantum"],
        states=list(d["states"]),
        input_alphabet=list(d["sigma"]),
        quantum_actions=actions,
        classical_transitions=classical,
        start=d["start"],
        accept=d["accept"],
        reject=d["reject"],
    )


def machine_to_dict(spec) -> dict:
    if isinstance(spec, PtmSpec):
        return ptm_to_dict(spec)
    if isinstance(spec, TwoHeadDfaSpec):
        return twohead_to_dict(spec)
    if isinstance(spec, QcfaSpec):
        return qcfa_to_dict(spec)
    raise TypeError(f"cannot serialize {type(spec).__name__}")


def machine_from_dict(d: dict):
    model = d.get("model")
    if model == "ptm":
        return ptm_from_dict(d)
    if model == "2dfa2":
        return twohead_from_dict(d)
    if model == "qcfa":
        return qcfa_from_dict(d)
    raise ValueError(f"unknown machine model {model!r}")


def save_machine(spec, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(machine_to_dict(spec), fh, ensure_ascii=False, indent=1)


def load_machine(path):
    name = str(path)
    if name.startswith("builtin:"):
        return builtin_machine(name.split(":", 1)[1])
    with open(path, encoding="utf-8") as fh:
        return machine_from_dict(json.load(fh))


def builtin_machine(name: str):
    from . import machines_zoo as zoo
    from .protocols.freivalds import freivalds_eq_table

    registry = dict(zoo.ANALYZER_PTMS)
    registry.update(zoo.TWOHEAD_MACHINES)
    registry["parity"] = zoo.parity_2dfa
    registry["self-loop"] = zoo.self_loop_ptm
    registry["freivalds-small"] = freivalds_eq_table
    if name not in registry:
        raise ValueError(
            f"unknown builtin machine {name!r}; available: {sorted(registry)}"
        )
    return registry[name]()
