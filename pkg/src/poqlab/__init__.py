"""poqlab: simulation laboratory for small-space proof-of-quantumness
protocols over two-way automata."""

from .classical import (
    OneHeadDfa,
    PtmSpec,
    RunOutcome,
    TwoHeadDfaSpec,
    Verdict,
    fuzz_supersafety,
    run_machine,
    run_twohead,
    supersafe_trajectory,
)
from .languages import LanguageId, PaddedString, check_promise, membership, pad
from .quantum import ModeledSolverSpec, QcfaSpec, modeled_solve, run_qcfa
from .witnesses import SeparationWitness, check_separation_witness

__version__ = "0.1.0"

__all__ = [
    "LanguageId",
    "PaddedString",
    "membership",
    "pad",
    "check_promise",
    "SeparationWitness",
    "check_separation_witness",
    "PtmSpec",
    "TwoHeadDfaSpec",
    "OneHeadDfa",
    "RunOutcome",
    "Verdict",
    "run_machine",
    "run_twohead",
    "supersafe_trajectory",
    "fuzz_supersafety",
    "QcfaSpec",
    "ModeledSolverSpec",
    "run_qcfa",
    "modeled_solve",
    "__version__",
]
