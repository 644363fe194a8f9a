"""Concrete protocols: the polynomial clock, the supersafe-head proof
system with its round-rejection analysis, the padded-language protocol, and
the square-counting protocol with its embedded equality comparator."""

from .padded import PaddedProtocol
from .params import ProtocolParams, default_params
from .recursion import exhaustive_min_f1, f_recursion, min_f1
from .square import SquareProtocol
from .supersafe import AdversaryStrategy, SupersafeProtocol

__all__ = [
    "ProtocolParams",
    "default_params",
    "f_recursion",
    "min_f1",
    "exhaustive_min_f1",
    "AdversaryStrategy",
    "SupersafeProtocol",
    "PaddedProtocol",
    "SquareProtocol",
]
