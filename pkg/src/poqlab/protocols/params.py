"""Protocol tunables in one record, with rational-string file round-trip."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields, replace
from fractions import Fraction


def parse_rational(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        num, _, den = value.partition("/")
        return Fraction(int(num), int(den)) if den else Fraction(int(num))
    raise ValueError(f"cannot parse rational from {value!r}")


def format_rational(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


@dataclass
class ProtocolParams:
    """All protocol tunables.

    p/m drive the per-round verification stage; eps_premature/c1/k the clock
    and the modeled solver's budget; eps_q the solver's error; eps_v the
    verification-stage error target; c_f/d_f the comparator modulus and win
    threshold; h_v the ruler-stage coin exponent; K the runtime-slack factor.
    """

    p: Fraction = field(default_factory=lambda: Fraction(1, 4))
    m: int = 33
    eps_premature: Fraction = field(default_factory=lambda: Fraction(1, 50))
    c1: int = 50
    k: int = 1
    eps_q: Fraction = field(default_factory=lambda: Fraction(1, 50))
    eps_v: Fraction = field(default_factory=lambda: Fraction(1, 4))
    c_f: int = 8
    d_f: int = 8
    h_v: int = 4
    K: int = 10
    step_cap: int = 10**7
    runtime_law: str = "deterministic"

    def __post_init__(self):
        self.p = parse_rational(self.p)
        self.eps_premature = parse_rational(self.eps_premature)
        self.eps_q = parse_rational(self.eps_q)
        self.eps_v = parse_rational(self.eps_v)
        if not 0 < self.p < Fraction(1, 2):
            raise ValueError("p must lie in (0, 1/2)")
        if self.m < 1:
            raise ValueError("m must be at least 1")
        for name in ("eps_premature", "eps_q", "eps_v"):
            v = getattr(self, name)
            if not 0 < v < Fraction(1, 2):
                raise ValueError(f"{name} must lie in (0, 1/2)")
        if self.c_f < 2 or self.d_f < 1 or self.h_v < 1 or self.K <= 1:
            raise ValueError("c_f >= 2, d_f >= 1, h_v >= 1, K > 1 required")
        if self.step_cap < 1:
            raise ValueError("step cap must be positive")

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = format_rational(v) if isinstance(v, Fraction) else v
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "ProtocolParams":
        return cls(**d)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=1)

    @classmethod
    def load(cls, path) -> "ProtocolParams":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def rounds_for(p: Fraction) -> int:
    """Round count sufficient for the per-round analysis: 2*ceil(1/p^2) + 1."""
    return 2 * math.ceil(1 / (p * p)) + 1


def default_params(protocol: str = "supersafe") -> ProtocolParams:
    base = ProtocolParams()
    if protocol in ("supersafe", "supersafe-eq", "padded-pal", "padded-twin"):
        p = base.eps_v  # verification stage set from its error target
        return replace(base, p=p, m=rounds_for(p))
    if protocol == "square":
        return replace(base, p=Fraction(1, 3))
    return base
