"""Padded separation witnesses and their structural checker.

A witness samples finitely many block sizes m and exhibits, for each, a word
set W_m with pairwise contexts (u, v) that land uwv and uw'v on opposite
sides of the padded separation.  The checker verifies the conditions
verbatim at the sampled m using the membership oracles; it asserts nothing
about unsampled m.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction

from .languages import (
    STAR,
    LanguageId,
    in_padded_complement,
    in_padded_language,
)


class IncompleteWitnessError(ValueError):
    """A sampled word pair has no context entry."""


@dataclass
class SeparationWitness:
    """Finite sample of a padded-separation hardness witness.

    pair: (A_base, B_base); side A is the padded first language, side B is
    the padded second language, or the padded complement when both coincide.
    contexts maps ordered (m, w, w') to the surrounding (u, v) pair.
    """

    pair: tuple[LanguageId, LanguageId]
    samples: list[int]
    word_sets: dict[int, list[str]]
    contexts: dict[tuple[int, str, str], tuple[str, str]]
    growth_constant: Fraction

    def context_for(self, m: int, w: str, w2: str) -> tuple[str, str]:
        for key in ((m, w, w2), (m, w2, w)):
            if key in self.contexts:
                return self.contexts[key]
        raise IncompleteWitnessError(f"no context for m={m}, pair ({w!r}, {w2!r})")


@dataclass
class WitnessReport:
    pair: tuple[LanguageId, LanguageId]
    sampled_range: list[int]
    per_m: list[dict] = field(default_factory=list)

    @property
    def all_pass(self) -> bool:
        return all(
            all(entry["conditions"].values()) for entry in self.per_m
        )


def _side_a(pair, s):
    return in_padded_language(pair[0], s)


def _side_b(pair, s):
    if pair[0] == pair[1]:
        return in_padded_complement(pair[0], s)
    return in_padded_language(pair[1], s)


def check_separation_witness(witness: SeparationWitness) -> WitnessReport:
    """Verify length bound (g(m)=m), growth (|W_m| >= c^m), context length
    (h(m)=2^m), and opposite-side placement for every sampled m."""
    pair = witness.pair
    report = WitnessReport(pair=pair, sampled_range=list(witness.samples))
    for m in witness.samples:
        words = witness.word_sets[m]
        length_ok = all(len(w) <= m for w in words)
        growth_ok = Fraction(len(words)) >= witness.growth_constant**m
        ctx_length_ok = True
        separation_ok = True
        failures: list[str] = []
        for w, w2 in itertools.combinations(sorted(words), 2):
            u, v = witness.context_for(m, w, w2)
            s1, s2 = u + w + v, u + w2 + v
            if len(s1) > 2**m or len(s2) > 2**m:
                ctx_length_ok = False
                failures.append(f"length({w!r},{w2!r})")
                continue
            opposite = (_side_a(pair, s1) and _side_b(pair, s2)) or (
                _side_b(pair, s1) and _side_a(pair, s2)
            )
            if not opposite:
                separation_ok = False
                failures.append(f"separation({w!r},{w2!r})")
        report.per_m.append(
            {
                "m": m,
                "conditions": {
                    "length_bound": length_ok,
                    "growth": growth_ok,
                    "context_length": ctx_length_ok,
                    "separation": separation_ok,
                },
                "word_count": len(words),
                "required_count": float(witness.growth_constant**m),
                "failures": failures,
            }
        )
    return report


def _all_words(alphabet: str, length: int) -> list[str]:
    return ["".join(t) for t in itertools.product(alphabet, repeat=length)]


def pal_witness(samples=(2, 4, 6, 8)) -> SeparationWitness:
    """Palindrome witness: W_m = {a,b}^{m/2}, u empty, v = w^R with padding."""
    word_sets, contexts = {}, {}
    for m in samples:
        if m % 2:
            raise ValueError("palindrome witness needs even m")
        words = _all_words("ab", m // 2)
        word_sets[m] = words
        for w, w2 in itertools.combinations(words, 2):
            v = w[::-1] + STAR * (2**m - m)
            contexts[(m, w, w2)] = ("", v)
    return SeparationWitness(
        pair=(LanguageId.PAL, LanguageId.PAL),
        samples=list(samples),
        word_sets=word_sets,
        contexts=contexts,
        growth_constant=Fraction(7, 5),
    )


def twin_witness(samples=(3, 5, 7)) -> SeparationWitness:
    """Twin witness: W_m = {a,b}^{(m-1)/2}, u empty, v = #w with padding."""
    word_sets, contexts = {}, {}
    for m in samples:
        if m % 2 == 0 or m < 3:
            raise ValueError("twin witness needs odd m > 1")
        words = _all_words("ab", (m - 1) // 2)
        word_sets[m] = words
        for w, w2 in itertools.combinations(words, 2):
            v = "#" + w + STAR * (2**m - m)
            contexts[(m, w, w2)] = ("", v)
    return SeparationWitness(
        pair=(LanguageId.TWIN, LanguageId.TWIN),
        samples=list(samples),
        word_sets=word_sets,
        contexts=contexts,
        growth_constant=Fraction(5, 4),
    )


def mult_witness(samples=(7, 9)) -> SeparationWitness:
    """Binary-product witness: W_m = 1{0,1}^{(m-5)/2}, u empty, v = #1#w."""
    word_sets, contexts = {}, {}
    for m in samples:
        if m % 2 == 0 or m < 7:
            raise ValueError("product witness needs odd m > 5")
        words = ["1" + t for t in _all_words("01", (m - 5) // 2)]
        word_sets[m] = words
        for w, w2 in itertools.combinations(words, 2):
            v = "#1#" + w + STAR * (2**m - m)
            contexts[(m, w, w2)] = ("", v)
    return SeparationWitness(
        pair=(LanguageId.MULT, LanguageId.MULT),
        samples=list(samples),
        word_sets=word_sets,
        contexts=contexts,
        growth_constant=Fraction(11, 10),
    )


SHIPPED_WITNESSES = {
    "pal": pal_witness,
    "twin": twin_witness,
    "mult": mult_witness,
}


def witness_to_dict(w: SeparationWitness) -> dict:
    samples = []
    for m in w.samples:
        contexts = [
            {"w": a, "w2": b, "u": u, "v": v}
            for (mm, a, b), (u, v) in sorted(w.contexts.items())
            if mm == m
        ]
        samples.append({"m": m, "words": list(w.word_sets[m]), "contexts": contexts})
    return {
        "pair": [w.pair[0].value, w.pair[1].value],
        "samples": samples,
        "growth_constant": f"{w.growth_constant.numerator}/{w.growth_constant.denominator}",
    }


def witness_from_dict(d: dict) -> SeparationWitness:
    pair = tuple(LanguageId(v) for v in d["pair"])
    samples, word_sets, contexts = [], {}, {}
    for entry in d["samples"]:
        m = entry["m"]
        samples.append(m)
        word_sets[m] = list(entry["words"])
        for c in entry["contexts"]:
            contexts[(m, c["w"], c["w2"])] = (c["u"], c["v"])
    num, den = d["growth_constant"].split("/")
    return SeparationWitness(
        pair=pair,  # type: ignore[arg-type]
        samples=samples,
        word_sets=word_sets,
        contexts=contexts,
        growth_constant=Fraction(int(num), int(den)),
    )


def save_witness(w: SeparationWitness, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(witness_to_dict(w), fh, ensure_ascii=False, indent=1)


def load_witness(path) -> SeparationWitness:
    with open(path, encoding="utf-8") as fh:
        return witness_from_dict(json.load(fh))
