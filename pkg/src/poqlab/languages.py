"""Ground-truth membership oracles, exponential padding, and promise checking.

Every language gets a direct deterministic oracle evaluated from its
set-builder definition; these are the reference judges that machines and
protocols are tested against, so they must stay independent of any automaton
in this package.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

LEFT_END = "▷"   # ▷
RIGHT_END = "◁"  # ◁
STAR = "⋆"       # ⋆ padding symbol
HASH = "#"

MAX_CORE_LEN = 20  # 2^20 total padded length is the desk-scale ceiling


class AlphabetError(ValueError):
    """Input contains a symbol outside the language's alphabet."""


class ResourceBoundError(ValueError):
    """Requested object exceeds the configured desk-scale bounds."""


class LanguageId(enum.Enum):
    EQ = "EQ"
    EQ_AB = "EQ_ab"
    PAL = "PAL"
    TWIN = "TWIN"
    MULT = "MULT"
    SQUARE = "SQUARE"
    SUBSQUARE = "SUBSQUARE"
    POWER = "POWER"
    POWER_EQ = "POWER_EQ"


ALPHABETS = {
    LanguageId.EQ: frozenset("ab"),
    LanguageId.EQ_AB: frozenset("ab"),
    LanguageId.PAL: frozenset("ab"),
    LanguageId.TWIN: frozenset("ab#"),
    LanguageId.MULT: frozenset("01#"),
    LanguageId.SQUARE: frozenset("ab"),
    LanguageId.SUBSQUARE: frozenset("ab"),
    LanguageId.POWER: frozenset("ab"),
    LanguageId.POWER_EQ: frozenset("ab"),
}


def _check_alphabet(lang: LanguageId, w: str) -> None:
    bad = set(w) - ALPHABETS[lang]
    if bad:
        raise AlphabetError(f"symbols {sorted(bad)} not in alphabet of {lang.value}")


def _block_split(w: str) -> tuple[int, int] | None:
    """Split a^i b^j; None if w is not of that shape."""
    i = 0
    while i < len(w) and w[i] == "a":
        i += 1
    j = len(w) - i
    if any(c != "b" for c in w[i:]):
        return None
    return i, j


def _is_power_eq(w: str) -> bool:
    # a b a^7 b a^{7*8} b a^{7*8^2} ... b a^{7*8^n}
    blocks = w.split("b")
    if len(blocks) < 2 or any(set(b) - {"a"} for b in blocks):
        return False
    if blocks[0] != "a":
        return False
    expected = 7
    for b in blocks[1:]:
        if len(b) != expected:
            return False
        expected *= 8
    return True


def membership(lang: LanguageId, w: str) -> bool:
    """Decide w's membership per the language's set-builder definition."""
    _check_alphabet(lang, w)
    if lang is LanguageId.EQ:
        return w.count("a") == w.count("b")
    if lang is LanguageId.EQ_AB:
        split = _block_split(w)
        return split is not None and split[0] == split[1]
    if lang is LanguageId.PAL:
        return w == w[::-1]
    if lang is LanguageId.TWIN:
        if w.count(HASH) != 1:
            return False
        left, right = w.split(HASH)
        return left == right
    if lang is LanguageId.MULT:
        if w.count(HASH) != 2:
            return False
        parts = w.split(HASH)
        if any(p == "" for p in parts):
            return False
        x, y, z = (int(p, 2) for p in parts)  # most-significant-bit first
        return x * y == z
    if lang is LanguageId.SQUARE:
        split = _block_split(w)
        return split is not None and split[0] > 0 and split[1] == split[0] ** 2
    if lang is LanguageId.SUBSQUARE:
        split = _block_split(w)
        return split is not None and split[1] < split[0] ** 2
    if lang is LanguageId.POWER:
        split = _block_split(w)
        return split is not None and split[0] > 0 and split[1] == 2 ** split[0]
    if lang is LanguageId.POWER_EQ:
        return _is_power_eq(w)
    raise ValueError(lang)


def complement_membership(lang: LanguageId, w: str) -> bool:
    return not membership(lang, w)


@dataclass(frozen=True)
class PaddedString:
    """Core plus the count of trailing padding stars."""

    core: str
    padding_length: int

    def render(self, star: str = STAR) -> str:
        return self.core + star * self.padding_length

    @property
    def total_length(self) -> int:
        return len(self.core) + self.padding_length


def pad(x: str, max_core_len: int = MAX_CORE_LEN) -> PaddedString:
    """Append stars so the total length reaches 2^|x|."""
    if len(x) > max_core_len:
        raise ResourceBoundError(
            f"core length {len(x)} exceeds desk-scale maximum {max_core_len}"
        )
    if STAR in x:
        raise ValueError("padding symbol may not appear in the core")
    return PaddedString(core=x, padding_length=2 ** len(x) - len(x))


def check_promise(s: str, star: str = STAR) -> tuple[str, bool]:
    """Split at the first star; the promise holds iff the suffix is all stars
    and the total length is exactly 2^|core|."""
    cut = s.find(star)
    if cut == -1:
        core, suffix = s, ""
    else:
        core, suffix = s[:cut], s[cut:]
    ok = all(c == star for c in suffix) and len(s) == 2 ** len(core)
    return core, ok


def in_padded_language(lang: LanguageId, s: str, star: str = STAR) -> bool:
    """Membership in the padded language: promise holds and core is a member."""
    core, ok = check_promise(s, star)
    if not ok:
        return False
    try:
        return membership(lang, core)
    except AlphabetError:
        return False


def in_padded_complement(lang: LanguageId, s: str, star: str = STAR) -> bool:
    """Membership in the padded complement: promise holds, core over the
    language's alphabet, and the core is a non-member."""
    core, ok = check_promise(s, star)
    if not ok:
        return False
    if set(core) - ALPHABETS[lang]:
        return False
    return not membership(lang, core)
