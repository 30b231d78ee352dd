"""Unicode text normalization for knowledge-base identity.

Two names refer to the same thing iff their normalized forms are equal, so
every lookup, uniqueness check and match in the system funnels through
:func:`normalize`. Stored knowledge keeps its original spelling; only
comparisons are normalized.
"""
from __future__ import annotations

import unicodedata
from dataclasses import dataclass

# Arabic harakat (fathatan..sukun) plus the superscript alef. Combining
# class <= 35 for all of these, so removing them can never unblock an NFC
# composition elsewhere in the string.
_HARAKAT = {chr(c) for c in range(0x064B, 0x0653)} | {"ٰ"}

_TATWEEL = "ـ"

# Hamza/madda alef forms and alef wasla collapse to bare alef. The combining
# madda/hamza marks (0653-0655) are folded away too: they are exactly what
# NFC recomposes into the mapped letters, and dropping them keeps the
# mapping idempotent across re-composition.
_ALEF_MAP = {
    0x0622: "ا",  # madda
    0x0623: "ا",  # hamza above
    0x0625: "ا",  # hamza below
    0x0671: "ا",  # wasla
    0x0653: None,
    0x0654: None,
    0x0655: None,
}

_YA_MAP = {0x0649: "ي"}  # alef maqsura -> ya

# Case folding is restricted to the Latin blocks (through Latin Extended-B);
# Arabic is caseless and other scripts are out of scope.
_LATIN_LIMIT = 0x0250


@dataclass(frozen=True)
class NormalizationPolicy:
    """Which orthographic variants are treated as identical."""

    collapse_whitespace: bool = True
    strip_diacritics: bool = True
    strip_tatweel: bool = True
    unify_alef: bool = True
    unify_ya: bool = False
    case_fold: bool = True


DEFAULT_POLICY = NormalizationPolicy()


def _fold_latin(text: str) -> str:
    if not any("A" <= ch <= "Z" or 0x00C0 <= ord(ch) < _LATIN_LIMIT for ch in text):
        return text
    return "".join(
        ch.casefold() if ord(ch) < _LATIN_LIMIT and ch.isalpha() else ch
        for ch in text
    )


def _map_chars(text: str, policy: NormalizationPolicy) -> str:
    if policy.case_fold:
        text = _fold_latin(text)
    if policy.strip_tatweel:
        text = text.replace(_TATWEEL, "")
    if policy.strip_diacritics:
        text = "".join(ch for ch in text if ch not in _HARAKAT)
    if policy.unify_alef:
        text = text.translate(_ALEF_MAP)
    if policy.unify_ya:
        text = text.translate(_YA_MAP)
    return text


def normalize(raw: str, policy: NormalizationPolicy = DEFAULT_POLICY) -> str:
    """Normalize ``raw`` under ``policy``; idempotent for every policy.

    Character mapping and canonical composition feed each other (unifying
    an alef can expose a new composition with a following combining mark),
    so the two are iterated to a fixed point before whitespace handling.
    """
    text = unicodedata.normalize("NFC", raw)
    while True:
        mapped = unicodedata.normalize("NFC", _map_chars(text, policy))
        if mapped == text:
            break
        text = mapped
    if policy.collapse_whitespace:
        text = " ".join(text.split())
    return text


def edit_distance(a: str, b: str) -> int:
    """Levenshtein distance (unit costs), used to rank lint suggestions."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]
