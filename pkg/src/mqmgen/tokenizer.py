"""Deterministic word tokenization with character offsets.

Token-span indices must be reproducible bit-for-bit across runs, platforms,
and library upgrades, because span reconciliation and all span metrics key on
them. External tokenizers drift between versions, so the rule set is frozen
here:

* space-delimited languages: split on Unicode whitespace, detach leading and
  trailing punctuation as separate tokens, split contractions at the
  apostrophe ("don't" -> "do", "n't"), keep internal hyphens attached;
* Chinese: every CJK code point is its own token, embedded Latin/digit runs
  stay together and go through the word rules above.

Offsets are Unicode code-point indices (not bytes), half-open on the right.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass

_WS_RUN = re.compile(r"\S+")
_APOSTROPHES = ("'", "’")

_CJK_RANGES = (
    (0x4E00, 0x9FFF),    # CJK Unified Ideographs
    (0x3400, 0x4DBF),    # Extension A
    (0xF900, 0xFAFF),    # Compatibility Ideographs
    (0x20000, 0x2A6DF),  # Extension B
    (0x2A700, 0x2EBEF),  # Extensions C-F
)


@dataclass(frozen=True)
class Token:
    """One token with its half-open code-point span in the original sentence."""

    text: str
    char_start: int
    char_end: int


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def _is_cjk(ch: str) -> bool:
    cp = ord(ch)
    return any(lo <= cp <= hi for lo, hi in _CJK_RANGES)


def _split_core(text: str, start: int, end: int) -> list[Token]:
    """Split the punctuation-stripped core of a word at a contraction
    apostrophe. "n't" keeps the n ("don't" -> "do" + "n't"); any other
    apostrophe attaches to the suffix ("it's" -> "it" + "'s")."""
    core = text[start:end]
    lowered = core.lower()
    for apo in _APOSTROPHES:
        if lowered.endswith("n" + apo + "t") and len(core) > 3:
            cut = end - 3
            return [Token(text[start:cut], start, cut), Token(text[cut:end], cut, end)]
    for i, ch in enumerate(core):
        if ch in _APOSTROPHES and 0 < i < len(core) - 1:
            cut = start + i
            return [Token(text[start:cut], start, cut), Token(text[cut:end], cut, end)]
    return [Token(core, start, end)]


def _split_word_run(text: str, start: int, end: int) -> list[Token]:
    """Tokenize one whitespace-free run: peel leading/trailing punctuation
    code points off as singleton tokens, then split the core."""
    out: list[Token] = []
    i, j = start, end
    while i < j and _is_punct(text[i]):
        out.append(Token(text[i], i, i + 1))
        i += 1
    trailing: list[Token] = []
    while j > i and _is_punct(text[j - 1]):
        trailing.append(Token(text[j - 1], j - 1, j))
        j -= 1
    if i < j:
        out.extend(_split_core(text, i, j))
    out.extend(reversed(trailing))
    return out


def _tokenize_space(text: str) -> list[Token]:
    tokens: list[Token] = []
    for m in _WS_RUN.finditer(text):
        tokens.extend(_split_word_run(text, m.start(), m.end()))
    return tokens


def _tokenize_cjk(text: str) -> list[Token]:
    tokens: list[Token] = []
    run_start = -1
    for i, ch in enumerate(text):
        if ch.isspace():
            if run_start >= 0:
                tokens.extend(_split_word_run(text, run_start, i))
                run_start = -1
        elif _is_cjk(ch):
            if run_start >= 0:
                tokens.extend(_split_word_run(text, run_start, i))
                run_start = -1
            tokens.append(Token(ch, i, i + 1))
        else:
            if run_start < 0:
                run_start = i
    if run_start >= 0:
        tokens.extend(_split_word_run(text, run_start, len(text)))
    return tokens


def tokenize(text: str, lang: str) -> list[Token]:
    """Tokenize ``text`` for language code ``lang`` (ISO-639-1).

    "zh" gets the per-code-point CJK treatment; every other code takes the
    space-delimited path. Empty input yields an empty list. Every
    non-whitespace code point of the input is covered by exactly one token.
    """
    if lang.lower().split("-")[0] == "zh":
        return _tokenize_cjk(text)
    return _tokenize_space(text)


def char_span_of(tokens: list[Token], start: int, end: int) -> tuple[int, int]:
    """Map an inclusive token span to its (char_start, char_end) code-point
    span. Raises IndexError unless 0 <= start <= end < len(tokens)."""
    if not (0 <= start <= end < len(tokens)):
        raise IndexError(
            f"token span ({start}, {end}) out of range for {len(tokens)} tokens"
        )
    return tokens[start].char_start, tokens[end].char_end


def slice_text(text: str, tokens: list[Token], start: int, end: int) -> str:
    """The original-sentence text covered by the inclusive token span."""
    cs, ce = char_span_of(tokens, start, end)
    return text[cs:ce]


def joined_slice(tokens: list[Token], start: int, end: int) -> str:
    """Token texts joined with a single space wherever the sentence had any
    gap, and nothing where tokens are adjacent ("do"+"n't" -> "don't").
    Equivalent to the sentence slice with whitespace runs collapsed."""
    parts = [tokens[start].text]
    for k in range(start + 1, end + 1):
        if tokens[k].char_start > tokens[k - 1].char_end:
            parts.append(" ")
        parts.append(tokens[k].text)
    return "".join(parts)
