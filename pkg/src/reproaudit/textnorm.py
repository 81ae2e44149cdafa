"""Tokenize raw text into cleaned word sequences with source offsets.

Reference texts and model outputs are compared word-wise, so both go through
the same cleaning before matching:

- Unicode canonical composition (NFC), then lowercasing.
- Every character that is not a letter, a digit, or a word-attached
  apostrophe becomes a separator. Apostrophes (``'`` and the right single
  quotation mark) survive only directly after a word character, which keeps
  contractions and elisions intact ("sho' can't" -> ``sho'``, ``can't``)
  while stray quote marks are dropped.
- Whitespace collapses; tokens are the remaining space-separated words.

The exact cleaning rules are this project's convention; they are pinned by
the test suite (see the 68-character join-length anchor) and must not drift,
or previously computed match lengths become incomparable.

Each token remembers the character range of the raw text it came from, so
user interfaces can highlight matches in the original string.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

PROFILE_STANDARD = "standard"
PROFILE_DEOBFUSCATE = "deobfuscate"

_APOSTROPHES = {"'", "’"}
_HYPHENS = {"-", "‐", "‑"}
# Leet-style letter substitutions undone by the deobfuscate profile.
_DIGIT_MAP = {"4": "a", "0": "o"}
_STRIP_MARKS = {"#", "@"}


@dataclass(frozen=True)
class Token:
    """One normalized word plus the raw-text character range it came from."""

    word: str
    source_start: int
    source_end: int


@dataclass(frozen=True)
class NormalizedText:
    """An ordered token sequence derived from one raw document."""

    tokens: tuple[Token, ...]
    raw_ref: str
    raw_char_count: int

    @property
    def words(self) -> tuple[str, ...]:
        return tuple(t.word for t in self.tokens)

    def __len__(self) -> int:
        return len(self.tokens)

    def char_span(self, start: int, end: int) -> tuple[int, int]:
        """Raw-text character span covering tokens [start, end)."""
        if not 0 <= start < end <= len(self.tokens):
            raise IndexError(f"token range [{start}, {end}) out of bounds")
        return self.tokens[start].source_start, self.tokens[end - 1].source_end


def join_char_len(words: Sequence[str]) -> int:
    """Character length of the single-space join of ``words`` (0 if empty)."""
    if not words:
        return 0
    return sum(len(w) for w in words) + len(words) - 1


def _nfc_stream(raw: str) -> Iterator[tuple[str, int, int]]:
    """Yield (nfc_chars, raw_start, raw_end) per combining sequence.

    Composing per combining sequence keeps offsets anchored to the original
    string even when NFC changes its length.
    """
    if unicodedata.is_normalized("NFC", raw):
        for i, ch in enumerate(raw):
            yield ch, i, i + 1
        return
    i, n = 0, len(raw)
    while i < n:
        j = i + 1
        while j < n and unicodedata.combining(raw[j]):
            j += 1
        yield unicodedata.normalize("NFC", raw[i:j]), i, j
        i = j


def _char_events(raw: str, deobfuscate: bool) -> Iterable[tuple[str, int, int]]:
    """Lowercased single characters with their raw spans, profile applied."""
    for seg, rs, re_ in _nfc_stream(raw):
        for ch in seg:
            if deobfuscate and ch in _DIGIT_MAP:
                ch = _DIGIT_MAP[ch]
            for low in ch.lower():
                yield low, rs, re_


def normalize(raw: str, profile: str = PROFILE_STANDARD,
              raw_ref: str = "") -> NormalizedText:
    """Clean and tokenize ``raw`` into a :class:`NormalizedText`.

    ``profile`` is ``standard`` or ``deobfuscate``. The latter additionally
    maps 4->a and 0->o, drops ``#``/``@`` marks, and removes hyphens between
    word characters, undoing the simple obfuscations adversarial prompts ask
    for. It is an explicit opt-in; applying it to ordinary text would corrupt
    digits.
    """
    if profile not in (PROFILE_STANDARD, PROFILE_DEOBFUSCATE):
        raise ValueError(f"unknown normalization profile: {profile!r}")
    deob = profile == PROFILE_DEOBFUSCATE

    events = list(_char_events(raw, deob))
    tokens: list[Token] = []
    buf: list[str] = []
    tok_start = tok_end = -1

    def flush() -> None:
        nonlocal buf, tok_start, tok_end
        if buf:
            tokens.append(Token("".join(buf), tok_start, tok_end))
        buf = []
        tok_start = tok_end = -1

    for idx, (ch, rs, re_) in enumerate(events):
        if ch.isalpha() or ch.isdigit():
            keep = ch
        elif ch in _APOSTROPHES and buf and (buf[-1].isalpha() or buf[-1].isdigit()):
            keep = "'"
        elif deob and ch in _HYPHENS and buf \
                and (buf[-1].isalpha() or buf[-1].isdigit()) \
                and idx + 1 < len(events) \
                and (events[idx + 1][0].isalpha() or events[idx + 1][0].isdigit()):
            continue  # intra-word hyphen: join the halves
        elif deob and ch in _STRIP_MARKS:
            flush()
            continue
        else:
            flush()
            continue
        if not buf:
            tok_start = rs
        buf.append(keep)
        tok_end = re_
    flush()

    return NormalizedText(tuple(tokens), raw_ref, len(raw))
