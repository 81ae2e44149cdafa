"""Word-level fuzzy matching between a model output and a reference text.

A *match* is an alignment of exact word pairs, strictly increasing on both
sides. Consecutive aligned pairs advance by steps in {(1,1), (1,2), (2,1),
(2,2)}: a (1,1) step pairs adjacent words, any other step skips one word on
one or both sides (one inserted, omitted, or substituted word). Deviating
steps are only allowed after at least two consecutive (1,1) steps within the
alignment, and an alignment never starts or ends with a deviation. This
tolerates isolated one-word edits (edition differences, British/American
spelling) while rejecting two divergent words in a row, which empirically
produces false positives.

The match value is the character length of the single-space join of the
aligned (common) words. A match is reported when that length strictly
exceeds the threshold ``tau`` and the match is maximal: no other reported
candidate contains it on both the book range and the output range.

Candidate generation is delegated to a backend (compiled or pure Python, see
:mod:`reproaudit.matcher`); this module owns the public types, the
finalization steps shared by all matchers, and the word-level LCS and
similarity predicates the alignment rule is derived from.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Iterable, Sequence

from ..textnorm import NormalizedText, join_char_len

UNCERTAIN_RATIO = 0.9

# Deviating steps: (output advance, book advance).
DEVIATION_STEPS = ((1, 2), (2, 1), (2, 2))

# Alignment tail states shared by every backend. The names describe what the
# path just did; deviations are legal only from TWO, and a path may only end
# in START/ONE/TWO (never right after a deviation).
DEV, START, ONE, TWO = 0, 1, 2, 3


class MatcherSizeError(ValueError):
    """Raised when the brute-force oracle gets inputs above its size bound."""


@dataclass(frozen=True)
class MatchSpan:
    """One maximal fuzzy match between an output and a book.

    Ranges are token-index ranges (inclusive start, exclusive end) into the
    respective :class:`~reproaudit.textnorm.NormalizedText`. ``common_words``
    is the aligned word sequence; ``char_len`` its single-space join length.
    The window join lengths support the uncertainty ratio check.
    """

    book_start: int
    book_end: int
    out_start: int
    out_end: int
    common_words: tuple[str, ...]
    char_len: int
    book_window_char_len: int
    out_window_char_len: int
    downgraded: bool = False

    @property
    def book_range(self) -> tuple[int, int]:
        return self.book_start, self.book_end

    @property
    def output_range(self) -> tuple[int, int]:
        return self.out_start, self.out_end


@dataclass(frozen=True)
class MatchSet:
    """All maximal matches above ``tau`` for one (output, book) pair."""

    spans: tuple[MatchSpan, ...]
    tau: int
    book_ref: str
    output_ref: str

    def total_char_len(self, include_downgraded: bool = False) -> int:
        return sum(s.char_len for s in self.spans
                   if include_downgraded or not s.downgraded)


def lcs_words(x: Sequence[str], y: Sequence[str]) -> list[str]:
    """Longest common subsequence of two word sequences.

    Ties are broken by preferring matches later in ``y``, which makes the
    result deterministic.
    """
    xi, _ = _lcs_positions(x, y)
    return [x[i] for i in xi]


def _lcs_positions(x: Sequence[str], y: Sequence[str]) -> tuple[list[int], list[int]]:
    """Matched index lists (into x and into y) of one deterministic LCS."""
    n, m = len(x), len(y)
    dp = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        row, prev = dp[i], dp[i - 1]
        xi = x[i - 1]
        for j in range(1, m + 1):
            if xi == y[j - 1]:
                row[j] = prev[j - 1] + 1
            else:
                a, b = prev[j], row[j - 1]
                row[j] = a if a >= b else b
    xi_pos: list[int] = []
    yi_pos: list[int] = []
    i, j = n, m
    while i > 0 and j > 0:
        if x[i - 1] == y[j - 1]:
            xi_pos.append(i - 1)
            yi_pos.append(j - 1)
            i -= 1
            j -= 1
        elif dp[i - 1][j] >= dp[i][j - 1]:
            i -= 1  # drop x's last word: keeps matches later in y
        else:
            j -= 1
    xi_pos.reverse()
    yi_pos.reverse()
    return xi_pos, yi_pos


def similar(x: Sequence[str], y: Sequence[str]) -> bool:
    """True iff only isolated single words differ between ``x`` and ``y``.

    Every word outside the LCS must have its two predecessors inside the
    LCS, on both sides. Unmatched words within the first two positions fail
    the predicate (their predecessors do not exist).
    """
    xi_pos, yi_pos = _lcs_positions(x, y)
    for positions, seq in ((xi_pos, x), (yi_pos, y)):
        matched = set(positions)
        for i in range(len(seq)):
            if i in matched:
                continue
            if i < 2 or (i - 1) not in matched or (i - 2) not in matched:
                return False
    return True


def flag_uncertain(span: MatchSpan) -> bool:
    """Matches whose join covers <90% of either window need human review."""
    return (span.char_len < UNCERTAIN_RATIO * span.book_window_char_len
            or span.char_len < UNCERTAIN_RATIO * span.out_window_char_len)


# ---------------------------------------------------------------------------
# Candidate finalization (shared by the fuzzy and exact matchers)
# ---------------------------------------------------------------------------

# A raw candidate is (book_start, out_start, book_end_incl, out_end_incl, chars).
RawCandidate = tuple[int, int, int, int, int]


def _encode(output: NormalizedText, book: NormalizedText):
    vocab: dict[str, int] = {}
    word_lens: list[int] = []

    def enc(words: Iterable[str]) -> list[int]:
        ids = []
        for w in words:
            wid = vocab.get(w)
            if wid is None:
                wid = len(vocab)
                vocab[w] = wid
                word_lens.append(len(w))
            ids.append(wid)
        return ids

    return enc(output.words), enc(book.words), word_lens


def dedupe_candidates(cands: Iterable[RawCandidate]) -> list[RawCandidate]:
    """Keep the best character count per distinct (book, output) range pair."""
    best: dict[tuple[int, int, int, int], int] = {}
    for bs, os_, be, oe, ch in cands:
        key = (bs, os_, be, oe)
        if ch > best.get(key, -1):
            best[key] = ch
    return [(bs, os_, be, oe, ch) for (bs, os_, be, oe), ch in best.items()]


def prune_contained(cands: Sequence[RawCandidate]) -> list[RawCandidate]:
    """Drop candidates contained in another candidate on both ranges."""
    kept = []
    for a in cands:
        contained = any(
            b is not a
            and b[0] <= a[0] and b[1] <= a[1] and b[2] >= a[2] and b[3] >= a[3]
            and (b[0], b[1], b[2], b[3]) != (a[0], a[1], a[2], a[3])
            for b in cands
        )
        if not contained:
            kept.append(a)
    return kept


def reconstruct_common_words(out_words: Sequence[str], book_words: Sequence[str],
                             cand: RawCandidate) -> tuple[tuple[str, ...], int]:
    """Recover the aligned word sequence for a finalized candidate.

    Runs the alignment state machine restricted to the candidate's ranges and
    returns the maximum-length common word sequence plus its join length.
    Deterministic: on character ties the transition tried first wins.
    """
    bs, os_, be, oe, _ = cand
    trans11 = {DEV: ONE, START: ONE, ONE: TWO, TWO: TWO}
    # (o, b, state) -> (chars, parent key)
    best: dict[tuple[int, int, int], tuple[int, tuple | None]] = {
        (os_, bs, START): (len(out_words[os_]), None)
    }
    for o in range(os_, oe + 1):
        for b in range(bs, be + 1):
            if out_words[o] != book_words[b] or (o, b) == (os_, bs):
                continue
            wl = len(out_words[o]) + 1
            for (po, pb), allowed in (((o - 1, b - 1), (TWO, ONE, START, DEV)),
                                      ((o - 1, b - 2), (TWO,)),
                                      ((o - 2, b - 1), (TWO,)),
                                      ((o - 2, b - 2), (TWO,))):
                to_dev = (po, pb) != (o - 1, b - 1)
                for sf in allowed:
                    prev = best.get((po, pb, sf))
                    if prev is None:
                        continue
                    st = DEV if to_dev else trans11[sf]
                    ch = prev[0] + wl
                    cur = best.get((o, b, st))
                    if cur is None or ch > cur[0]:
                        best[(o, b, st)] = (ch, (po, pb, sf))
    end_key = None
    end_chars = -1
    for st in (TWO, ONE, START):
        hit = best.get((oe, be, st))
        if hit is not None and hit[0] > end_chars:
            end_chars = hit[0]
            end_key = (oe, be, st)
    if end_key is None:
        raise AssertionError("candidate has no valid alignment")
    words: list[str] = []
    key: tuple | None = end_key
    while key is not None:
        words.append(out_words[key[0]])
        key = best[key][1]
    words.reverse()
    return tuple(words), end_chars


def build_spans(output: NormalizedText, book: NormalizedText,
                final_cands: Iterable[RawCandidate]) -> tuple[MatchSpan, ...]:
    """Turn finalized candidates into sorted, fully populated spans."""
    out_words, book_words = output.words, book.words
    spans = []
    for cand in sorted(final_cands):
        bs, os_, be, oe, ch = cand
        common, rebuilt = reconstruct_common_words(out_words, book_words, cand)
        if rebuilt != ch:
            raise AssertionError(
                f"reconstructed join length {rebuilt} != candidate {ch}")
        spans.append(MatchSpan(
            book_start=bs, book_end=be + 1,
            out_start=os_, out_end=oe + 1,
            common_words=common, char_len=ch,
            book_window_char_len=join_char_len(book_words[bs:be + 1]),
            out_window_char_len=join_char_len(out_words[os_:oe + 1]),
        ))
    return tuple(spans)


def finalize(output: NormalizedText, book: NormalizedText,
             cands: Iterable[RawCandidate], tau: int) -> MatchSet:
    final = prune_contained(dedupe_candidates(cands))
    return MatchSet(
        spans=build_spans(output, book, final),
        tau=tau, book_ref=book.raw_ref, output_ref=output.raw_ref,
    )


def run_matcher(backend_fn: Callable, output: NormalizedText,
                book: NormalizedText, tau: int) -> MatchSet:
    if tau < 0:
        raise ValueError("tau must be >= 0")
    if not output.tokens or not book.tokens:
        return MatchSet((), tau, book.raw_ref, output.raw_ref)
    out_ids, book_ids, word_lens = _encode(output, book)
    cands = backend_fn(out_ids, book_ids, word_lens, tau)
    return finalize(output, book, cands, tau)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def span_record(ms: MatchSet, span: MatchSpan) -> dict:
    """Flat JSON record for one span (line-delimited JSON interface)."""
    return {
        "book_ref": ms.book_ref,
        "output_ref": ms.output_ref,
        "book_start": span.book_start,
        "book_end": span.book_end,
        "out_start": span.out_start,
        "out_end": span.out_end,
        "char_len": span.char_len,
        "uncertain": flag_uncertain(span),
        "downgraded": span.downgraded,
    }


def matchset_records(ms: MatchSet) -> list[dict]:
    return [span_record(ms, s) for s in ms.spans]


def with_downgrades(ms: MatchSet, flags: Sequence[bool]) -> MatchSet:
    """Copy of ``ms`` with per-span downgrade flags; geometry is untouched."""
    if len(flags) != len(ms.spans):
        raise ValueError("one flag per span required")
    spans = tuple(replace(s, downgraded=bool(f)) for s, f in zip(ms.spans, flags))
    return replace(ms, spans=spans)
