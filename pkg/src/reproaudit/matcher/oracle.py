"""Brute-force reference matcher for verifying the production backends.

Enumerates, for every exact word pair taken as an alignment start, the best
join length reachable at every other pair under the alignment rule, collects
every (start, end) range pair whose value clears the threshold, and then
discards range pairs contained in other surviving range pairs. No frontier
pruning, no extendability shortcuts: the definition, executed literally.

Intended for tests; inputs above ``SIZE_LIMIT`` words per side are refused.
"""

from __future__ import annotations

from ..textnorm import NormalizedText
from .core import MatcherSizeError, MatchSet, build_spans

SIZE_LIMIT = 250

_DEVS = ((1, 2), (2, 1), (2, 2))


def _oracle_candidates(out_words, book_words, tau, allow_deviations):
    n, m = len(out_words), len(book_words)
    pairs = [(o, b) for o in range(n) for b in range(m)
             if out_words[o] == book_words[b]]
    best: dict[tuple[int, int, int, int], int] = {}

    for (o0, b0) in pairs:
        # value[(o, b, run)] = best join length from (o0, b0) to (o, b),
        # where run counts trailing consecutive (1,1) steps, capped at 2.
        value = {(o0, b0, 0): len(out_words[o0])}
        for (o, b) in pairs:
            if o < o0 or b < b0:
                continue
            for run in (0, 1, 2):
                val = value.get((o, b, run))
                if val is None:
                    continue
                if o + 1 < n and b + 1 < m and out_words[o + 1] == book_words[b + 1]:
                    nxt = (o + 1, b + 1, min(run + 1, 2))
                    cand = val + len(out_words[o + 1]) + 1
                    if cand > value.get(nxt, -1):
                        value[nxt] = cand
                if run == 2 and allow_deviations:
                    for di, dj in _DEVS:
                        oo, bb = o + di, b + dj
                        if oo < n and bb < m and out_words[oo] == book_words[bb]:
                            cand = val + len(out_words[oo]) + 1
                            if cand > value.get((oo, bb, 0), -1):
                                value[(oo, bb, 0)] = cand
        # ends: any pair reached with a trailing (1,1), or the bare start
        for (o, b, run), val in value.items():
            if run == 0 and (o, b) != (o0, b0):
                continue  # a deviation may not close an alignment
            if val > tau:
                key = (b0, o0, b, o)
                if val > best.get(key, -1):
                    best[key] = val
    return [(bs, os_, be, oe, ch) for (bs, os_, be, oe), ch in best.items()]


def _prune(cands):
    kept = []
    for i, a in enumerate(cands):
        dominated = False
        for j, c in enumerate(cands):
            if i == j:
                continue
            if c[0] <= a[0] and c[1] <= a[1] and c[2] >= a[2] and c[3] >= a[3]:
                dominated = True
                break
        if not dominated:
            kept.append(a)
    return kept


def match_oracle(output: NormalizedText, book: NormalizedText, tau: int,
                 exact: bool = False) -> MatchSet:
    """Reference result for :func:`~reproaudit.matcher.match_fuzzy`.

    With ``exact=True`` deviations are disallowed, giving the reference for
    :func:`~reproaudit.matcher.match_exact` instead.
    """
    if tau < 0:
        raise ValueError("tau must be >= 0")
    if len(output.tokens) > SIZE_LIMIT or len(book.tokens) > SIZE_LIMIT:
        raise MatcherSizeError(
            f"oracle accepts at most {SIZE_LIMIT} words per side "
            f"(got {len(output.tokens)} x {len(book.tokens)})")
    if not output.tokens or not book.tokens:
        return MatchSet((), tau, book.raw_ref, output.raw_ref)
    cands = _oracle_candidates(output.words, book.words, tau,
                               allow_deviations=not exact)
    final = _prune(cands)
    return MatchSet(build_spans(output, book, final), tau,
                    book.raw_ref, output.raw_ref)
