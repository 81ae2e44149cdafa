"""Pure-Python matcher backend.

Same contract as the compiled backend in ``_speedups.pyx``: given word-id
sequences and per-id word lengths, emit raw match candidates
``(book_start, out_start, book_end_incl, out_end_incl, chars)`` that are not
extendable into a longer valid alignment. Containment pruning and span
construction happen in :mod:`.core`.

The fuzzy search is a forward sweep over exact word pairs. For every pair it
keeps, per alignment tail state, a small Pareto frontier of possible
alignment starts: an entry is dropped only when another entry starts no
later on both sides and has at least the same join length, in which case the
dropped alignment can never yield a maximal match the kept one does not
cover. Frontiers are unbounded here; the compiled backend caps them and
defers to this implementation on overflow.
"""

from __future__ import annotations

from collections import defaultdict
from typing import Sequence

from .core import DEV, DEVIATION_STEPS, ONE, START, TWO, RawCandidate

# state transition taken by a (1,1) step
_TRANS11 = ((DEV, ONE), (START, ONE), (ONE, TWO), (TWO, TWO))


def _insert(entries: list, bs: int, os_: int, ch: int) -> None:
    for eb, eo, ec in entries:
        if eb <= bs and eo <= os_ and ec >= ch:
            return
    entries[:] = [e for e in entries
                  if not (bs <= e[0] and os_ <= e[1] and ch >= e[2])]
    entries.append((bs, os_, ch))


def fuzzy_candidates(out_ids: Sequence[int], book_ids: Sequence[int],
                     word_lens: Sequence[int], tau: int) -> list[RawCandidate]:
    n, m = len(out_ids), len(book_ids)
    occ: dict[int, list[int]] = defaultdict(list)
    for b, wid in enumerate(book_ids):
        occ[wid].append(b)

    def pair(o: int, b: int) -> bool:
        return o < n and b < m and out_ids[o] == book_ids[b]

    cands: list[RawCandidate] = []
    prev1: dict[int, tuple] = {}
    prev2: dict[int, tuple] = {}
    for o in range(n):
        cur: dict[int, tuple] = {}
        wid = out_ids[o]
        wl = word_lens[wid]
        for b in occ.get(wid, ()):
            states: tuple[list, list, list, list] = ([], [], [], [])
            p = prev1.get(b - 1)
            if p is not None:
                for sf, st in _TRANS11:
                    for ebs, eos, ech in p[sf]:
                        _insert(states[st], ebs, eos, ech + wl + 1)
            # deviations reach this pair from a TWO state only
            for prow, pb in ((prev1, b - 2), (prev2, b - 1), (prev2, b - 2)):
                p = prow.get(pb)
                if p is not None:
                    for ebs, eos, ech in p[TWO]:
                        _insert(states[DEV], ebs, eos, ech + wl + 1)
            _insert(states[START], b, o, wl)
            cur[b] = states

            # Emit unless the alignment extends into a longer valid one.
            if pair(o + 1, b + 1):
                continue
            dev_ext = None
            for st in (START, ONE, TWO):
                if st == TWO:
                    if dev_ext is None:
                        dev_ext = any(
                            pair(o + di, b + dj) and pair(o + di + 1, b + dj + 1)
                            for di, dj in DEVIATION_STEPS)
                    if dev_ext:
                        continue
                for ebs, eos, ech in states[st]:
                    if ech > tau:
                        cands.append((ebs, eos, b, o, ech))
        prev2 = prev1
        prev1 = cur
    return cands


def exact_candidates(out_ids: Sequence[int], book_ids: Sequence[int],
                     word_lens: Sequence[int], tau: int) -> list[RawCandidate]:
    """Maximal runs of consecutive equal words (no deviations)."""
    n, m = len(out_ids), len(book_ids)
    occ: dict[int, list[int]] = defaultdict(list)
    for b, wid in enumerate(book_ids):
        occ[wid].append(b)

    cands: list[RawCandidate] = []
    for o in range(n):
        for b in occ.get(out_ids[o], ()):
            if o > 0 and b > 0 and out_ids[o - 1] == book_ids[b - 1]:
                continue  # interior of a run; handled from its head
            length = 0
            chars = -1
            while o + length < n and b + length < m \
                    and out_ids[o + length] == book_ids[b + length]:
                chars += word_lens[out_ids[o + length]] + 1
                length += 1
            if chars > tau:
                cands.append((b, o, b + length - 1, o + length - 1, chars))
    return cands
