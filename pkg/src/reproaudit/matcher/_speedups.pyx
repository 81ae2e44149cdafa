# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled matcher backend: candidate generation over exact word pairs.

Twin of ``_pyfuzzy.py`` with identical semantics. The only divergence is the
fixed per-state frontier capacity: genuinely needing more than FRONTIER_CAP
Pareto-incomparable alignment starts at one pair requires pathological word
repetition, and in that case ``fuzzy_candidates`` returns None so the caller
reruns the job on the unbounded pure-Python implementation.
"""

from libc.stdlib cimport free, malloc
from libc.string cimport memset

DEF FRONTIER_CAP = 4
DEF N_STATES = 4

cdef enum:
    DEV = 0
    START = 1
    ONE = 2
    TWO = 3

cdef struct Entry:
    int bs
    int os
    long long ch

cdef struct Row:
    int n           # pairs used (book positions, ascending)
    int* bvals
    Entry* entries  # [pair][state][slot]
    unsigned char* counts  # [pair][state]


cdef inline bint _insert(Entry* slots, unsigned char* count,
                         int bs, int os, long long ch) nogil:
    """Pareto insert; returns False on capacity overflow."""
    cdef int i, k
    cdef int n = count[0]
    for i in range(n):
        if slots[i].bs <= bs and slots[i].os <= os and slots[i].ch >= ch:
            return True
    k = 0
    for i in range(n):
        if not (bs <= slots[i].bs and os <= slots[i].os and ch >= slots[i].ch):
            if k != i:
                slots[k] = slots[i]
            k += 1
    if k >= FRONTIER_CAP:
        return False
    slots[k].bs = bs
    slots[k].os = os
    slots[k].ch = ch
    count[0] = <unsigned char> (k + 1)
    return True


cdef Row* _row_alloc(int capacity):
    cdef int cap = capacity if capacity > 0 else 1
    cdef Row* row = <Row*> malloc(sizeof(Row))
    if row == NULL:
        return NULL
    row.n = 0
    row.bvals = NULL
    row.entries = NULL
    row.counts = NULL
    row.bvals = <int*> malloc(cap * sizeof(int))
    row.entries = <Entry*> malloc(cap * N_STATES * FRONTIER_CAP * sizeof(Entry))
    row.counts = <unsigned char*> malloc(cap * N_STATES)
    if row.bvals == NULL or row.entries == NULL or row.counts == NULL:
        _row_free(row)
        return NULL
    return row


cdef void _row_free(Row* row):
    if row == NULL:
        return
    if row.bvals != NULL:
        free(row.bvals)
    if row.entries != NULL:
        free(row.entries)
    if row.counts != NULL:
        free(row.counts)
    free(row)


cdef inline Entry* _slots(Row* row, int pair_idx, int state) nogil:
    return row.entries + (pair_idx * N_STATES + state) * FRONTIER_CAP


cdef inline int _find(Row* row, int target, int* cursor) nogil:
    """Advance *cursor to the first pair with bval >= target; -1 if no hit.

    Targets are queried in non-decreasing order per cursor, so the scan is
    amortized O(1) over a row.
    """
    cdef int p = cursor[0]
    while p < row.n and row.bvals[p] < target:
        p += 1
    cursor[0] = p
    if p < row.n and row.bvals[p] == target:
        return p
    return -1


cdef bint _transfer(Row* src_row, int hit, int state_from, int state_to,
                    Row* dst_row, int dst_idx, int wl) nogil:
    cdef Entry* src = _slots(src_row, hit, state_from)
    cdef Entry* dst = _slots(dst_row, dst_idx, state_to)
    cdef unsigned char* cnt = &dst_row.counts[dst_idx * N_STATES + state_to]
    cdef int p
    for p in range(src_row.counts[hit * N_STATES + state_from]):
        if not _insert(dst, cnt, src[p].bs, src[p].os, src[p].ch + wl):
            return False
    return True


def fuzzy_candidates(out_ids, book_ids, word_lens, long tau):
    cdef int n = len(out_ids)
    cdef int m = len(book_ids)
    cdef int vocab = len(word_lens)
    cdef int i, o, b, k, p, st, di, dj, hit, wl, base, max_occ
    cdef int c11_1, c12_1, c11_2, c12_2  # cursors into previous rows
    cdef bint ok = True, dev_ext
    cdef Entry* slots

    cdef int* oid = <int*> malloc((n if n else 1) * sizeof(int))
    cdef int* bid = <int*> malloc((m if m else 1) * sizeof(int))
    cdef int* wlen = <int*> malloc((vocab if vocab else 1) * sizeof(int))
    cdef int* occ_off = <int*> malloc((vocab + 1) * sizeof(int))
    cdef int* occ_pos = <int*> malloc((m if m else 1) * sizeof(int))
    cdef int* occ_fill = <int*> malloc((vocab if vocab else 1) * sizeof(int))
    cdef Row* prev1 = NULL
    cdef Row* prev2 = NULL
    cdef Row* cur = NULL
    cdef Row* spare = NULL

    if oid == NULL or bid == NULL or wlen == NULL or occ_off == NULL \
            or occ_pos == NULL or occ_fill == NULL:
        raise MemoryError()

    results = []
    try:
        for i in range(n):
            oid[i] = out_ids[i]
        for i in range(m):
            bid[i] = book_ids[i]
        for i in range(vocab):
            wlen[i] = word_lens[i]

        # occurrence lists: book positions grouped by word id, ascending
        memset(occ_off, 0, (vocab + 1) * sizeof(int))
        for i in range(m):
            occ_off[bid[i] + 1] += 1
        for i in range(vocab):
            occ_off[i + 1] += occ_off[i]
        for i in range(vocab):
            occ_fill[i] = occ_off[i]
        for i in range(m):
            occ_pos[occ_fill[bid[i]]] = i
            occ_fill[bid[i]] += 1

        max_occ = 1
        for i in range(n):
            k = occ_off[oid[i] + 1] - occ_off[oid[i]]
            if k > max_occ:
                max_occ = k
        # three reusable row buffers sized for the densest word
        prev1 = _row_alloc(max_occ)
        prev2 = _row_alloc(max_occ)
        spare = _row_alloc(max_occ)
        if prev1 == NULL or prev2 == NULL or spare == NULL:
            raise MemoryError()

        for o in range(n):
            cur = spare
            spare = NULL
            k = occ_off[oid[o] + 1] - occ_off[oid[o]]
            cur.n = k
            if k:
                memset(cur.counts, 0, k * N_STATES)
            wl = wlen[oid[o]] + 1  # word plus joining space
            c11_1 = c12_1 = c11_2 = c12_2 = 0
            for i in range(k):
                b = occ_pos[occ_off[oid[o]] + i]
                cur.bvals[i] = b
                base = i * N_STATES

                hit = _find(prev1, b - 1, &c11_1)
                if hit >= 0:
                    ok = (_transfer(prev1, hit, DEV, ONE, cur, i, wl)
                          and _transfer(prev1, hit, START, ONE, cur, i, wl)
                          and _transfer(prev1, hit, ONE, TWO, cur, i, wl)
                          and _transfer(prev1, hit, TWO, TWO, cur, i, wl))
                    if not ok:
                        return None
                hit = _find(prev1, b - 2, &c12_1)
                if hit >= 0 and not _transfer(prev1, hit, TWO, DEV, cur, i, wl):
                    return None
                hit = _find(prev2, b - 1, &c11_2)
                if hit >= 0 and not _transfer(prev2, hit, TWO, DEV, cur, i, wl):
                    return None
                hit = _find(prev2, b - 2, &c12_2)
                if hit >= 0 and not _transfer(prev2, hit, TWO, DEV, cur, i, wl):
                    return None
                if not _insert(_slots(cur, i, START), &cur.counts[base + START],
                               b, o, wl - 1):
                    return None

                # emit entries that cannot extend into a longer alignment
                if o + 1 < n and b + 1 < m and oid[o + 1] == bid[b + 1]:
                    continue
                for st in range(START, TWO + 1):
                    if cur.counts[base + st] == 0:
                        continue
                    if st == TWO:
                        dev_ext = False
                        for di in range(1, 3):
                            for dj in range(1, 3):
                                if di == 1 and dj == 1:
                                    continue
                                if (o + di < n and b + dj < m
                                        and oid[o + di] == bid[b + dj]
                                        and o + di + 1 < n and b + dj + 1 < m
                                        and oid[o + di + 1] == bid[b + dj + 1]):
                                    dev_ext = True
                                    break
                            if dev_ext:
                                break
                        if dev_ext:
                            continue
                    slots = _slots(cur, i, st)
                    for p in range(cur.counts[base + st]):
                        if slots[p].ch > tau:
                            results.append((slots[p].bs, slots[p].os,
                                            b, o, slots[p].ch))
            spare = prev2
            prev2 = prev1
            prev1 = cur
            cur = NULL
        return results
    finally:
        free(oid)
        free(bid)
        free(wlen)
        free(occ_off)
        free(occ_pos)
        free(occ_fill)
        _row_free(prev1)
        _row_free(prev2)
        _row_free(spare)
        _row_free(cur)


def exact_candidates(out_ids, book_ids, word_lens, long tau):
    cdef int n = len(out_ids)
    cdef int m = len(book_ids)
    cdef int vocab = len(word_lens)
    cdef int i, o, b, length
    cdef long long chars

    cdef int* oid = <int*> malloc((n if n else 1) * sizeof(int))
    cdef int* bid = <int*> malloc((m if m else 1) * sizeof(int))
    cdef int* wlen = <int*> malloc((vocab if vocab else 1) * sizeof(int))
    cdef int* occ_off = <int*> malloc((vocab + 1) * sizeof(int))
    cdef int* occ_pos = <int*> malloc((m if m else 1) * sizeof(int))
    cdef int* occ_fill = <int*> malloc((vocab if vocab else 1) * sizeof(int))
    if oid == NULL or bid == NULL or wlen == NULL or occ_off == NULL \
            or occ_pos == NULL or occ_fill == NULL:
        raise MemoryError()

    results = []
    try:
        for i in range(n):
            oid[i] = out_ids[i]
        for i in range(m):
            bid[i] = book_ids[i]
        for i in range(vocab):
            wlen[i] = word_lens[i]
        memset(occ_off, 0, (vocab + 1) * sizeof(int))
        for i in range(m):
            occ_off[bid[i] + 1] += 1
        for i in range(vocab):
            occ_off[i + 1] += occ_off[i]
        for i in range(vocab):
            occ_fill[i] = occ_off[i]
        for i in range(m):
            occ_pos[occ_fill[bid[i]]] = i
            occ_fill[bid[i]] += 1

        for o in range(n):
            for i in range(occ_off[oid[o]], occ_off[oid[o] + 1]):
                b = occ_pos[i]
                if o > 0 and b > 0 and oid[o - 1] == bid[b - 1]:
                    continue
                length = 0
                chars = -1
                while o + length < n and b + length < m \
                        and oid[o + length] == bid[b + length]:
                    chars += wlen[oid[o + length]] + 1
                    length += 1
                if chars > tau:
                    results.append((b, o, b + length - 1, o + length - 1, chars))
        return results
    finally:
        free(oid)
        free(bid)
        free(wlen)
        free(occ_off)
        free(occ_pos)
        free(occ_fill)
