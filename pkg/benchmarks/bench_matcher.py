#!/usr/bin/env python3
"""Benchmark the compiled matcher kernel against the pure-Python fallback.

Synthesizes book-like texts at several sizes (Zipf-weighted vocabulary, a
planted verbatim block in each output) and times fuzzy and exact matching
end to end, confirming along the way that both backends emit identical
match sets.

Usage: python benchmarks/bench_matcher.py [--full]
"""

from __future__ import annotations

import argparse
import random
import time

from reproaudit import matcher
from reproaudit.matcher import _pyfuzzy, core
from reproaudit.textnorm import normalize

SIZES = [
    ("small", 5_000, 400),
    ("medium", 40_000, 600),
    ("large", 120_000, 900),
]
FULL_SIZES = SIZES + [("book", 280_000, 900)]


def make_pair(n_book: int, n_out: int, seed: int):
    rng = random.Random(seed)
    vocab = [f"w{i}" for i in range(6_000)]
    weights = [1.0 / (r + 1) for r in range(len(vocab))]
    book_words = rng.choices(vocab, weights=weights, k=n_book)
    plant = n_out // 2
    out_words = rng.choices(vocab, weights=weights, k=n_out - plant)
    start = rng.randrange(0, n_book - plant)
    out_words += book_words[start:start + plant]
    return (normalize(" ".join(out_words), raw_ref="out"),
            normalize(" ".join(book_words), raw_ref="book"))


def run_backend(fn, out, book, tau):
    out_ids, book_ids, word_lens = core._encode(out, book)
    started = time.perf_counter()
    cands = fn(out_ids, book_ids, word_lens, tau)
    elapsed = time.perf_counter() - started
    return core.finalize(out, book, cands, tau), elapsed


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--full", action="store_true",
                        help="include the full book-sized case (slow in "
                             "pure Python)")
    parser.add_argument("--tau", type=int, default=160)
    args = parser.parse_args()

    if matcher._speedups is None:
        print("compiled kernel unavailable; nothing to compare against")
        return

    sizes = FULL_SIZES if args.full else SIZES
    print(f"{'case':<8} {'book words':>10} {'pairs':>10} "
          f"{'compiled':>10} {'python':>10} {'speedup':>8}")
    for name, n_book, n_out in sizes:
        out, book = make_pair(n_book, n_out, seed=hash(name) & 0xFFFF)
        from collections import Counter
        counts = Counter(book.words)
        pairs = sum(counts[w] for w in out.words)

        compiled_ms, t_c = run_backend(matcher._speedups.fuzzy_candidates,
                                       out, book, args.tau)
        python_ms, t_p = run_backend(_pyfuzzy.fuzzy_candidates,
                                     out, book, args.tau)
        if compiled_ms.spans != python_ms.spans:
            raise SystemExit(f"{name}: backend results diverge")
        print(f"{name:<8} {n_book:>10,} {pairs:>10,} "
              f"{t_c * 1000:>8.1f}ms {t_p * 1000:>8.1f}ms "
              f"{t_p / t_c:>7.1f}x")
    print("\nresults identical across backends for every case")


if __name__ == "__main__":
    main()
