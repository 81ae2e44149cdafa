"""Deterministic synthetic memorizer: a test double for model endpoints.

Given a prompt and its book, emits one of four behaviors with configured
probabilities: regurgitate a (possibly mutated) window of the book,
hallucinate text sharing no vocabulary with any book, refuse, or answer
with a non-literal summary. Every output comes with a ground-truth record
(behavior plus the planted match length), which is what end-to-end tests
assert against.

Planted windows avoid prompt-quoted regions and exclusion passages, and
mutations keep three clean words between one another and the window edges,
so the matcher recovers exactly one span per regurgitation whose join
length is known at generation time.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, replace

from .corpus import BookRecord
from .promptkit import PromptInstance
from .textnorm import join_char_len

REFUSAL_TEXT = ("I'm sorry, but I can't share that passage. "
                "The text is protected by copyright.")

# Substitutes for mutated words; the digit infix keeps them out of any
# letters-only vocabulary and out of real book texts.
FILLER_VOCAB = tuple(f"filler{i}x" for i in range(24))

_MIN_EDGE = 3  # mutations keep this many clean words from each window edge
# Deviations need two consecutive aligned steps (three clean words) between
# them, so mutated positions must differ by at least 4.
_MIN_GAP = 4

BEHAVIOR_REGURGITATE = "regurgitate"
BEHAVIOR_HALLUCINATE = "hallucinate"
BEHAVIOR_REFUSE = "refuse"
BEHAVIOR_SUMMARY = "summary"


class SyntheticError(ValueError):
    pass


@dataclass(frozen=True)
class SyntheticProfile:
    regurgitate_prob: float = 0.6
    hallucinate_prob: float = 0.2
    refuse_prob: float = 0.1
    snippet_len_words: tuple[int, int] = (30, 50)
    mutation_rate: float = 0.0
    seed: int = 0

    def __post_init__(self):
        total = self.regurgitate_prob + self.hallucinate_prob + self.refuse_prob
        if not 0 <= total <= 1 + 1e-9:
            raise SyntheticError("behavior probabilities must sum to at most 1")
        lo, hi = self.snippet_len_words
        if lo < 2 * _MIN_EDGE + 1 or hi < lo:
            raise SyntheticError("snippet_len_words range too small")


@dataclass(frozen=True)
class SyntheticTruth:
    """What the synthetic memorizer actually did for one output."""

    instance_id: str
    run_index: int
    behavior: str
    book_id: str
    book_start: int = -1
    book_end: int = -1
    planted_char_len: int = 0
    mutated_words: int = 0

    def as_dict(self) -> dict:
        return {
            "instance_id": self.instance_id, "run_index": self.run_index,
            "behavior": self.behavior, "book_id": self.book_id,
            "book_start": self.book_start, "book_end": self.book_end,
            "planted_char_len": self.planted_char_len,
            "mutated_words": self.mutated_words,
        }


def derive_rng(seed: int, *parts: object) -> random.Random:
    """Process-independent RNG derived from a seed and string parts."""
    material = ":".join([str(seed), *map(str, parts)]).encode("utf-8")
    digest = hashlib.sha256(material).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def _allowed_gaps(book: BookRecord, instance: PromptInstance,
                  length: int) -> list[tuple[int, int]]:
    """Book regions (token ranges) where a window of ``length`` fits without
    touching prompt-quoted text or exclusion passages."""
    n = len(book.normalized.tokens)
    blocked = sorted([*instance.echo_spans, *book.exclusion_ranges])
    gaps = []
    cursor = 0
    for s, e in blocked:
        if s > cursor:
            gaps.append((cursor, s))
        cursor = max(cursor, e)
    if cursor < n:
        gaps.append((cursor, n))
    return [(s, e) for s, e in gaps if e - s >= length]


def _pick_mutations(rng: random.Random, length: int, rate: float) -> list[int]:
    want = round(rate * length)
    if want <= 0:
        return []
    candidates = list(range(_MIN_EDGE, length - _MIN_EDGE))
    rng.shuffle(candidates)
    chosen: list[int] = []
    for pos in candidates:
        if len(chosen) >= want:
            break
        if all(abs(pos - c) >= _MIN_GAP for c in chosen):
            chosen.append(pos)
    return sorted(chosen)


def _hallucination(rng: random.Random, n_words: int) -> str:
    return " ".join(f"hallu{rng.randrange(10_000)}q" for _ in range(n_words))


def synthesize(profile: SyntheticProfile, prompt: PromptInstance,
               book: BookRecord, run_index: int = 0
               ) -> tuple[str, SyntheticTruth]:
    """One synthetic output plus its ground truth; deterministic per
    (profile seed, instance, run)."""
    rng = derive_rng(profile.seed, prompt.instance_id, run_index)
    roll = rng.random()
    base = SyntheticTruth(prompt.instance_id, run_index, BEHAVIOR_SUMMARY,
                          book.book_id)

    if roll < profile.regurgitate_prob:
        length = rng.randint(*profile.snippet_len_words)
        gaps = _allowed_gaps(book, prompt, length)
        if gaps:
            gs, ge = gaps[rng.randrange(len(gaps))]
            start = rng.randint(gs, ge - length)
            window = list(book.normalized.words[start:start + length])
            mutations = _pick_mutations(rng, length, profile.mutation_rate)
            for pos in mutations:
                window[pos] = FILLER_VOCAB[rng.randrange(len(FILLER_VOCAB))]
            common = [w for i, w in enumerate(
                book.normalized.words[start:start + length])
                if i not in set(mutations)]
            text = " ".join(window)
            if rng.random() < 0.5:
                text = _hallucination(rng, rng.randint(3, 8)) + " " + text
            if rng.random() < 0.5:
                text = text + " " + _hallucination(rng, rng.randint(3, 8))
            return text, SyntheticTruth(
                prompt.instance_id, run_index, BEHAVIOR_REGURGITATE,
                book.book_id, book_start=start, book_end=start + length,
                planted_char_len=join_char_len(common),
                mutated_words=len(mutations))
        # nowhere to plant a window: degrade to hallucination
        return (_hallucination(rng, 40),
                replace(base, behavior=BEHAVIOR_HALLUCINATE))

    roll -= profile.regurgitate_prob
    if roll < profile.hallucinate_prob:
        return (_hallucination(rng, rng.randint(30, 80)),
                replace(base, behavior=BEHAVIOR_HALLUCINATE))

    roll -= profile.hallucinate_prob
    if roll < profile.refuse_prob:
        return REFUSAL_TEXT, replace(base, behavior=BEHAVIOR_REFUSE)

    summary = (f"The book {book.title} by {book.author} is a well known work; "
               "this answer only describes it in broad strokes without "
               "quoting the original wording.")
    return summary, base
