"""Prompt templates and per-book instantiation.

Twenty-nine templates in five categories ship as package data
(``data/templates.json``). Instantiation crosses templates with books,
skipping the character-introduction template for books without character
annotations. Templates that embed book text (the text-based category) track
which book token ranges they quoted, so matches that merely echo the prompt
can be discarded later.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import BookRecord, Corpus
from .matcher import MatchSet

logger = logging.getLogger(__name__)

EXPECTED_TEMPLATE_COUNT = 29
CATEGORIES = (
    "reproduction_direct",
    "reproduction_text_based",
    "reproduction_specific",
    "adversarial_obfuscation",
    "adversarial_convincing",
)

_SLOT_RE = re.compile(r"\{(\w+)\}")
_KNOWN_SLOTS = {"title", "author", "first_sentence", "last_sentence", "character"}
_TEXT_SLOTS = {"first_sentence", "last_sentence"}

# Words whose trailing period does not end a sentence.
_ABBREVIATIONS = {
    "mr", "mrs", "ms", "dr", "st", "prof", "rev", "jr", "sr", "vs", "etc",
    "col", "gen", "capt", "lt", "sgt", "no", "vol",
}


class PromptError(ValueError):
    pass


@dataclass(frozen=True)
class PromptTemplate:
    template_id: str
    category: str
    body: str
    skip_in_labeling: bool = False
    requires_character: bool = False
    echo_sensitive: bool = False
    obfuscation_profile: str | None = None

    @property
    def slots(self) -> frozenset[str]:
        return frozenset(_SLOT_RE.findall(self.body))


@dataclass(frozen=True)
class PromptInstance:
    instance_id: str
    template_id: str
    category: str
    book_id: str
    corpus_tag: str
    rendered_text: str
    echo_spans: tuple[tuple[int, int], ...] = ()
    skip_in_labeling: bool = False
    obfuscation_profile: str | None = None

    @property
    def echo_sensitive(self) -> bool:
        return bool(self.echo_spans)


def load_templates(path: str | Path | None = None) -> tuple[PromptTemplate, ...]:
    """Load the template data file (the packaged one by default)."""
    if path is None:
        raw = resources.files("reproaudit.data").joinpath(
            "templates.json").read_text(encoding="utf-8")
    else:
        raw = Path(path).read_text(encoding="utf-8")
    entries = json.loads(raw)
    templates = []
    for e in entries:
        t = PromptTemplate(
            template_id=e["template_id"],
            category=e["category"],
            body=e["body"],
            skip_in_labeling=e.get("skip_in_labeling", False),
            requires_character=e.get("requires_character", False),
            echo_sensitive=e["category"] == "reproduction_text_based",
            obfuscation_profile=e.get("obfuscation_profile"),
        )
        if t.category not in CATEGORIES:
            raise PromptError(f"{t.template_id}: unknown category {t.category}")
        unknown = t.slots - _KNOWN_SLOTS
        if unknown:
            raise PromptError(f"{t.template_id}: unknown slots {sorted(unknown)}")
        templates.append(t)
    if path is None and len(templates) != EXPECTED_TEMPLATE_COUNT:
        raise PromptError(
            f"packaged template file must hold {EXPECTED_TEMPLATE_COUNT} "
            f"templates, found {len(templates)}")
    return tuple(templates)


# ---------------------------------------------------------------------------
# Sentence extraction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BookFields:
    first_sentence: str
    last_sentence: str
    first_range: tuple[int, int]  # token range in the book's NormalizedText
    last_range: tuple[int, int]
    warnings: tuple[str, ...] = ()


def _is_terminator(text: str, i: int) -> bool:
    ch = text[i]
    if ch not in ".!?":
        return False
    if ch == ".":
        # walk back over the word before the period
        j = i - 1
        while j >= 0 and (text[j].isalnum() or text[j] == "'"):
            j -= 1
        word = text[j + 1:i]
        if word.lower() in _ABBREVIATIONS:
            return False
        if len(word) == 1 and word.isalpha() and word.isupper():
            return False  # initials like "J. K."
    n = len(text)
    if i + 1 >= n:
        return True
    if not text[i + 1].isspace():
        return False
    k = i + 1
    while k < n and text[k].isspace():
        k += 1
    return k >= n or text[k].isupper()


_TERM_RE = re.compile(r"[.!?]")


def _sentence_bounds(text: str) -> list[tuple[int, int]]:
    bounds = []
    start = 0
    for mt in _TERM_RE.finditer(text):
        i = mt.start()
        if i < start or not _is_terminator(text, i):
            continue
        if text[start:i + 1].strip():
            bounds.append((start, i + 1))
        start = i + 1
    if text[start:].strip():
        bounds.append((start, len(text)))
    return bounds


def _trim(text: str, start: int, end: int) -> tuple[int, int]:
    while start < end and text[start].isspace():
        start += 1
    while end > start and text[end - 1].isspace():
        end -= 1
    return start, end


def _char_to_token_range(book: BookRecord, start: int, end: int) -> tuple[int, int]:
    tokens = book.normalized.tokens
    lo = next((i for i, t in enumerate(tokens) if t.source_start >= start), len(tokens))
    hi = lo
    while hi < len(tokens) and tokens[hi].source_end <= end:
        hi += 1
    return lo, hi


def extract_fields(book: BookRecord) -> BookFields:
    """First and last sentence of the main text, with their token ranges."""
    text = book.raw_text
    warnings: list[str] = []
    bounds = _sentence_bounds(text)
    terminated = [b for b in bounds
                  if b[1] <= len(text) and text[b[1] - 1] in ".!?"]
    if not terminated:
        # no sentence terminator anywhere: fall back to the first line
        first_line = text.split("\n", 1)[0] or text
        warnings.append(f"{book.book_id}: no sentence terminator found, "
                        "using the first line")
        logger.warning(warnings[-1])
        s, e = _trim(text, 0, len(first_line))
        rng = _char_to_token_range(book, s, e)
        return BookFields(text[s:e], text[s:e], rng, rng, tuple(warnings))
    fs, fe = _trim(text, *bounds[0])
    ls, le = _trim(text, *bounds[-1])
    return BookFields(
        first_sentence=text[fs:fe],
        last_sentence=text[ls:le],
        first_range=_char_to_token_range(book, fs, fe),
        last_range=_char_to_token_range(book, ls, le),
        warnings=tuple(warnings),
    )


# ---------------------------------------------------------------------------
# Instantiation
# ---------------------------------------------------------------------------

def instantiate(templates: Sequence[PromptTemplate],
                corpora: Corpus | Iterable[Corpus]) -> list[PromptInstance]:
    """Cross templates with books; deterministic order (book, then template)."""
    if isinstance(corpora, Corpus):
        corpora = [corpora]
    instances: list[PromptInstance] = []
    for corpus in corpora:
        for book in corpus.books:
            fields = None
            if any(t.slots & _TEXT_SLOTS for t in templates):
                fields = extract_fields(book)
            for tmpl in templates:
                if tmpl.requires_character and not book.characters:
                    continue
                values = {"title": book.title, "author": book.author}
                if book.characters:
                    values["character"] = book.characters[0]
                echo_spans: list[tuple[int, int]] = []
                if fields is not None:
                    values["first_sentence"] = fields.first_sentence
                    values["last_sentence"] = fields.last_sentence
                    if "first_sentence" in tmpl.slots:
                        echo_spans.append(fields.first_range)
                    if "last_sentence" in tmpl.slots:
                        echo_spans.append(fields.last_range)
                rendered = tmpl.body.format_map(values)
                if _SLOT_RE.search(rendered):
                    raise PromptError(
                        f"{tmpl.template_id}: unresolved slot in rendered prompt")
                instances.append(PromptInstance(
                    instance_id=f"{book.book_id}:{tmpl.template_id}",
                    template_id=tmpl.template_id,
                    category=tmpl.category,
                    book_id=book.book_id,
                    corpus_tag=corpus.tag,
                    rendered_text=rendered,
                    echo_spans=tuple(echo_spans) if tmpl.echo_sensitive else (),
                    skip_in_labeling=tmpl.skip_in_labeling,
                    obfuscation_profile=tmpl.obfuscation_profile,
                ))
    return instances


# ---------------------------------------------------------------------------
# Echo filtering
# ---------------------------------------------------------------------------

def _merge_ranges(ranges: Iterable[tuple[int, int]]) -> list[tuple[int, int]]:
    merged: list[list[int]] = []
    for s, e in sorted(ranges):
        if merged and s <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], e)
        else:
            merged.append([s, e])
    return [(s, e) for s, e in merged]


def echo_filter(matches: MatchSet, instance: PromptInstance) -> MatchSet:
    """Drop spans fully explained by text quoted inside the prompt itself.

    Only applies to echo-sensitive instances; a span survives as soon as its
    book range extends beyond the quoted material.
    """
    if not instance.echo_spans or not matches.spans:
        return matches
    union = _merge_ranges(instance.echo_spans)
    kept = tuple(
        s for s in matches.spans
        if not any(rs <= s.book_start and s.book_end <= re_ for rs, re_ in union)
    )
    return replace(matches, spans=kept)
