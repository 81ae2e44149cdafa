"""Book corpus ingestion, validation, lint, and exclusion handling.

A corpus is described by a JSON manifest (metadata only; the raw book texts
are user-supplied files referenced by relative path). Loading normalizes
every book, resolves exclusion passages to token ranges, and optionally
persists the token sequences to a cache directory keyed by book id.

Only the two corpus tags used by the audit are accepted: ``copyrighted``
and ``public_domain``.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .matcher import MatchSet, with_downgrades
from .textnorm import NormalizedText, Token, normalize

CORPUS_TAGS = ("copyrighted", "public_domain")


class CorpusError(ValueError):
    """Manifest or book-content problem, always naming the offending book."""


@dataclass(frozen=True)
class ExclusionPassage:
    """A passage whose matches never count as significant reproductions."""

    label: str
    text: str
    treat_as: str = "insignificant"


@dataclass(frozen=True)
class LintFinding:
    kind: str
    message: str
    location: int  # line number or character offset, depending on kind


@dataclass
class BookRecord:
    book_id: str
    title: str
    author: str
    corpus_tag: str
    text_path: Path
    characters: tuple[str, ...] = ()
    exclusions: tuple[ExclusionPassage, ...] = ()
    sha256: str | None = None
    raw_text: str = field(default="", repr=False)
    normalized: NormalizedText | None = field(default=None, repr=False)
    # resolved exclusion occurrences as token ranges (start, end)
    exclusion_ranges: tuple[tuple[int, int], ...] = ()


@dataclass
class Corpus:
    tag: str
    books: tuple[BookRecord, ...]

    @property
    def book_count(self) -> int:
        return len(self.books)

    def get(self, book_id: str) -> BookRecord:
        for b in self.books:
            if b.book_id == book_id:
                return b
        raise KeyError(book_id)


def _find_word_subsequence(haystack: tuple[str, ...],
                           needle: tuple[str, ...]) -> list[tuple[int, int]]:
    """All occurrences of ``needle`` as a contiguous word run."""
    hits = []
    if not needle or len(needle) > len(haystack):
        return hits
    first = needle[0]
    for i in range(len(haystack) - len(needle) + 1):
        if haystack[i] == first and haystack[i:i + len(needle)] == needle:
            hits.append((i, i + len(needle)))
    return hits


def _load_book(entry: dict, base_dir: Path, cache_dir: Path | None,
               corpus_tag: str) -> BookRecord:
    book_id = entry.get("book_id") or ""
    if not book_id:
        raise CorpusError("manifest entry without book_id")
    title = entry.get("title") or ""
    author = entry.get("author") or ""
    if not title or not author:
        raise CorpusError(f"{book_id}: title and author are required")
    text_path = base_dir / entry["text_path"]
    if not text_path.is_file():
        raise CorpusError(f"{book_id}: text file not found: {text_path}")
    raw = text_path.read_text(encoding="utf-8")
    digest = hashlib.sha256(raw.encode("utf-8")).hexdigest()
    expected = entry.get("sha256")
    if expected and digest != expected:
        raise CorpusError(f"{book_id}: text checksum mismatch "
                          f"(expected {expected[:12]}..., got {digest[:12]}...)")

    normalized = None
    if cache_dir is not None:
        cached = _read_cache(cache_dir / f"{book_id}.json", digest, book_id)
        if cached is not None:
            normalized = cached
    if normalized is None:
        normalized = normalize(raw, raw_ref=book_id)
        if cache_dir is not None:
            _write_cache(cache_dir / f"{book_id}.json", digest, normalized)

    exclusions = tuple(
        ExclusionPassage(x["label"], x["text"], x.get("treat_as", "insignificant"))
        for x in entry.get("exclusions", ()))
    ranges: list[tuple[int, int]] = []
    for exc in exclusions:
        needle = normalize(exc.text).words
        hits = _find_word_subsequence(normalized.words, needle)
        if not hits:
            raise CorpusError(
                f"{book_id}: exclusion passage {exc.label!r} not found in text")
        ranges.extend(hits)

    return BookRecord(
        book_id=book_id, title=title, author=author, corpus_tag=corpus_tag,
        text_path=text_path, characters=tuple(entry.get("characters", ())),
        exclusions=exclusions, sha256=expected, raw_text=raw,
        normalized=normalized, exclusion_ranges=tuple(sorted(ranges)),
    )


def load_corpus(manifest_path: str | Path,
                cache_dir: str | Path | None = None) -> Corpus:
    """Load and validate a corpus manifest; normalize and cache every book."""
    manifest_path = Path(manifest_path)
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CorpusError(f"cannot read manifest {manifest_path}: {exc}") from exc
    tag = manifest.get("corpus_tag")
    if tag not in CORPUS_TAGS:
        raise CorpusError(f"manifest corpus_tag must be one of {CORPUS_TAGS}, "
                          f"got {tag!r}")
    cache = Path(cache_dir) if cache_dir is not None else None
    if cache is not None:
        cache.mkdir(parents=True, exist_ok=True)

    books = []
    seen: set[str] = set()
    for entry in manifest.get("books", ()):
        book = _load_book(entry, manifest_path.parent, cache, tag)
        if book.book_id in seen:
            raise CorpusError(f"duplicate book_id: {book.book_id}")
        seen.add(book.book_id)
        books.append(book)
    return Corpus(tag=tag, books=tuple(books))


def _read_cache(path: Path, digest: str, book_id: str) -> NormalizedText | None:
    if not path.is_file():
        return None
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError):
        return None
    if data.get("sha256") != digest:
        return None
    tokens = tuple(Token(w, s, e) for w, s, e in data["tokens"])
    return NormalizedText(tokens, book_id, data["raw_char_count"])


def _write_cache(path: Path, digest: str, nt: NormalizedText) -> None:
    payload = {
        "sha256": digest,
        "raw_char_count": nt.raw_char_count,
        "tokens": [[t.word, t.source_start, t.source_end] for t in nt.tokens],
    }
    path.write_text(json.dumps(payload, sort_keys=True, separators=(",", ":")),
                    encoding="utf-8")


# ---------------------------------------------------------------------------
# Quality lint
# ---------------------------------------------------------------------------

_BOILERPLATE_RES = [
    re.compile(r"\*\*\*\s*(START|END) OF .{0,60}(EBOOK|PROJECT)", re.I),
    re.compile(r"PROJECT GUTENBERG", re.I),
    re.compile(r"ALL RIGHTS RESERVED", re.I),
    re.compile(r"\bISBN[\s:]*[0-9-]{9,}", re.I),
    re.compile(r"^\s*COPYRIGHT\b.{0,40}\b(19|20)\d\d", re.I | re.M),
    re.compile(r"TERMS OF USE|LICENSE AGREEMENT", re.I),
]

_REPEAT_LINE_THRESHOLD = 10
_ENTROPY_BLOCK = 1000
_ENTROPY_MIN_BITS = 3.0


def _char_entropy(block: str) -> float:
    counts = Counter(block)
    total = len(block)
    return -sum((c / total) * math.log2(c / total) for c in counts.values())


def lint_book(book: BookRecord) -> list[LintFinding]:
    """Advisory findings about boilerplate left in a book text."""
    findings: list[LintFinding] = []
    text = book.raw_text
    lines = text.splitlines()

    for lineno, line in enumerate(lines, start=1):
        for rx in _BOILERPLATE_RES:
            if rx.search(line):
                findings.append(LintFinding(
                    "boilerplate",
                    f"line matches archive/license marker: {line.strip()[:80]!r}",
                    lineno))
                break

    counts = Counter(ln.strip() for ln in lines if len(ln.strip()) >= 8)
    for line, n in counts.items():
        if n >= _REPEAT_LINE_THRESHOLD:
            findings.append(LintFinding(
                "repeated-line",
                f"line repeated {n} times (running header?): {line[:80]!r}", n))

    for off in range(0, max(len(text) - _ENTROPY_BLOCK + 1, 0), _ENTROPY_BLOCK):
        block = text[off:off + _ENTROPY_BLOCK]
        if _char_entropy(block) < _ENTROPY_MIN_BITS:
            findings.append(LintFinding(
                "low-entropy",
                f"block at offset {off} has unusually low character entropy",
                off))
    return findings


# ---------------------------------------------------------------------------
# Exclusions
# ---------------------------------------------------------------------------

def apply_exclusions(matches: MatchSet, book: BookRecord) -> MatchSet:
    """Flag spans lying entirely inside an exclusion occurrence as downgraded.

    Downgraded spans keep their geometry; metrics skip them and labeling
    suggests them as insignificant regardless of length.
    """
    if not book.exclusion_ranges or not matches.spans:
        return matches
    flags = []
    for span in matches.spans:
        inside = any(rs <= span.book_start and span.book_end <= re_
                     for rs, re_ in book.exclusion_ranges)
        flags.append(inside or span.downgraded)
    return with_downgrades(matches, flags)


def iter_books(corpora: Iterable[Corpus]) -> Iterable[BookRecord]:
    for corpus in corpora:
        yield from corpus.books
