"""Corpus loading, lint findings, and exclusion downgrades."""

from __future__ import annotations

import hashlib
import json

import pytest

from reproaudit.corpus import CorpusError, apply_exclusions, lint_book, load_corpus
from reproaudit.matcher import match_fuzzy
from reproaudit.textnorm import normalize
from tests.conftest import write_corpus

SONG = ("Ten little soldier boys went out to dine. One choked his little "
        "self and then there were nine.")
STORY = ("The village lay quiet under the morning sun. Nobody expected the "
        "travellers to arrive before noon. " + SONG + " Later that day the "
        "bells rang twice and the square filled with people from the farms.")


def test_load_corpus_counts_and_order(tmp_path):
    books = [{"book_id": f"b{i:02d}", "text": f"Book number {i}. The end."}
             for i in range(20)]
    manifest = write_corpus(tmp_path, "public_domain", books)
    corpus = load_corpus(manifest)
    assert corpus.book_count == 20
    assert [b.book_id for b in corpus.books] == [f"b{i:02d}" for i in range(20)]
    assert corpus.tag == "public_domain"


def test_empty_manifest(tmp_path):
    manifest = write_corpus(tmp_path, "copyrighted", [])
    assert load_corpus(manifest).book_count == 0


def test_missing_text_file_names_book(tmp_path):
    manifest = write_corpus(tmp_path, "public_domain",
                            [{"book_id": "ghost", "text": "irrelevant"}])
    (tmp_path / "texts" / "ghost.txt").unlink()
    with pytest.raises(CorpusError, match="ghost"):
        load_corpus(manifest)


def test_duplicate_book_id(tmp_path):
    books = [{"book_id": "dup", "text": "One."},
             {"book_id": "dup", "text": "Two."}]
    manifest = write_corpus(tmp_path, "public_domain", books)
    # second entry overwrites the text file but the ids still collide
    with pytest.raises(CorpusError, match="duplicate"):
        load_corpus(manifest)


def test_checksum_verified_when_provided(tmp_path):
    text = "A short book. Nothing else."
    good = hashlib.sha256(text.encode()).hexdigest()
    manifest = write_corpus(tmp_path, "public_domain",
                            [{"book_id": "ok", "text": text, "sha256": good}])
    assert load_corpus(manifest).book_count == 1
    manifest2 = write_corpus(tmp_path / "bad", "public_domain",
                             [{"book_id": "bad", "text": text,
                               "sha256": "0" * 64}])
    with pytest.raises(CorpusError, match="checksum"):
        load_corpus(manifest2)


def test_exclusion_not_found_errors(tmp_path):
    manifest = write_corpus(tmp_path, "copyrighted", [{
        "book_id": "novel", "text": "Plain text without the song.",
        "exclusions": [{"label": "song", "text": "entirely absent passage"}],
    }])
    with pytest.raises(CorpusError, match="novel.*song"):
        load_corpus(manifest)


def test_exclusions_resolved_to_token_ranges(tmp_path):
    manifest = write_corpus(tmp_path, "copyrighted", [{
        "book_id": "novel", "text": STORY,
        "exclusions": [{"label": "song", "text": SONG}],
    }])
    book = load_corpus(manifest).books[0]
    assert len(book.exclusion_ranges) == 1
    rs, re_ = book.exclusion_ranges[0]
    assert book.normalized.words[rs:re_] == normalize(SONG).words


def test_cache_roundtrip_is_deterministic(tmp_path):
    books = [{"book_id": "steady", "text": "Stable text. For caching."}]
    manifest = write_corpus(tmp_path, "public_domain", books)
    cache = tmp_path / "cache"
    load_corpus(manifest, cache)
    first = (cache / "steady.json").read_bytes()
    load_corpus(manifest, cache)
    assert (cache / "steady.json").read_bytes() == first
    # cache survives and is actually used (same normalized result)
    c2 = load_corpus(manifest, cache)
    assert c2.books[0].normalized.words == normalize(books[0]["text"]).words


def test_lint_flags_archive_header(tmp_path):
    text = ("*** START OF THIS PROJECT EBOOK ***\n"
            "The actual story begins here and goes on for a while.\n")
    manifest = write_corpus(tmp_path, "public_domain",
                            [{"book_id": "hdr", "text": text}])
    findings = lint_book(load_corpus(manifest).books[0])
    assert any(f.kind == "boilerplate" for f in findings)


def test_lint_clean_text_has_no_findings(tmp_path):
    text = ("It was a bright cold day in the valley and the clocks were "
            "striking thirteen times over the quiet rooftops of the town.")
    manifest = write_corpus(tmp_path, "public_domain",
                            [{"book_id": "clean", "text": text}])
    assert lint_book(load_corpus(manifest).books[0]) == []


def test_lint_flags_repeated_header_line(tmp_path):
    body = "\n".join(["CHAPTER HEADER PAGE 12"] * 40
                     + ["Actual prose content of the page."])
    manifest = write_corpus(tmp_path, "public_domain",
                            [{"book_id": "rep", "text": body}])
    findings = lint_book(load_corpus(manifest).books[0])
    assert any(f.kind == "repeated-line" for f in findings)


def test_apply_exclusions_downgrades_contained_span(tmp_path):
    manifest = write_corpus(tmp_path, "copyrighted", [{
        "book_id": "novel", "text": STORY,
        "exclusions": [{"label": "song", "text": SONG}],
    }])
    book = load_corpus(manifest).books[0]
    out = normalize(SONG, raw_ref="model-output")
    ms = match_fuzzy(out, book.normalized, 30)
    assert len(ms.spans) == 1
    flagged = apply_exclusions(ms, book)
    assert flagged.spans[0].downgraded
    # geometry untouched
    assert flagged.spans[0].book_range == ms.spans[0].book_range


def test_apply_exclusions_keeps_boundary_overlap(tmp_path):
    manifest = write_corpus(tmp_path, "copyrighted", [{
        "book_id": "novel", "text": STORY,
        "exclusions": [{"label": "song", "text": SONG}],
    }])
    book = load_corpus(manifest).books[0]
    words = normalize(STORY).words
    rs, re_ = book.exclusion_ranges[0]
    # output reproduces the song plus one word beyond the exclusion
    overlap = " ".join(words[rs:re_ + 1])
    ms = match_fuzzy(normalize(overlap, raw_ref="o"), book.normalized, 30)
    flagged = apply_exclusions(ms, book)
    assert [s.downgraded for s in flagged.spans] == [False]


def test_apply_exclusions_noop_without_exclusions(tmp_path):
    manifest = write_corpus(tmp_path, "public_domain",
                            [{"book_id": "plain", "text": STORY}])
    book = load_corpus(manifest).books[0]
    ms = match_fuzzy(normalize(SONG, raw_ref="o"), book.normalized, 30)
    assert apply_exclusions(ms, book) is ms


def test_shipped_manifests_parse(tmp_path):
    from importlib import resources
    for name in ("copyrighted", "public_domain"):
        raw = resources.files("reproaudit.data.manifests").joinpath(
            f"{name}.json").read_text(encoding="utf-8")
        data = json.loads(raw)
        assert data["corpus_tag"] == name
        assert len(data["books"]) == 20
        ids = [b["book_id"] for b in data["books"]]
        assert len(set(ids)) == 20
