"""Template loading, sentence extraction, instantiation, echo filtering."""

from __future__ import annotations

import pytest

from reproaudit.corpus import load_corpus
from reproaudit.matcher import match_fuzzy
from reproaudit.promptkit import (
    echo_filter,
    extract_fields,
    instantiate,
    load_templates,
)
from reproaudit.textnorm import normalize
from tests.conftest import ALICE_OPENING, write_corpus


@pytest.fixture(scope="module")
def templates():
    return load_templates()


def test_exactly_29_templates(templates):
    assert len(templates) == 29
    by_cat = {}
    for t in templates:
        by_cat.setdefault(t.category, []).append(t.template_id)
    assert len(by_cat["reproduction_direct"]) == 13
    assert len(by_cat["reproduction_text_based"]) == 5
    assert len(by_cat["reproduction_specific"]) == 3
    assert len(by_cat["adversarial_obfuscation"]) == 5
    assert len(by_cat["adversarial_convincing"]) == 3


def test_template_flags(templates):
    by_id = {t.template_id: t for t in templates}
    assert all(by_id[i].skip_in_labeling for i in ("R14", "R15", "R16"))
    assert by_id["R21"].requires_character
    assert all(by_id[i].echo_sensitive
               for i in ("R14", "R15", "R16", "R17", "R18"))
    assert all(by_id[i].obfuscation_profile == "deobfuscate"
               for i in ("A1", "A4", "A5"))
    assert by_id["A2"].obfuscation_profile is None


def alice_book(tmp_path):
    manifest = write_corpus(tmp_path, "public_domain", [{
        "book_id": "alice", "title": "Alice's Adventures in Wonderland",
        "author": "Lewis Carroll", "text": ALICE_OPENING,
        "characters": ["Alice"],
    }])
    return load_corpus(manifest)


def test_extract_first_sentence_through_terminator(tmp_path):
    book = alice_book(tmp_path).books[0]
    fields = extract_fields(book)
    assert fields.first_sentence == (
        "Alice was beginning to get very tired of sitting by her sister on "
        "the bank, and of having nothing to do: once or twice she had "
        "peeped into the book her sister was reading.")
    assert fields.last_sentence == "This time she found a little bottle on it."
    # ranges cover the same words after normalization
    fr = fields.first_range
    assert book.normalized.words[fr[0]:fr[1]] \
        == normalize(fields.first_sentence).words


def test_single_sentence_book(tmp_path):
    manifest = write_corpus(tmp_path, "public_domain", [{
        "book_id": "one", "text": "Only one sentence lives here."}])
    fields = extract_fields(load_corpus(manifest).books[0])
    assert fields.first_sentence == fields.last_sentence
    assert fields.warnings == ()


def test_no_terminator_falls_back_to_first_line(tmp_path):
    manifest = write_corpus(tmp_path, "public_domain", [{
        "book_id": "frag", "text": "just a fragment of words\nmore words"}])
    fields = extract_fields(load_corpus(manifest).books[0])
    assert fields.first_sentence == "just a fragment of words"
    assert fields.warnings


def test_abbreviations_do_not_terminate(tmp_path):
    manifest = write_corpus(tmp_path, "public_domain", [{
        "book_id": "abbr",
        "text": "Mr. Holmes looked at Dr. Watson carefully. Then he spoke."}])
    fields = extract_fields(load_corpus(manifest).books[0])
    assert fields.first_sentence == "Mr. Holmes looked at Dr. Watson carefully."


def test_instantiate_counts(templates, tmp_path):
    corpus = alice_book(tmp_path)
    instances = instantiate(templates, corpus)
    assert len(instances) == 29  # has a character, nothing skipped
    manifest = write_corpus(tmp_path / "noc", "public_domain", [{
        "book_id": "nochar", "text": "A tale. It ends.", "characters": []}])
    instances = instantiate(templates, load_corpus(manifest))
    assert len(instances) == 28  # character template skipped


def test_instantiate_empty_corpus(templates, tmp_path):
    manifest = write_corpus(tmp_path, "public_domain", [])
    assert instantiate(templates, load_corpus(manifest)) == []


def test_instantiate_renders_slots_and_orders(templates, tmp_path):
    corpus = alice_book(tmp_path)
    instances = instantiate(templates, corpus)
    assert [i.template_id for i in instances] \
        == [t.template_id for t in templates]
    by_id = {i.template_id: i for i in instances}
    assert "Alice's Adventures in Wonderland" in by_id["R01"].rendered_text
    assert "Lewis Carroll" in by_id["R17"].rendered_text
    assert by_id["R21"].rendered_text.count("Alice") >= 1
    assert all("{" not in i.rendered_text for i in instances)
    # echo spans only on the text-based category
    assert by_id["R17"].echo_spans and by_id["R16"].echo_spans
    assert not by_id["R01"].echo_spans and not by_id["R21"].echo_spans
    assert by_id["A1"].obfuscation_profile == "deobfuscate"


def test_echo_filter_drops_pure_prompt_repetition(templates, tmp_path):
    corpus = alice_book(tmp_path)
    book = corpus.books[0]
    instances = {i.template_id: i for i in instantiate(templates, corpus)}
    inst = instances["R17"]
    fields = extract_fields(book)
    echoed = normalize(fields.first_sentence, raw_ref="echo")
    ms = match_fuzzy(echoed, book.normalized, 30)
    assert ms.spans  # the echo really does match the book
    assert echo_filter(ms, inst).spans == ()


def test_echo_filter_keeps_continuations(templates, tmp_path):
    corpus = alice_book(tmp_path)
    book = corpus.books[0]
    inst = {i.template_id: i for i in instantiate(templates, corpus)}["R17"]
    fields = extract_fields(book)
    continuation = fields.first_sentence + " But it had no pictures in it."
    ms = match_fuzzy(normalize(continuation, raw_ref="c"), book.normalized, 30)
    kept = echo_filter(ms, inst)
    assert kept.spans
    assert all(s.book_end > inst.echo_spans[0][1] for s in kept.spans)


def test_echo_filter_noop_for_non_echo_instance(templates, tmp_path):
    corpus = alice_book(tmp_path)
    book = corpus.books[0]
    inst = {i.template_id: i for i in instantiate(templates, corpus)}["R01"]
    ms = match_fuzzy(normalize(ALICE_OPENING, raw_ref="o"), book.normalized, 30)
    assert echo_filter(ms, inst) is ms


def test_echo_filter_idempotent(templates, tmp_path):
    corpus = alice_book(tmp_path)
    book = corpus.books[0]
    inst = {i.template_id: i for i in instantiate(templates, corpus)}["R14"]
    fields = extract_fields(book)
    text = fields.first_sentence + " She sat on."
    ms = match_fuzzy(normalize(text, raw_ref="o"), book.normalized, 10)
    once = echo_filter(ms, inst)
    twice = echo_filter(once, inst)
    assert once.spans == twice.spans
    assert once.total_char_len() <= ms.total_char_len()
