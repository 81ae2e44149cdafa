"""Shared fixtures: tiny corpora on disk and a prebuilt synthetic study."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from reproaudit.cli import main as cli_main

ALICE_OPENING = (
    "Alice was beginning to get very tired of sitting by her sister on the "
    "bank, and of having nothing to do: once or twice she had peeped into "
    "the book her sister was reading. But it had no pictures in it. What is "
    "the use of a book without pictures? She sat on. The daisy chain would "
    "be worth the trouble of getting up and picking the daisies. There was "
    "nothing so very remarkable in that. The rabbit actually took a watch "
    "out of its waistcoat pocket. It was all very well to say Drink me. "
    "This time she found a little bottle on it."
)


def write_corpus(root: Path, tag: str, books: list[dict]) -> Path:
    """Write a manifest plus text files; returns the manifest path."""
    texts = root / "texts"
    texts.mkdir(parents=True, exist_ok=True)
    entries = []
    for b in books:
        (texts / f"{b['book_id']}.txt").write_text(b["text"], encoding="utf-8")
        entry = {
            "book_id": b["book_id"],
            "title": b.get("title", b["book_id"].title()),
            "author": b.get("author", "Test Author"),
            "text_path": f"texts/{b['book_id']}.txt",
            "characters": b.get("characters", []),
        }
        if "exclusions" in b:
            entry["exclusions"] = b["exclusions"]
        if "sha256" in b:
            entry["sha256"] = b["sha256"]
        entries.append(entry)
    manifest = root / f"{tag}.json"
    manifest.write_text(json.dumps({"corpus_tag": tag, "books": entries},
                                   indent=2), encoding="utf-8")
    return manifest


@pytest.fixture
def corpus_factory(tmp_path):
    def make(tag="public_domain", books=None):
        books = books or [{"book_id": "alice", "text": ALICE_OPENING,
                           "characters": ["Alice"]}]
        return write_corpus(tmp_path / tag, tag, books)
    return make


@pytest.fixture(scope="session")
def simulated_study(tmp_path_factory):
    """A complete small synthetic study run through the real CLI."""
    sim_dir = tmp_path_factory.mktemp("sim")
    rc = cli_main(["simulate", "--out", str(sim_dir), "--books", "2",
                   "--runs", "2", "--seed", "11"])
    assert rc == 0
    return sim_dir
