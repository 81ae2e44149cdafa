"""Self-contained synthetic study with planted ground truth.

Generates two small corpora of synthetic books (every book is a sequence of
unique pseudowords, so the only matches a matcher can find are the ones the
synthetic memorizer planted), writes a complete study config, runs the whole
pipeline against the synthetic endpoint, and verifies that the measured
reproduction rates equal the planted totals.

Pseudowords are concatenations of consonant-vowel syllables; refusal and
summary fixtures contain no such word, so non-regurgitation outputs can
never match a book.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

from .studyfiles import StudyConfig

_SYLLABLES = [c + v for c in "bdfghklmnprstvwz" for v in "aeiou"]


def _pseudo_word(index: int) -> str:
    """Unique letters-only word for a global counter value."""
    digits = []
    index += len(_SYLLABLES)  # avoid very short words for small indices
    while index:
        index, rem = divmod(index, len(_SYLLABLES))
        digits.append(_SYLLABLES[rem])
    return "".join(digits)


@dataclass
class SimulationSpec:
    books_per_corpus: int = 3
    words_per_book: int = 1400
    runs_n: int = 2
    seed: int = 7
    tau: int = 160
    bootstrap_resamples: int = 10_000
    regurgitate_prob: float = 0.6
    hallucinate_prob: float = 0.2
    refuse_prob: float = 0.1
    mutation_rate: float = 0.0
    model_id: str = "synthetic-memorizer"


def _write_book(path: Path, rng: random.Random, counter: list[int],
                n_words: int) -> None:
    words = []
    for _ in range(n_words):
        words.append(_pseudo_word(counter[0]))
        counter[0] += 1
    sentences = []
    i = 0
    while i < len(words):
        n = rng.randint(8, 14)
        chunk = words[i:i + n]
        i += n
        sentences.append(" ".join(chunk).capitalize() + ".")
    path.write_text(" ".join(sentences) + "\n", encoding="utf-8")


def build_simulation(sim_dir: str | Path, spec: SimulationSpec) -> Path:
    """Write corpora, texts, and config; returns the config path."""
    sim_dir = Path(sim_dir)
    texts_dir = sim_dir / "manifests" / "texts"
    texts_dir.mkdir(parents=True, exist_ok=True)
    rng = random.Random(spec.seed)
    counter = [0]  # global unique-word counter across all books

    manifests = {}
    for tag, short in (("copyrighted", "cr"), ("public_domain", "pd")):
        books = []
        for j in range(spec.books_per_corpus):
            book_id = f"sim-{short}-{j:02d}"
            _write_book(texts_dir / f"{book_id}.txt", rng, counter,
                        spec.words_per_book)
            books.append({
                "book_id": book_id,
                "title": f"Chronicle {short}-{j:02d}",
                "author": f"Author {short}-{j:02d}",
                "text_path": f"texts/{book_id}.txt",
                # one characterless book per corpus exercises the skip rule
                "characters": [] if j == 0 else [f"Figure {short}-{j:02d}"],
            })
        manifest = {"corpus_tag": tag, "books": books}
        mpath = sim_dir / "manifests" / f"{tag}.json"
        mpath.write_text(json.dumps(manifest, indent=2) + "\n",
                         encoding="utf-8")
        manifests[tag] = f"manifests/{tag}.json"

    config = {
        "copyrighted_manifest": manifests["copyrighted"],
        "public_domain_manifest": manifests["public_domain"],
        "tau": spec.tau,
        "runs_n": spec.runs_n,
        "bootstrap_resamples": spec.bootstrap_resamples,
        "seed": spec.seed,
        "cache_dir": "cache",
        "output_dir": "out",
        "models": [{
            "model_id": spec.model_id,
            "kind": "synthetic",
            "runs_n": spec.runs_n,
            "profile": {
                "regurgitate_prob": spec.regurgitate_prob,
                "hallucinate_prob": spec.hallucinate_prob,
                "refuse_prob": spec.refuse_prob,
                "mutation_rate": spec.mutation_rate,
                "seed": spec.seed,
            },
        }],
    }
    config_path = sim_dir / "study.json"
    config_path.write_text(json.dumps(config, indent=2) + "\n",
                           encoding="utf-8")
    return config_path


def expected_srr(truths: list[dict], instances: list[dict], tau: int,
                 book_counts: dict[str, int]) -> dict[str, float]:
    """Reproduction rate implied by the planted ground truth.

    Mirrors the metrics arithmetic: per-prompt mean over runs, summed and
    divided by the corpus book count, so equality with the measured value
    is exact, not approximate.
    """
    per_prompt: dict[str, list[int]] = {}
    for t in truths:
        chars = t["planted_char_len"] if (
            t["behavior"] == "regurgitate"
            and t["planted_char_len"] > tau) else 0
        per_prompt.setdefault(t["instance_id"], []).append(chars)
    # iterate in instance order so float summation order mirrors the
    # metrics computation and equality is exact
    result = {}
    for tag in ("copyrighted", "public_domain"):
        total = sum(
            sum(per_prompt[i["instance_id"]]) / len(per_prompt[i["instance_id"]])
            for i in instances
            if i["corpus_tag"] == tag and i["instance_id"] in per_prompt)
        result[tag] = total / book_counts[tag]
    return result


def load_config(config_path: Path) -> StudyConfig:
    return StudyConfig.load(config_path)
