"""Label taxonomy, append-only store, queue sampling, and the HTTP API."""

from __future__ import annotations

import pytest
from fastapi.testclient import TestClient

from reproaudit.labelstore import (
    CATEGORIES,
    LabelError,
    LabelStore,
    distribution,
    primary_label,
    sample_queue,
    suggest_label,
)
from reproaudit.matcher import match_fuzzy
from reproaudit.textnorm import normalize
from reproaudit.webapi import create_app


def test_category_order_is_the_seven_label_taxonomy():
    assert CATEGORIES == (
        "match_significant", "match_insignificant", "refusal_copyright",
        "refusal_other", "hallucination", "non_literal", "other")


def test_primary_label_precedence():
    assert primary_label(["refusal_copyright", "non_literal"]) \
        == "refusal_copyright"
    assert primary_label(["other", "match_significant"]) == "match_significant"
    assert primary_label(["hallucination"]) == "hallucination"
    with pytest.raises(LabelError):
        primary_label([])
    with pytest.raises(LabelError):
        primary_label(["sarcasm"])


def make_matchset(total_words, tau):
    words = [f"w{i:03d}xy" for i in range(total_words)]
    book = normalize(" ".join(words), raw_ref="b")
    return match_fuzzy(book, book, tau)


def test_suggest_label_thresholds():
    big = make_matchset(40, 160)       # join length 40*6-1 = 239 > 160
    assert suggest_label(big, 160) == "match_significant"
    small = make_matchset(20, 60)      # join length 119: above 60, below 160
    assert suggest_label(small, 160) == "match_insignificant"
    empty = match_fuzzy(normalize("aa"), normalize("zz"), 0)
    assert suggest_label(empty, 160) is None


def test_suggest_label_downgraded_is_insignificant():
    from reproaudit.matcher import with_downgrades
    ms = make_matchset(40, 160)
    downgraded = with_downgrades(ms, [True] * len(ms.spans))
    assert suggest_label(downgraded, 160) == "match_insignificant"


def test_store_append_only_and_latest_wins(tmp_path):
    store = LabelStore(tmp_path / "labels.jsonl")
    store.commit_label("r1", ["hallucination"], annotator="ann-a")
    store.commit_label("r1", ["non_literal"], annotator="ann-b")
    store.commit_label("r2", ["match_significant"], annotator="ann-a")
    assert len(store) == 3
    latest = store.effective_labels()
    assert latest["r1"].primary_label == "non_literal"
    # replaying the log reproduces state exactly
    replayed = LabelStore(tmp_path / "labels.jsonl")
    assert len(replayed) == 3
    assert {k: v.primary_label for k, v in replayed.effective_labels().items()} \
        == {k: v.primary_label for k, v in latest.items()}


def test_commit_validates_known_records(tmp_path):
    store = LabelStore(tmp_path / "labels.jsonl", known_records={"known"})
    store.commit_label("known", ["other"], annotator="a")
    with pytest.raises(LabelError, match="unknown record_id"):
        store.commit_label("stranger", ["other"], annotator="a")


def test_multi_label_primary_derived(tmp_path):
    store = LabelStore(tmp_path / "labels.jsonl")
    rec = store.commit_label("r9", ["non_literal", "refusal_copyright"], "a")
    assert rec.primary_label == "refusal_copyright"
    assert rec.multi_labels == ("refusal_copyright", "non_literal")


def test_distribution_sums_to_one(tmp_path):
    store = LabelStore(tmp_path / "labels.jsonl")
    for i in range(6):
        store.commit_label(f"r{i}", ["hallucination" if i < 3 else "other"], "a")
    props = distribution(store, [f"r{i}" for i in range(6)])
    assert props == {"hallucination": 0.5, "other": 0.5}
    assert abs(sum(props.values()) - 1.0) < 1e-9
    with pytest.raises(LabelError):
        distribution(store, ["unlabeled"])


def test_sample_queue_seeded_and_uncertain_first():
    candidates = [(f"r{i:02d}", i % 5 == 0) for i in range(40)]
    q1 = sample_queue(candidates, labeled=set(), k=10, seed=3)
    q2 = sample_queue(candidates, labeled=set(), k=10, seed=3)
    assert q1 == q2 and len(q1) == 10
    uncertain = {rid for rid, unc in candidates if unc}
    flags = [rid in uncertain for rid in q1]
    assert flags == sorted(flags, reverse=True)  # uncertain block first
    assert sample_queue(candidates, labeled=set(), k=0, seed=3) == []
    # k larger than pool returns the whole pool
    assert len(sample_queue(candidates, labeled=set(), k=999, seed=3)) == 40
    # labeled records leave the pool
    q3 = sample_queue(candidates, labeled={rid for rid, _ in candidates[:35]},
                      k=999, seed=3)
    assert len(q3) == 5


# ---------------------------------------------------------------------------
# HTTP API against a real simulated study
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def client(simulated_study):
    app = create_app(simulated_study / "out", simulated_study / "cache")
    return TestClient(app)


def test_api_queue_serves_items(client):
    resp = client.get("/api/queue", params={"k": 5})
    assert resp.status_code == 200
    items = resp.json()["items"]
    assert 0 < len(items) <= 5
    for item in items:
        assert {"record_id", "prompt_text", "output_text", "highlights",
                "suggestion", "model_id", "corpus_tag"} <= set(item)
        for start, end, char_len in item["highlights"]:
            assert 0 <= start < end <= len(item["output_text"])
            assert char_len > 0


def test_api_queue_excludes_skip_in_labeling(client):
    resp = client.get("/api/queue", params={"k": 10_000})
    ids = [i["record_id"] for i in resp.json()["items"]]
    assert ids
    assert not any(f":R1{n}:" in rid for rid in ids for n in (4, 5, 6))


def test_api_label_commit_and_distribution_roundtrip(client):
    queue = client.get("/api/queue", params={"k": 4}).json()["items"]
    for item in queue:
        labels = [item["suggestion"] or "other"]
        resp = client.post("/api/labels", json={
            "record_id": item["record_id"], "labels": labels,
            "annotator": "tester"})
        assert resp.status_code == 200
    dist = client.get("/api/distribution").json()
    assert dist["total"] >= 4
    assert abs(sum(dist["proportions"].values()) - 1.0) < 1e-9
    # labeled records leave the queue
    remaining = client.get("/api/queue", params={"k": 10_000}).json()["items"]
    labeled = {i["record_id"] for i in queue}
    assert labeled.isdisjoint({i["record_id"] for i in remaining})


def test_api_rejects_bad_labels(client):
    item = client.get("/api/queue", params={"k": 1}).json()["items"][0]
    resp = client.post("/api/labels", json={
        "record_id": item["record_id"], "labels": ["nonsense"],
        "annotator": "tester"})
    assert resp.status_code == 400
    resp = client.post("/api/labels", json={
        "record_id": "does-not-exist", "labels": ["other"],
        "annotator": "tester"})
    assert resp.status_code == 400


def test_api_empty_distribution_is_placeholder(client):
    resp = client.get("/api/distribution", params={"model": "no-such-model"})
    assert resp.status_code == 200
    assert resp.json()["total"] == 0


def test_index_serves_placeholder_without_ui(client):
    resp = client.get("/")
    assert resp.status_code == 200
    assert "text/html" in resp.headers["content-type"]


def test_suggestions_consistent_with_metric_contributions(simulated_study):
    """An output is suggested significant exactly when it added to SRR."""
    from reproaudit.studyfiles import read_jsonl

    meta, span_recs = read_jsonl(
        simulated_study / "out" / "matches" / "synthetic-memorizer.jsonl")
    contributed = {}
    for rec in span_recs:
        if not rec["downgraded"] and rec["char_len"] > meta["tau"]:
            contributed[rec["output_ref"]] = True
    from reproaudit.webapi import StudyView
    from reproaudit.studyfiles import StudyPaths

    view = StudyView(StudyPaths(simulated_study / "out",
                                simulated_study / "cache"))
    assert view.records
    for rid, rec in view.records.items():
        assert (rec.suggestion == "match_significant") \
            == contributed.get(rid, False)
