"""Local HTTP JSON API for the labeling workflow.

Serves review items (prompt, output, highlighted match spans, suggestion)
from a study output directory, accepts label commits, and reports running
label distributions. The single-page UI bundle, when built, is served from
the package's ``webui`` directory (or any directory passed explicitly).

Binds to localhost by design: labels are appended by one server process
while any number of browser tabs read.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import FileResponse, HTMLResponse
from pydantic import BaseModel

from .labelstore import (
    CATEGORIES,
    DEFAULT_QUEUE_SIZE,
    LabelError,
    LabelStore,
    distribution,
    sample_queue,
)
from .studyfiles import StudyPaths, instance_from_record, read_jsonl
from .textnorm import PROFILE_STANDARD, normalize

logger = logging.getLogger(__name__)


class LabelPost(BaseModel):
    record_id: str
    labels: list[str]
    annotator: str
    note: str = ""


_PLACEHOLDER = """<!doctype html>
<html><head><title>reproaudit labeling</title></head>
<body><h1>reproaudit labeling API</h1>
<p>The UI bundle is not built. The JSON API is live under <code>/api/</code>:
queue, labels, distribution.</p></body></html>"""


@dataclass
class ReviewRecord:
    record_id: str
    model_id: str
    corpus_tag: str
    instance_id: str
    run_index: int
    prompt_text: str
    output_text: str
    skip_in_labeling: bool
    highlights: list[tuple[int, int, int]] = field(default_factory=list)
    uncertain: bool = False
    suggestion: str | None = None


class StudyView:
    """Read-only join of prompts, generations, and matches for labeling."""

    def __init__(self, paths: StudyPaths):
        self.paths = paths
        self.records: dict[str, ReviewRecord] = {}
        self.tau = 160
        _, prompt_recs = read_jsonl(paths.prompts)
        instances = {r["instance_id"]: instance_from_record(r)
                     for r in prompt_recs}

        spans_by_record: dict[str, list[dict]] = {}
        matches_dir = paths.output_dir / "matches"
        if matches_dir.is_dir():
            for mf in sorted(matches_dir.glob("*.jsonl")):
                if mf.name.endswith(".exact.jsonl"):
                    continue
                meta, span_recs = read_jsonl(mf)
                self.tau = meta.get("tau", self.tau)
                for rec in span_recs:
                    spans_by_record.setdefault(rec["output_ref"], []).append(rec)

        for cache_file in sorted(paths.cache_dir.glob("*.jsonl")):
            if cache_file.name.endswith(".truth.jsonl"):
                continue
            _, gen_recs = read_jsonl(cache_file)
            for rec in gen_recs:
                inst = instances.get(rec["instance_id"])
                if inst is None:
                    continue
                spans = spans_by_record.get(rec["record_id"], [])
                self.records[rec["record_id"]] = ReviewRecord(
                    record_id=rec["record_id"],
                    model_id=rec["model_id"],
                    corpus_tag=inst.corpus_tag,
                    instance_id=inst.instance_id,
                    run_index=rec["run_index"],
                    prompt_text=inst.rendered_text,
                    output_text=rec["output_text"],
                    skip_in_labeling=inst.skip_in_labeling,
                    highlights=_highlights(rec["output_text"], inst, spans),
                    uncertain=any(s["uncertain"] for s in spans),
                    suggestion=_suggest(spans, self.tau),
                )

    def select(self, model_id: str | None, corpus_tag: str | None
               ) -> list[ReviewRecord]:
        return [r for r in self.records.values()
                if (model_id is None or r.model_id == model_id)
                and (corpus_tag is None or r.corpus_tag == corpus_tag)]


def _suggest(spans: list[dict], tau: int) -> str | None:
    if any(s["char_len"] > tau and not s.get("downgraded") for s in spans):
        return "match_significant"
    if spans:
        return "match_insignificant"
    return None


def _highlights(output_text: str, instance, spans: list[dict]
                ) -> list[tuple[int, int, int]]:
    """Character ranges of matched output tokens, longest-first, overlap-free."""
    if not spans:
        return []
    profile = instance.obfuscation_profile or PROFILE_STANDARD
    nt = normalize(output_text, profile)
    ranges: list[tuple[int, int, int]] = []
    for rec in sorted(spans, key=lambda r: -r["char_len"]):
        try:
            start, end = nt.char_span(rec["out_start"], rec["out_end"])
        except IndexError:
            logger.warning("span outside output token range for %s",
                           rec.get("output_ref"))
            continue
        if any(start < e and s < end for s, e, _ in ranges):
            continue  # keep the longer span where matches overlap
        ranges.append((start, end, rec["char_len"]))
    return sorted(ranges)


def create_app(study_dir: str | Path, cache_dir: str | Path | None = None,
               ui_dir: str | Path | None = None) -> FastAPI:
    paths = StudyPaths(study_dir, cache_dir)
    view = StudyView(paths)
    store = LabelStore(paths.labels, known_records=set(view.records))
    app = FastAPI(title="reproaudit labeling API")
    app.state.view = view
    app.state.store = store

    @app.get("/api/queue")
    def api_queue(model: str | None = None, corpus: str | None = None,
                  k: int = Query(default=DEFAULT_QUEUE_SIZE, ge=0)):
        selection = [r for r in view.select(model, corpus)
                     if not r.skip_in_labeling]
        order = sample_queue([(r.record_id, r.uncertain) for r in selection],
                             store.labeled_ids(), k=k, seed=0)
        items = []
        for rid in order:
            r = view.records[rid]
            items.append({
                "record_id": r.record_id,
                "model_id": r.model_id,
                "corpus_tag": r.corpus_tag,
                "prompt_text": r.prompt_text,
                "output_text": r.output_text,
                "highlights": [list(h) for h in r.highlights],
                "suggestion": r.suggestion,
            })
        return {"items": items, "remaining": len(order)}

    @app.post("/api/labels")
    def api_labels(post: LabelPost):
        try:
            rec = store.commit_label(post.record_id, post.labels,
                                     post.annotator, post.note)
        except LabelError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return rec.as_dict()

    @app.get("/api/distribution")
    def api_distribution(model: str | None = None, corpus: str | None = None):
        ids = [r.record_id for r in view.select(model, corpus)]
        try:
            props = distribution(store, ids)
        except LabelError:
            return {"total": 0, "proportions": {}, "categories": list(CATEGORIES)}
        labeled = store.labeled_ids() & set(ids)
        return {
            "total": len(labeled),
            "proportions": {cat: props.get(cat, 0.0) for cat in CATEGORIES},
            "categories": list(CATEGORIES),
        }

    bundle = Path(ui_dir) if ui_dir else _packaged_ui()

    @app.get("/", response_class=HTMLResponse)
    def index():
        if bundle and (bundle / "index.html").is_file():
            return HTMLResponse((bundle / "index.html").read_text("utf-8"))
        return HTMLResponse(_PLACEHOLDER)

    @app.get("/ui/{asset:path}")
    def ui_asset(asset: str):
        if not bundle:
            raise HTTPException(status_code=404)
        target = (bundle / asset).resolve()
        if not str(target).startswith(str(bundle.resolve())) \
                or not target.is_file():
            raise HTTPException(status_code=404)
        return FileResponse(target)

    return app


def _packaged_ui() -> Path | None:
    try:
        root = resources.files("reproaudit").joinpath("webui")
        path = Path(str(root))
        return path if path.is_dir() else None
    except (ModuleNotFoundError, TypeError):
        return None


def serve(study_dir: str | Path, cache_dir: str | Path | None = None,
          host: str = "127.0.0.1", port: int = 8722,
          ui_dir: str | Path | None = None) -> None:
    import uvicorn

    app = create_app(study_dir, cache_dir, ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")
