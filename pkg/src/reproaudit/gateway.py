"""Model access: HTTP chat endpoints, replay fixtures, synthetic memorizer.

Every generated output is cached as one JSON line per record in a per-model
file. The cache is append-only and a completed (instance, run) cell is never
re-queried or overwritten, which is also what makes interrupted studies
resumable: rerunning skips every cached cell.
"""

from __future__ import annotations

import json
import logging
import os
import threading
import time
from dataclasses import asdict, dataclass, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import BookRecord, Corpus
from .promptkit import PromptInstance
from .synthetic import SyntheticProfile, SyntheticTruth, synthesize

logger = logging.getLogger(__name__)

ENDPOINT_KINDS = ("chat_http", "replay", "synthetic")

_MAX_RETRIES = 4
_RETRY_BASE_DELAY = 1.0


class GatewayError(RuntimeError):
    def __init__(self, message: str, instance_id: str | None = None):
        super().__init__(message if instance_id is None
                         else f"{message} (instance {instance_id})")
        self.instance_id = instance_id


@dataclass(frozen=True)
class ModelConfig:
    model_id: str
    kind: str = "chat_http"
    base_url: str | None = None
    temperature: float = 0.7
    max_output_tokens: int = 1760
    runs_n: int = 30
    rate_limit: float = 2.0  # requests per second
    credentials_env: str | None = None
    replay_path: str | None = None
    profile: SyntheticProfile | None = None

    def __post_init__(self):
        if self.kind not in ENDPOINT_KINDS:
            raise ValueError(f"unknown endpoint kind {self.kind!r}")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.runs_n < 1:
            raise ValueError("runs_n must be >= 1")

    @classmethod
    def from_dict(cls, data: dict) -> "ModelConfig":
        data = dict(data)
        if data.get("profile") is not None:
            prof = dict(data["profile"])
            if "snippet_len_words" in prof:
                prof["snippet_len_words"] = tuple(prof["snippet_len_words"])
            data["profile"] = SyntheticProfile(**prof)
        return cls(**data)


@dataclass(frozen=True)
class GenerationRecord:
    record_id: str
    instance_id: str
    model_id: str
    run_index: int
    output_text: str
    finish_reason: str = "stop"
    created_at: str = ""
    cached: bool = False

    @staticmethod
    def make_id(model_id: str, instance_id: str, run_index: int) -> str:
        return f"{model_id}:{instance_id}:r{run_index}"


class GenerationCache:
    """Append-only JSONL store, one file per model, single writer per cell."""

    def __init__(self, cache_dir: str | Path):
        self.cache_dir = Path(cache_dir)
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._index: dict[str, dict[tuple[str, int], GenerationRecord]] = {}

    def _path(self, model_id: str) -> Path:
        return self.cache_dir / f"{model_id}.jsonl"

    def _load(self, model_id: str) -> dict[tuple[str, int], GenerationRecord]:
        if model_id not in self._index:
            index: dict[tuple[str, int], GenerationRecord] = {}
            path = self._path(model_id)
            if path.is_file():
                for line in path.read_text(encoding="utf-8").splitlines():
                    if not line.strip():
                        continue
                    rec = GenerationRecord(**json.loads(line))
                    index.setdefault((rec.instance_id, rec.run_index), rec)
            self._index[model_id] = index
        return self._index[model_id]

    def get(self, model_id: str, instance_id: str,
            run_index: int) -> GenerationRecord | None:
        with self._lock:
            return self._load(model_id).get((instance_id, run_index))

    def put(self, record: GenerationRecord) -> GenerationRecord:
        """Persist unless the cell is already filled; first write wins."""
        with self._lock:
            index = self._load(record.model_id)
            key = (record.instance_id, record.run_index)
            existing = index.get(key)
            if existing is not None:
                return existing
            with self._path(record.model_id).open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(asdict(record), sort_keys=True) + "\n")
            index[key] = record
            return record

    def records(self, model_id: str) -> list[GenerationRecord]:
        with self._lock:
            return list(self._load(model_id).values())


class TruthLog:
    """Sidecar for synthetic ground truth, mirroring the cache layout."""

    def __init__(self, cache_dir: str | Path):
        self.cache_dir = Path(cache_dir)
        self._lock = threading.Lock()
        self._seen: dict[str, set[tuple[str, int]]] = {}

    def _path(self, model_id: str) -> Path:
        return self.cache_dir / f"{model_id}.truth.jsonl"

    def _load(self, model_id: str) -> set[tuple[str, int]]:
        if model_id not in self._seen:
            seen = set()
            path = self._path(model_id)
            if path.is_file():
                for line in path.read_text(encoding="utf-8").splitlines():
                    if line.strip():
                        d = json.loads(line)
                        seen.add((d["instance_id"], d["run_index"]))
            self._seen[model_id] = seen
        return self._seen[model_id]

    def put(self, model_id: str, truth: SyntheticTruth) -> None:
        with self._lock:
            seen = self._load(model_id)
            key = (truth.instance_id, truth.run_index)
            if key in seen:
                return
            with self._path(model_id).open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(truth.as_dict(), sort_keys=True) + "\n")
            seen.add(key)

    def load_all(self, model_id: str) -> list[dict]:
        path = self._path(model_id)
        if not path.is_file():
            return []
        return [json.loads(line)
                for line in path.read_text(encoding="utf-8").splitlines()
                if line.strip()]


class RateLimiter:
    def __init__(self, per_second: float):
        self.interval = 1.0 / per_second if per_second > 0 else 0.0
        self._lock = threading.Lock()
        self._next = 0.0

    def acquire(self) -> None:
        if not self.interval:
            return
        with self._lock:
            now = time.monotonic()
            wait = self._next - now
            self._next = max(self._next, now) + self.interval
        if wait > 0:
            time.sleep(wait)


# ---------------------------------------------------------------------------
# Adapters
# ---------------------------------------------------------------------------

def _chat_http_call(cfg: ModelConfig, prompt: PromptInstance,
                    limiter: RateLimiter | None) -> tuple[str, str]:
    import httpx

    if not cfg.base_url:
        raise GatewayError(f"{cfg.model_id}: chat_http endpoint needs base_url",
                           prompt.instance_id)
    headers = {"Content-Type": "application/json"}
    if cfg.credentials_env:
        token = os.environ.get(cfg.credentials_env)
        if not token:
            raise GatewayError(
                f"{cfg.model_id}: credentials variable "
                f"{cfg.credentials_env} is not set", prompt.instance_id)
        headers["Authorization"] = f"Bearer {token}"
    payload = {
        "model": cfg.model_id,
        "messages": [{"role": "user", "content": prompt.rendered_text}],
        "temperature": cfg.temperature,
        "max_tokens": cfg.max_output_tokens,
    }
    url = cfg.base_url.rstrip("/") + "/chat/completions"
    last_error: Exception | None = None
    for attempt in range(_MAX_RETRIES):
        if limiter is not None:
            limiter.acquire()
        try:
            resp = httpx.post(url, json=payload, headers=headers, timeout=120.0)
        except httpx.HTTPError as exc:
            last_error = exc
            time.sleep(_RETRY_BASE_DELAY * 2 ** attempt)
            continue
        if resp.status_code in (429,) or resp.status_code >= 500:
            last_error = GatewayError(
                f"{cfg.model_id}: HTTP {resp.status_code}", prompt.instance_id)
            time.sleep(_RETRY_BASE_DELAY * 2 ** attempt)
            continue
        if resp.status_code in (401, 403):
            raise GatewayError(f"{cfg.model_id}: authentication failed "
                               f"(HTTP {resp.status_code})", prompt.instance_id)
        resp.raise_for_status()
        choice = resp.json()["choices"][0]
        return (choice["message"]["content"] or "",
                choice.get("finish_reason") or "stop")
    raise GatewayError(f"{cfg.model_id}: retries exhausted ({last_error})",
                       prompt.instance_id)


class _ReplaySource:
    def __init__(self, path: str | Path):
        self.index: dict[tuple[str, int], str] = {}
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            d = json.loads(line)
            self.index[(d["instance_id"], d["run_index"])] = d["output_text"]

    def get(self, instance_id: str, run_index: int) -> str:
        try:
            return self.index[(instance_id, run_index)]
        except KeyError:
            raise GatewayError("replay fixture has no output for run "
                               f"{run_index}", instance_id) from None


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def query_once(cfg: ModelConfig, prompt: PromptInstance, run_index: int,
               cache: GenerationCache, book: BookRecord | None = None,
               truth_log: TruthLog | None = None,
               limiter: RateLimiter | None = None,
               replay: _ReplaySource | None = None) -> GenerationRecord:
    """One (model, prompt, run) cell: cached if present, else generated."""
    cached = cache.get(cfg.model_id, prompt.instance_id, run_index)
    if cached is not None:
        return replace(cached, cached=True)

    finish = "stop"
    if cfg.kind == "synthetic":
        if cfg.profile is None or book is None:
            raise GatewayError(f"{cfg.model_id}: synthetic endpoint needs a "
                               "profile and the prompt's book",
                               prompt.instance_id)
        text, truth = synthesize(cfg.profile, prompt, book, run_index)
        if truth_log is not None:
            truth_log.put(cfg.model_id, truth)
    elif cfg.kind == "replay":
        if replay is None:
            if not cfg.replay_path:
                raise GatewayError(f"{cfg.model_id}: replay endpoint needs "
                                   "replay_path", prompt.instance_id)
            replay = _ReplaySource(cfg.replay_path)
        text = replay.get(prompt.instance_id, run_index)
    else:
        text, finish = _chat_http_call(cfg, prompt, limiter)

    record = GenerationRecord(
        record_id=GenerationRecord.make_id(cfg.model_id, prompt.instance_id,
                                           run_index),
        instance_id=prompt.instance_id,
        model_id=cfg.model_id,
        run_index=run_index,
        output_text=text,
        finish_reason=finish,
        created_at=_now(),
    )
    return cache.put(record)


def run_study(configs: Sequence[ModelConfig], prompts: Sequence[PromptInstance],
              corpora: Iterable[Corpus], cache_dir: str | Path,
              runs_n: int | None = None,
              progress: bool = False) -> list[GenerationRecord]:
    """Fill every (model, prompt, run) cell; resumable over the cache."""
    cache = GenerationCache(cache_dir)
    truth_log = TruthLog(cache_dir)
    books = {b.book_id: b for c in corpora for b in c.books}
    records: list[GenerationRecord] = []
    for cfg in configs:
        n = runs_n if runs_n is not None else cfg.runs_n
        limiter = RateLimiter(cfg.rate_limit) if cfg.kind == "chat_http" else None
        replay = _ReplaySource(cfg.replay_path) \
            if cfg.kind == "replay" and cfg.replay_path else None
        cells: Iterable[tuple[PromptInstance, int]] = (
            (p, r) for p in prompts for r in range(n))
        if progress:
            from tqdm import tqdm
            cells = tqdm(list(cells), desc=cfg.model_id, unit="cell")
        for prompt, run_index in cells:
            book = books.get(prompt.book_id)
            records.append(query_once(cfg, prompt, run_index, cache,
                                      book=book, truth_log=truth_log,
                                      limiter=limiter, replay=replay))
    return records
