"""Study configuration and flat-file stage artifacts.

Every pipeline stage reads its inputs from, and writes its outputs to, plain
files under the study output directory, so runs are diffable and resumable.
Each emitted file embeds the study's config hash and seed: JSONL files start
with a ``_meta`` line, JSON files carry a ``_provenance`` key, and CSV or
Markdown reports end with a provenance comment line.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Iterator

from .gateway import ModelConfig


class ConfigError(ValueError):
    pass


@dataclass
class StudyConfig:
    copyrighted_manifest: Path
    public_domain_manifest: Path
    models: list[ModelConfig]
    template_file: Path | None = None
    tau: int = 160
    runs_n: int = 30
    bootstrap_resamples: int = 10_000
    seed: int = 0
    cache_dir: Path = Path("cache")
    output_dir: Path = Path("out")
    config_hash: str = field(default="", compare=False)

    def __post_init__(self):
        if self.tau <= 0:
            raise ConfigError("tau must be > 0")
        if self.runs_n < 1:
            raise ConfigError("runs_n must be >= 1")

    @classmethod
    def load(cls, path: str | Path) -> "StudyConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        base = path.parent

        def resolve(p: str | None) -> Path | None:
            return None if p is None else (base / p)

        try:
            cfg = cls(
                copyrighted_manifest=resolve(data["copyrighted_manifest"]),
                public_domain_manifest=resolve(data["public_domain_manifest"]),
                models=[ModelConfig.from_dict(m) for m in data["models"]],
                template_file=resolve(data.get("template_file")),
                tau=data.get("tau", 160),
                runs_n=data.get("runs_n", 30),
                bootstrap_resamples=data.get("bootstrap_resamples", 10_000),
                seed=data.get("seed", 0),
                cache_dir=resolve(data.get("cache_dir", "cache")),
                output_dir=resolve(data.get("output_dir", "out")),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid config {path}: {exc}") from exc
        cfg.config_hash = hashlib.sha256(
            json.dumps(data, sort_keys=True).encode("utf-8")).hexdigest()[:16]
        return cfg

    def provenance(self) -> dict:
        return {"config_hash": self.config_hash, "seed": self.seed}


@dataclass
class StudyPaths:
    """Canonical file layout of one study output directory."""

    output_dir: Path
    cache_dir: Path

    def __init__(self, output_dir: str | Path, cache_dir: str | Path | None = None):
        self.output_dir = Path(output_dir)
        self.cache_dir = Path(cache_dir) if cache_dir else self.output_dir / "cache"

    @property
    def prompts(self) -> Path:
        return self.output_dir / "prompts.jsonl"

    def generation_cache(self, model_id: str) -> Path:
        return self.cache_dir / f"{model_id}.jsonl"

    def truth(self, model_id: str) -> Path:
        return self.cache_dir / f"{model_id}.truth.jsonl"

    def matches(self, model_id: str) -> Path:
        return self.output_dir / "matches" / f"{model_id}.jsonl"

    def matches_exact(self, model_id: str) -> Path:
        return self.output_dir / "matches" / f"{model_id}.exact.jsonl"

    def match_comparison(self, model_id: str) -> Path:
        return self.output_dir / "matches" / f"{model_id}.comparison.json"

    def metrics(self, model_id: str) -> Path:
        return self.output_dir / "metrics" / f"{model_id}.json"

    @property
    def report_csv(self) -> Path:
        return self.output_dir / "report.csv"

    @property
    def report_md(self) -> Path:
        return self.output_dir / "report.md"

    @property
    def labels(self) -> Path:
        return self.output_dir / "labels.jsonl"


# ---------------------------------------------------------------------------
# JSONL with a provenance meta line
# ---------------------------------------------------------------------------

def write_jsonl(path: Path, records: Iterable[dict], provenance: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        fh.write(json.dumps({"_meta": provenance}, sort_keys=True) + "\n")
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def read_jsonl(path: Path) -> tuple[dict, list[dict]]:
    """Returns (meta, records); meta is empty for headerless files."""
    meta: dict = {}
    records: list[dict] = []
    with path.open(encoding="utf-8") as fh:
        for i, line in enumerate(fh):
            if not line.strip():
                continue
            obj = json.loads(line)
            if i == 0 and isinstance(obj, dict) and "_meta" in obj:
                meta = obj["_meta"]
                continue
            records.append(obj)
    return meta, records


def iter_jsonl(path: Path) -> Iterator[dict]:
    _, records = read_jsonl(path)
    yield from records


def write_json(path: Path, payload: dict, provenance: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = dict(payload)
    payload["_provenance"] = provenance
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n",
                    encoding="utf-8")


def read_json(path: Path) -> dict:
    return json.loads(path.read_text(encoding="utf-8"))


def provenance_comment(provenance: dict, style: str) -> str:
    body = f"provenance config_hash={provenance.get('config_hash', '')} " \
           f"seed={provenance.get('seed', '')}"
    if style == "csv":
        return f"# {body}\n"
    if style == "md":
        return f"<!-- {body} -->\n"
    raise ValueError(style)


# ---------------------------------------------------------------------------
# Serialization helpers for domain records
# ---------------------------------------------------------------------------

def instance_to_record(instance: Any) -> dict:
    return {
        "instance_id": instance.instance_id,
        "template_id": instance.template_id,
        "category": instance.category,
        "book_id": instance.book_id,
        "corpus_tag": instance.corpus_tag,
        "rendered_text": instance.rendered_text,
        "echo_spans": [list(s) for s in instance.echo_spans],
        "skip_in_labeling": instance.skip_in_labeling,
        "obfuscation_profile": instance.obfuscation_profile,
    }


def instance_from_record(rec: dict) -> Any:
    from .promptkit import PromptInstance

    return PromptInstance(
        instance_id=rec["instance_id"],
        template_id=rec["template_id"],
        category=rec["category"],
        book_id=rec["book_id"],
        corpus_tag=rec["corpus_tag"],
        rendered_text=rec["rendered_text"],
        echo_spans=tuple(tuple(s) for s in rec["echo_spans"]),
        skip_in_labeling=rec["skip_in_labeling"],
        obfuscation_profile=rec.get("obfuscation_profile"),
    )
