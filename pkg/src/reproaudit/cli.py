"""Command-line pipeline: lint, prompts, run, match, metrics, report,
label-serve, and a self-verifying synthetic simulation.

Stages communicate through flat files in the study output directory and are
individually re-runnable; a stage whose inputs are missing exits with a
stage-scoped message and status 2. Usage problems exit 1.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

from . import __version__, matcher
from .corpus import Corpus, CorpusError, apply_exclusions, lint_book, load_corpus
from .gateway import GatewayError, run_study
from .matcher import match_exact, match_fuzzy, matchset_records
from .metrics import (
    CSV_COLUMNS,
    MetricsError,
    MetricsReport,
    PromptOutcomes,
    compute_report,
    format_ratio,
    render_markdown,
    report_csv_row,
)
from .promptkit import PromptError, echo_filter, instantiate, load_templates
from .simulate import SimulationSpec, build_simulation, expected_srr
from .studyfiles import (
    ConfigError,
    StudyConfig,
    StudyPaths,
    instance_from_record,
    instance_to_record,
    provenance_comment,
    read_json,
    read_jsonl,
    write_json,
    write_jsonl,
)
from .textnorm import PROFILE_STANDARD, normalize

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_STAGE = 2


class StageError(RuntimeError):
    pass


def _load_config(args) -> StudyConfig:
    if not args.config:
        raise StageError("--config is required for this command")
    cfg = StudyConfig.load(args.config)
    if args.tau is not None:
        cfg.tau = args.tau
    if args.runs is not None:
        cfg.runs_n = args.runs
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.output_dir = Path(args.out)
    return cfg


def _model_ids(cfg: StudyConfig, args) -> list[str]:
    wanted = [m.strip() for m in args.models.split(",")] if args.models else None
    ids = [m.model_id for m in cfg.models]
    if wanted is None:
        return ids
    missing = set(wanted) - set(ids)
    if missing:
        raise StageError(f"models not in config: {sorted(missing)}")
    return [m for m in ids if m in set(wanted)]


def _load_corpora(cfg: StudyConfig) -> dict[str, Corpus]:
    cache = cfg.output_dir / "corpus-index"
    return {
        "copyrighted": load_corpus(cfg.copyrighted_manifest, cache),
        "public_domain": load_corpus(cfg.public_domain_manifest, cache),
    }


def _paths(cfg: StudyConfig) -> StudyPaths:
    return StudyPaths(cfg.output_dir, cfg.cache_dir)


def _require(path: Path, producer: str) -> Path:
    if not path.exists():
        raise StageError(f"missing {path}; run `reproaudit {producer}` first")
    return path


# ---------------------------------------------------------------------------
# Stages
# ---------------------------------------------------------------------------

def stage_corpus_lint(args) -> int:
    cfg = _load_config(args)
    corpora = _load_corpora(cfg)
    total = 0
    for corpus in corpora.values():
        for book in corpus.books:
            findings = lint_book(book)
            total += len(findings)
            for f in findings:
                print(f"{book.book_id}: [{f.kind}] {f.message}")
    print(f"corpus-lint: {total} finding(s) across "
          f"{sum(c.book_count for c in corpora.values())} book(s)")
    return EXIT_OK


def stage_prompts(args) -> int:
    cfg = _load_config(args)
    corpora = _load_corpora(cfg)
    templates = load_templates(cfg.template_file)
    instances = instantiate(templates, corpora.values())
    paths = _paths(cfg)
    write_jsonl(paths.prompts, (instance_to_record(i) for i in instances),
                cfg.provenance())
    print(f"prompts: wrote {len(instances)} instances to {paths.prompts}")
    return EXIT_OK


def stage_run(args) -> int:
    cfg = _load_config(args)
    paths = _paths(cfg)
    _, prompt_recs = read_jsonl(_require(paths.prompts, "prompts"))
    prompts = [instance_from_record(r) for r in prompt_recs]
    corpora = _load_corpora(cfg)
    model_ids = set(_model_ids(cfg, args))
    configs = [m for m in cfg.models if m.model_id in model_ids]
    records = run_study(configs, prompts, corpora.values(), cfg.cache_dir,
                        runs_n=cfg.runs_n, progress=args.progress)
    fresh = sum(1 for r in records if not r.cached)
    print(f"run: {len(records)} cells ({fresh} newly generated) "
          f"cached under {cfg.cache_dir}")
    return EXIT_OK


# Matching work is CPU-bound, so the match stage can fan out over a process
# pool; workers rebuild read-only context from the same files the parent
# read, which keeps the task payload down to one generation record.
_MATCH_CTX: dict = {}


def _match_worker_init(copyrighted_manifest, public_domain_manifest,
                       corpus_cache, prompts_path, tau) -> None:
    corpora = [load_corpus(copyrighted_manifest, corpus_cache),
               load_corpus(public_domain_manifest, corpus_cache)]
    _, prompt_recs = read_jsonl(prompts_path)
    _MATCH_CTX["instances"] = {r["instance_id"]: instance_from_record(r)
                               for r in prompt_recs}
    _MATCH_CTX["books"] = {b.book_id: b for c in corpora for b in c.books}
    _MATCH_CTX["tau"] = tau


def _match_record(record: dict) -> tuple[list[dict], list[dict]]:
    """Fuzzy and exact span records for one cached generation."""
    instance = _MATCH_CTX["instances"].get(record["instance_id"])
    if instance is None:
        raise StageError(
            f"cache references unknown instance {record['instance_id']}")
    book = _MATCH_CTX["books"][instance.book_id]
    profile = instance.obfuscation_profile or PROFILE_STANDARD
    out_nt = normalize(record["output_text"], profile,
                       raw_ref=record["record_id"])
    results = []
    for fn in (match_fuzzy, match_exact):
        ms = fn(out_nt, book.normalized, _MATCH_CTX["tau"])
        ms = echo_filter(ms, instance)
        ms = apply_exclusions(ms, book)
        results.append(matchset_records(ms))
    return results[0], results[1]


def _match_results(cfg: StudyConfig, paths: StudyPaths, gen_recs: list[dict],
                   workers: int):
    init_args = (cfg.copyrighted_manifest, cfg.public_domain_manifest,
                 cfg.output_dir / "corpus-index", paths.prompts, cfg.tau)
    if workers <= 1:
        _match_worker_init(*init_args)
        return map(_match_record, gen_recs)

    def pooled():
        from concurrent.futures import ProcessPoolExecutor
        chunk = max(1, len(gen_recs) // (workers * 8))
        with ProcessPoolExecutor(max_workers=workers,
                                 initializer=_match_worker_init,
                                 initargs=init_args) as pool:
            yield from pool.map(_match_record, gen_recs, chunksize=chunk)

    return pooled()


def stage_match(args) -> int:
    cfg = _load_config(args)
    paths = _paths(cfg)
    _require(paths.prompts, "prompts")
    _load_corpora(cfg)  # validate manifests and warm the corpus index
    workers = getattr(args, "workers", 1) or 1

    for model_id in _model_ids(cfg, args):
        cache_file = _require(paths.generation_cache(model_id), "run")
        _, gen_recs = read_jsonl(cache_file)
        gen_recs.sort(key=lambda r: (r["instance_id"], r["run_index"]))
        fuzzy_records, exact_records = [], []
        totals = {"fuzzy": [0, 0], "exact": [0, 0]}  # [span count, chars]
        results = _match_results(cfg, paths, gen_recs, workers)
        if args.progress:
            from tqdm import tqdm
            results = tqdm(results, total=len(gen_recs),
                           desc=f"match {model_id}", unit="output")
        for fuzzy, exact in results:
            for recs, sink, name in ((fuzzy, fuzzy_records, "fuzzy"),
                                     (exact, exact_records, "exact")):
                sink.extend(recs)
                totals[name][0] += len(recs)
                totals[name][1] += sum(r["char_len"] for r in recs
                                       if not r["downgraded"])
        meta = {**cfg.provenance(), "tau": cfg.tau, "model_id": model_id,
                "backend": matcher.BACKEND}
        write_jsonl(paths.matches(model_id), fuzzy_records, meta)
        write_jsonl(paths.matches_exact(model_id), exact_records, meta)
        ratio = (totals["fuzzy"][0] / totals["exact"][0]
                 if totals["exact"][0] else None)
        write_json(paths.match_comparison(model_id), {
            "model_id": model_id,
            "fuzzy_spans": totals["fuzzy"][0],
            "exact_spans": totals["exact"][0],
            "fuzzy_chars": totals["fuzzy"][1],
            "exact_chars": totals["exact"][1],
            "fuzzy_to_exact_span_ratio": ratio,
        }, cfg.provenance())
        print(f"match {model_id}: {totals['fuzzy'][0]} fuzzy / "
              f"{totals['exact'][0]} exact spans "
              f"(ratio {format_ratio(ratio)})")
    return EXIT_OK


def _collect_outcomes(paths: StudyPaths, model_id: str,
                      instances: dict) -> list[PromptOutcomes]:
    _, gen_recs = read_jsonl(_require(paths.generation_cache(model_id), "run"))
    _, span_recs = read_jsonl(_require(paths.matches(model_id), "match"))
    chars_by_record: dict[str, int] = {}
    for s in span_recs:
        if not s["downgraded"]:
            chars_by_record[s["output_ref"]] = \
                chars_by_record.get(s["output_ref"], 0) + s["char_len"]
    per_prompt: dict[str, dict[int, float]] = {}
    for rec in gen_recs:
        per_prompt.setdefault(rec["instance_id"], {})[rec["run_index"]] = \
            chars_by_record.get(rec["record_id"], 0)
    outcomes = []
    for iid, inst in instances.items():
        runs = per_prompt.get(iid)
        if not runs:
            raise StageError(f"no generations cached for instance {iid}; "
                             "study incomplete")
        values = tuple(runs[r] for r in sorted(runs))
        outcomes.append(PromptOutcomes(
            instance_id=iid, corpus_tag=inst.corpus_tag,
            category=inst.category, values=values))
    return outcomes


def stage_metrics(args) -> int:
    cfg = _load_config(args)
    paths = _paths(cfg)
    _, prompt_recs = read_jsonl(_require(paths.prompts, "prompts"))
    instances = {r["instance_id"]: instance_from_record(r) for r in prompt_recs}
    corpora = _load_corpora(cfg)
    book_counts = {tag: c.book_count for tag, c in corpora.items()}
    for model_id in _model_ids(cfg, args):
        outcomes = _collect_outcomes(paths, model_id, instances)
        report = compute_report(model_id, outcomes, book_counts, cfg.tau,
                                resamples=cfg.bootstrap_resamples,
                                seed=cfg.seed)
        write_json(paths.metrics(model_id), report.as_dict(), cfg.provenance())
        print(f"metrics {model_id}: srr_cr={report.srr_cr:.1f} "
              f"srr_pd={report.srr_pd:.1f} cdr={format_ratio(report.cdr)}")
    return EXIT_OK


def _report_from_dict(d: dict) -> MetricsReport:
    return MetricsReport(
        model_id=d["model_id"], tau=d["tau"], runs_used=d["runs_used"],
        srr_cr=d["srr_cr"], srr_pd=d["srr_pd"], cdr=d["cdr"],
        ci_srr_cr=tuple(d["ci_srr_cr"]), ci_srr_pd=tuple(d["ci_srr_pd"]),
        ci_cdr=tuple(d["ci_cdr"]) if d["ci_cdr"] else None,
        per_prompt_type=d.get("per_prompt_type", {}),
    )


def stage_report(args) -> int:
    cfg = _load_config(args)
    paths = _paths(cfg)
    reports = []
    for model_id in _model_ids(cfg, args):
        data = read_json(_require(paths.metrics(model_id), "metrics"))
        reports.append(_report_from_dict(data))

    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(CSV_COLUMNS)
    for r in reports:
        writer.writerow(report_csv_row(r))
    paths.report_csv.parent.mkdir(parents=True, exist_ok=True)
    paths.report_csv.write_text(
        buf.getvalue() + provenance_comment(cfg.provenance(), "csv"),
        encoding="utf-8")
    paths.report_md.write_text(
        render_markdown(reports) + provenance_comment(cfg.provenance(), "md"),
        encoding="utf-8")
    print(f"report: wrote {paths.report_csv} and {paths.report_md}")
    return EXIT_OK


def stage_label_serve(args) -> int:
    cfg = _load_config(args)
    paths = _paths(cfg)
    _require(paths.prompts, "prompts")
    from .webapi import serve
    serve(cfg.output_dir, cfg.cache_dir, host=args.host, port=args.port,
          ui_dir=args.ui_dir)
    return EXIT_OK


def stage_simulate(args) -> int:
    sim_dir = Path(args.out or "simulation")
    spec = SimulationSpec(
        books_per_corpus=args.books,
        runs_n=args.runs if args.runs is not None else 2,
        seed=args.seed if args.seed is not None else 7,
        mutation_rate=args.mutation_rate,
        tau=args.tau if args.tau is not None else 160,
    )
    config_path = build_simulation(sim_dir, spec)
    print(f"simulate: study config at {config_path}")

    stage_args = argparse.Namespace(
        config=config_path, models=None, tau=None, runs=None, seed=None,
        out=None, progress=args.progress, workers=1)
    for stage in (stage_prompts, stage_run, stage_match, stage_metrics,
                  stage_report):
        rc = stage(stage_args)
        if rc != EXIT_OK:
            return rc

    # verify measured rates against the planted ground truth
    cfg = StudyConfig.load(config_path)
    paths = _paths(cfg)
    _, prompt_recs = read_jsonl(paths.prompts)
    corpora = _load_corpora(cfg)
    book_counts = {tag: c.book_count for tag, c in corpora.items()}
    summary = {"verified": True, "models": {}}
    for model in cfg.models:
        truth_file = paths.truth(model.model_id)
        truths = [json.loads(line) for line in
                  truth_file.read_text(encoding="utf-8").splitlines() if line]
        expected = expected_srr(truths, prompt_recs, cfg.tau, book_counts)
        measured = read_json(paths.metrics(model.model_id))
        entry = {
            "expected_srr_cr": expected["copyrighted"],
            "expected_srr_pd": expected["public_domain"],
            "measured_srr_cr": measured["srr_cr"],
            "measured_srr_pd": measured["srr_pd"],
            "srr_cr_equal": expected["copyrighted"] == measured["srr_cr"],
            "srr_pd_equal": expected["public_domain"] == measured["srr_pd"],
        }
        summary["models"][model.model_id] = entry
        summary["verified"] &= entry["srr_cr_equal"] and entry["srr_pd_equal"]
        print(f"simulate {model.model_id}: measured srr_cr="
              f"{measured['srr_cr']:.1f} expected={expected['copyrighted']:.1f} "
              f"match={entry['srr_cr_equal']}")
    write_json(cfg.output_dir / "simulation_verification.json", summary,
               cfg.provenance())
    if not summary["verified"]:
        raise StageError("simulation metrics diverge from planted ground truth")
    print("simulate: planted ground truth reproduced exactly")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser, config_required: bool = True):
    p.add_argument("--config", type=Path, required=config_required,
                   help="study config JSON")
    p.add_argument("--models", help="comma-separated model ids (default: all)")
    p.add_argument("--tau", type=int, help="match length threshold override")
    p.add_argument("--runs", type=int, help="evaluation runs override")
    p.add_argument("--seed", type=int, help="seed override")
    p.add_argument("--out", type=Path, help="output directory override")
    p.add_argument("--progress", action="store_true",
                   help="show progress bars")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reproaudit",
        description="Audit language-model outputs for reproductions of "
                    "reference texts.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    for name, fn, help_text in (
        ("corpus-lint", stage_corpus_lint, "check book texts for boilerplate"),
        ("prompts", stage_prompts, "instantiate prompt templates per book"),
        ("run", stage_run, "query models and fill the generation cache"),
        ("match", stage_match, "match outputs against books"),
        ("metrics", stage_metrics, "compute reproduction metrics"),
        ("report", stage_report, "render CSV and Markdown reports"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
        if name == "match":
            p.add_argument("--workers", type=int, default=1,
                           help="matcher worker processes")
        p.set_defaults(fn=fn)

    p = sub.add_parser("label-serve", help="serve the labeling API and UI")
    _add_common(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8722)
    p.add_argument("--ui-dir", type=Path, default=None)
    p.set_defaults(fn=stage_label_serve)

    p = sub.add_parser("simulate",
                       help="run a synthetic end-to-end study with ground truth")
    _add_common(p, config_required=False)
    p.add_argument("--books", type=int, default=3,
                   help="books per synthetic corpus")
    p.add_argument("--mutation-rate", type=float, default=0.0,
                   help="substitutions per planted word")
    p.set_defaults(fn=stage_simulate)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s",
                        stream=sys.stderr)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return args.fn(args)
    except (StageError, ConfigError, CorpusError, PromptError, MetricsError,
            GatewayError) as exc:
        print(f"error [{args.command}]: {exc}", file=sys.stderr)
        return EXIT_STAGE


if __name__ == "__main__":
    sys.exit(main())
