"""Reproduction metrics: SRR, CDR, bootstrap confidence intervals.

SRR (significant reproduction rate) is the average number of matched
characters per book, summed over all maximal matches above the length
threshold, after echo filtering and exclusion downgrades. CDR (copyright
discrimination ratio) divides the SRR on the copyrighted corpus by the SRR
on the public-domain corpus; low values mean the model treats protected
text differently. Point estimates average over evaluation runs; intervals
come from a percentile bootstrap that resamples one recorded outcome per
prompt and recomputes the metric, 10,000 times by default.

CDR is the ratio of mean SRRs (not the mean of per-run ratios), and its
bootstrap resamples both corpora jointly within each iteration; resamples
with a zero public-domain total are undefined and excluded from the
quantiles.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .corpus import Corpus
from .matcher import MatchSet


class MetricsError(ValueError):
    pass


@dataclass(frozen=True)
class EvaluationRun:
    """All post-filter match sets of one model pass over one corpus."""

    model_id: str
    run_index: int
    corpus_tag: str
    matchsets: Mapping[str, MatchSet]  # instance_id -> MatchSet


@dataclass
class MetricsReport:
    model_id: str
    tau: int
    runs_used: int
    srr_cr: float
    srr_pd: float
    cdr: float | None
    ci_srr_cr: tuple[float, float]
    ci_srr_pd: tuple[float, float]
    ci_cdr: tuple[float, float] | None
    per_prompt_type: dict[str, dict[str, float]] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "model_id": self.model_id,
            "tau": self.tau,
            "runs_used": self.runs_used,
            "srr_cr": self.srr_cr,
            "srr_pd": self.srr_pd,
            "cdr": self.cdr,
            "ci_srr_cr": list(self.ci_srr_cr),
            "ci_srr_pd": list(self.ci_srr_pd),
            "ci_cdr": list(self.ci_cdr) if self.ci_cdr else None,
            "per_prompt_type": self.per_prompt_type,
        }


def srr(run: EvaluationRun, corpus: Corpus, tau: int) -> float:
    """Matched characters per book for one evaluation run."""
    if corpus.book_count == 0:
        raise MetricsError("SRR over an empty corpus is undefined")
    total = 0
    for ms in run.matchsets.values():
        if ms.tau != tau:
            raise MetricsError(
                f"match set computed with tau={ms.tau}, metrics expect {tau}")
        total += ms.total_char_len(include_downgraded=False)
    return total / corpus.book_count


def cdr(srr_cr: float, srr_pd: float) -> float | None:
    """Ratio of the two reproduction rates; None when undefined."""
    if srr_pd == 0:
        return None
    return srr_cr / srr_pd


def format_ratio(value: float | None) -> str:
    return "-" if value is None else f"{value:.3f}"


# ---------------------------------------------------------------------------
# Bootstrap
# ---------------------------------------------------------------------------

def _pick_matrix(per_prompt_values: Sequence[Sequence[float]],
                 resamples: int, rng: np.random.Generator) -> np.ndarray:
    """Column-stacked resampled outcomes: one pick per prompt per resample."""
    totals = np.zeros(resamples)
    for values in per_prompt_values:
        arr = np.asarray(values, dtype=float)
        if arr.size == 0:
            raise MetricsError("every prompt needs at least one run value")
        if arr.size == 1:
            totals += arr[0]
        else:
            totals += arr[rng.integers(0, arr.size, size=resamples)]
    return totals


def bootstrap_ci(per_prompt_values: Sequence[Sequence[float]],
                 resamples: int = 10_000, seed: int = 0,
                 denom: float = 1.0) -> tuple[float, float]:
    """95% percentile interval for Σ(one pick per prompt) / ``denom``.

    Each resample independently picks one of the recorded run outcomes per
    prompt; the .025 and .975 quantiles of the recomputed metric bound the
    interval. Deterministic for a fixed seed. The division mirrors the
    point-estimate arithmetic so degenerate intervals collapse onto the
    point exactly.
    """
    rng = np.random.default_rng(seed)
    totals = _pick_matrix(per_prompt_values, resamples, rng) / denom
    lo, hi = np.quantile(totals, [0.025, 0.975])
    return float(lo), float(hi)


def bootstrap_cdr_ci(cr_values: Sequence[Sequence[float]],
                     pd_values: Sequence[Sequence[float]],
                     cr_denom: float, pd_denom: float,
                     resamples: int = 10_000, seed: int = 0
                     ) -> tuple[float, float] | None:
    """Joint-bootstrap interval for the discrimination ratio.

    Both corpora are resampled inside the same iteration; iterations whose
    public-domain total is zero have no defined ratio and are skipped.
    """
    rng = np.random.default_rng(seed)
    cr_totals = _pick_matrix(cr_values, resamples, rng) / cr_denom
    pd_totals = _pick_matrix(pd_values, resamples, rng) / pd_denom
    defined = pd_totals > 0
    if not defined.any():
        return None
    ratios = cr_totals[defined] / pd_totals[defined]
    lo, hi = np.quantile(ratios, [0.025, 0.975])
    return float(lo), float(hi)


# ---------------------------------------------------------------------------
# Study-level aggregation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PromptOutcomes:
    """Per-run matched character totals for one prompt instance."""

    instance_id: str
    corpus_tag: str
    category: str
    values: tuple[float, ...]  # index = run_index


def prompt_type_breakdown(outcomes: Sequence[PromptOutcomes],
                          book_count: int) -> dict[str, float]:
    """Mean-over-runs SRR per category, normalized by the category's
    instance count."""
    if book_count == 0:
        raise MetricsError("breakdown over an empty corpus is undefined")
    by_cat: dict[str, list[PromptOutcomes]] = {}
    for oc in outcomes:
        by_cat.setdefault(oc.category, []).append(oc)
    result = {}
    for cat, rows in sorted(by_cat.items()):
        means = [sum(r.values) / len(r.values) for r in rows]
        result[cat] = sum(means) / book_count / len(rows)
    return result


def compute_report(model_id: str, outcomes: Sequence[PromptOutcomes],
                   book_counts: Mapping[str, int], tau: int,
                   resamples: int = 10_000, seed: int = 0) -> MetricsReport:
    """Full per-model report from per-prompt per-run outcome grids."""
    by_tag = {"copyrighted": [], "public_domain": []}
    for oc in outcomes:
        if oc.corpus_tag not in by_tag:
            raise MetricsError(f"unknown corpus tag {oc.corpus_tag!r}")
        by_tag[oc.corpus_tag].append(oc)

    runs_used = max((len(oc.values) for oc in outcomes), default=0)

    def point(rows: list[PromptOutcomes], books: int) -> float:
        if books == 0:
            raise MetricsError("SRR over an empty corpus is undefined")
        return sum(sum(r.values) / len(r.values) for r in rows) / books

    n_cr = book_counts.get("copyrighted", 0)
    n_pd = book_counts.get("public_domain", 0)
    srr_cr = point(by_tag["copyrighted"], n_cr)
    srr_pd = point(by_tag["public_domain"], n_pd)

    cr_values = [r.values for r in by_tag["copyrighted"]]
    pd_values = [r.values for r in by_tag["public_domain"]]
    ci_cr = bootstrap_ci(cr_values, resamples, seed, denom=n_cr)
    ci_pd = bootstrap_ci(pd_values, resamples, seed + 1, denom=n_pd)
    ci_ratio = bootstrap_cdr_ci(cr_values, pd_values, n_cr, n_pd,
                                resamples, seed + 2)

    breakdown = {
        tag: prompt_type_breakdown(rows, book_counts[tag])
        for tag, rows in by_tag.items() if rows
    }
    return MetricsReport(
        model_id=model_id, tau=tau, runs_used=runs_used,
        srr_cr=srr_cr, srr_pd=srr_pd, cdr=cdr(srr_cr, srr_pd),
        ci_srr_cr=ci_cr, ci_srr_pd=ci_pd, ci_cdr=ci_ratio,
        per_prompt_type=breakdown,
    )


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

CSV_COLUMNS = ("model", "srr_cr", "srr_cr_lo", "srr_cr_hi",
               "srr_pd", "srr_pd_lo", "srr_pd_hi",
               "cdr", "cdr_lo", "cdr_hi")


def report_csv_row(r: MetricsReport) -> list[str]:
    ratio_lo, ratio_hi = r.ci_cdr if r.ci_cdr else (None, None)
    return [
        r.model_id,
        f"{r.srr_cr:.1f}", f"{r.ci_srr_cr[0]:.1f}", f"{r.ci_srr_cr[1]:.1f}",
        f"{r.srr_pd:.1f}", f"{r.ci_srr_pd[0]:.1f}", f"{r.ci_srr_pd[1]:.1f}",
        format_ratio(r.cdr), format_ratio(ratio_lo), format_ratio(ratio_hi),
    ]


def render_markdown(reports: Sequence[MetricsReport]) -> str:
    lines = [
        "| Model | SRR copyrighted (95% CI) | SRR public domain (95% CI) "
        "| CDR (95% CI) |",
        "|---|---|---|---|",
    ]
    for r in reports:
        cr = f"{r.srr_cr:.1f} ({r.ci_srr_cr[0]:.1f} – {r.ci_srr_cr[1]:.1f})"
        pd_ = f"{r.srr_pd:.1f} ({r.ci_srr_pd[0]:.1f} – {r.ci_srr_pd[1]:.1f})"
        if r.cdr is None:
            ratio = "-"
        else:
            lo, hi = r.ci_cdr if r.ci_cdr else (None, None)
            ratio = f"{format_ratio(r.cdr)}"
            if lo is not None:
                ratio += f" ({format_ratio(lo)} – {format_ratio(hi)})"
        lines.append(f"| {r.model_id} | {cr} | {pd_} | {ratio} |")
    return "\n".join(lines) + "\n"
