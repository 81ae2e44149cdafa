"""Fuzzy and exact word-level matching with a compiled fast path.

The hot loop (candidate generation over exact word pairs) runs in a Cython
extension when it compiled at install time; otherwise a pure-Python twin
with identical semantics takes over. ``BACKEND`` names the selected
implementation; set ``REPROAUDIT_PURE_PYTHON=1`` to force the fallback.
The compiled kernel caps its per-pair start frontiers and signals overflow
by returning ``None``, in which case the call reruns on the fallback.
"""

from __future__ import annotations

import importlib
import os

from ..textnorm import NormalizedText
from . import _pyfuzzy
from .core import (
    MatcherSizeError,
    MatchSet,
    MatchSpan,
    flag_uncertain,
    lcs_words,
    matchset_records,
    run_matcher,
    similar,
    span_record,
    with_downgrades,
)
from .oracle import match_oracle

_speedups = None
if not os.environ.get("REPROAUDIT_PURE_PYTHON"):
    try:
        _speedups = importlib.import_module(f"{__name__}._speedups")
    except ImportError:
        _speedups = None

BACKEND = "compiled" if _speedups is not None else "python"


def _fuzzy_backend(out_ids, book_ids, word_lens, tau):
    if _speedups is not None:
        cands = _speedups.fuzzy_candidates(out_ids, book_ids, word_lens, tau)
        if cands is not None:
            return cands
    return _pyfuzzy.fuzzy_candidates(out_ids, book_ids, word_lens, tau)


def _exact_backend(out_ids, book_ids, word_lens, tau):
    if _speedups is not None:
        return _speedups.exact_candidates(out_ids, book_ids, word_lens, tau)
    return _pyfuzzy.exact_candidates(out_ids, book_ids, word_lens, tau)


def match_fuzzy(output: NormalizedText, book: NormalizedText, tau: int) -> MatchSet:
    """All maximal fuzzy matches with join length strictly above ``tau``."""
    return run_matcher(_fuzzy_backend, output, book, tau)


def match_exact(output: NormalizedText, book: NormalizedText, tau: int) -> MatchSet:
    """Like :func:`match_fuzzy` but without one-word deviations."""
    return run_matcher(_exact_backend, output, book, tau)


__all__ = [
    "BACKEND",
    "MatchSet",
    "MatchSpan",
    "MatcherSizeError",
    "flag_uncertain",
    "lcs_words",
    "match_exact",
    "match_fuzzy",
    "match_oracle",
    "matchset_records",
    "similar",
    "span_record",
    "with_downgrades",
]
