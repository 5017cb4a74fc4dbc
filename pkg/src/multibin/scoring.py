"""Log score, multibin log score, blurring and expected scores.

All logarithms are natural.  Larger scores are better.  A zero-probability
event scores ``-inf`` unless a ``floor`` is configured.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .errors import IndexOutOfRange, RegularityViolated, SupportMismatch
from .forecast import BlurredForecast, CategoricalForecast

LOG = "log"
MULTIBIN_LOG = "multibin_log"


@dataclass(frozen=True)
class ScoreRule:
    """Which score to apply.  ``d`` is ignored for the plain log score."""

    kind: str = MULTIBIN_LOG
    d: int = 0
    floor: Optional[float] = None

    def __post_init__(self):
        if self.kind not in (LOG, MULTIBIN_LOG):
            raise ValueError(f"unknown score kind {self.kind!r}")
        if self.d < 0:
            raise ValueError("d must be nonnegative")
        if self.floor is not None and not (math.isfinite(self.floor) and self.floor < 0):
            raise ValueError("floor must be finite and negative")

    @property
    def window(self) -> int:
        return self.d if self.kind == MULTIBIN_LOG else 0

    def score(self, f: CategoricalForecast, y: int) -> float:
        if self.kind == LOG:
            return log_score(f, y, floor=self.floor)
        return multibin_log_score(f, y, self.d, floor=self.floor)

    def score_all(self, f: CategoricalForecast, isolated=()) -> np.ndarray:
        """Scores for every possible outcome, as an array of length ``T``."""
        return outcome_scores(f.probs, self, isolated)


def _log(x: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(x)


def _apply_floor(scores, floor):
    if floor is None:
        return scores
    return np.maximum(scores, floor)


def outcome_scores(probs, rule: ScoreRule, isolated=()) -> np.ndarray:
    """Score of ``probs`` under ``rule`` for each outcome bin.

    Bins listed in ``isolated`` (e.g. the onset "none" category) neither
    enter nor own a multibin window: they are scored by their own mass and
    the remaining bins are windowed as if the isolated ones were absent.
    """
    probs = np.asarray(probs, dtype=np.float64)
    if not isolated:
        return _apply_floor(_log(kernels.window_sum(probs, rule.window)), rule.floor)
    keep = np.ones(probs.size, dtype=bool)
    keep[list(isolated)] = False
    out = np.empty(probs.size, dtype=np.float64)
    out[keep] = _log(kernels.window_sum(probs[keep], rule.window))
    out[~keep] = _log(probs[~keep])
    return _apply_floor(out, rule.floor)


def _check_index(f: CategoricalForecast, y: int) -> int:
    if isinstance(y, bool) or not isinstance(y, (int, np.integer)):
        raise IndexOutOfRange(f"outcome index must be an integer, got {y!r}")
    if not 0 <= y < f.T:
        raise IndexOutOfRange(f"outcome index {y} outside 0..{f.T - 1}")
    return int(y)


def _scalar_log(x: float) -> float:
    return math.log(x) if x > 0 else -math.inf


def log_score(f: CategoricalForecast, y: int, floor: Optional[float] = None) -> float:
    """``log(p_y)``; ``y`` is a zero-based bin index."""
    y = _check_index(f, y)
    s = _scalar_log(float(f.probs[y]))
    return s if floor is None else max(s, floor)


def multibin_log_score(
    f: CategoricalForecast, y: int, d: int, floor: Optional[float] = None
) -> float:
    """Log of the mass in bins ``y-d .. y+d``, treating bins off the grid as zero."""
    y = _check_index(f, y)
    if d < 0:
        raise ValueError("d must be nonnegative")
    lo, hi = max(0, y - d), min(f.T, y + d + 1)
    acc = 0.0
    for p in f.probs[lo:hi]:
        acc = acc + float(p)
    s = _scalar_log(acc)
    return s if floor is None else max(s, floor)


def check_regular(probs: np.ndarray, d: int) -> None:
    """Raise ``RegularityViolated`` unless the outer ``d`` bins on each side are zero."""
    if d == 0:
        return
    if probs.size <= 2 * d:
        raise RegularityViolated(f"need more than {2 * d} bins for d={d}, got {probs.size}")
    if np.any(probs[:d] != 0) or np.any(probs[-d:] != 0):
        raise RegularityViolated(
            f"first and last {d} probabilities must be zero; pad the support first"
        )


def blur(f: CategoricalForecast, d: int) -> BlurredForecast:
    """Replace each probability by its ``(2d+1)``-bin moving average."""
    if d < 0:
        raise ValueError("d must be nonnegative")
    check_regular(f.probs, d)
    if d == 0:
        return BlurredForecast(f.bin_labels, f.probs, f.offset, d=0)
    blurred = kernels.window_sum(f.probs, d) / (2 * d + 1)
    return BlurredForecast(f.bin_labels, blurred, f.offset, d=d)


def _check_support(a: CategoricalForecast, b: CategoricalForecast) -> None:
    if a.T != b.T or a.offset != b.offset:
        raise SupportMismatch(
            f"supports differ: T={a.T}/{b.T}, offset={a.offset}/{b.offset}"
        )


def expected_score(
    rule: ScoreRule, report: CategoricalForecast, belief: CategoricalForecast, isolated=()
) -> float:
    """Expectation of ``rule(report, Y)`` when ``Y`` follows ``belief``.

    Outcomes with zero belief contribute nothing, even when the report
    scores them ``-inf``.
    """
    _check_support(report, belief)
    w = belief.probs
    mask = w > 0
    scores = rule.score_all(report, isolated)[mask]
    if np.any(np.isneginf(scores)):
        return -math.inf
    return math.fsum(w[mask] * scores)
