"""Categorical forecast types, target bin grids, padding and outcome lookup."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from numbers import Real
from typing import Any, Optional, Sequence

import numpy as np

from .errors import EmptySupport, NegativeProbability, NotNormalized, OutOfRange

NORMALIZATION_TOL = 1e-6
NEGATIVE_CLAMP = 1e-12
_RENORM_SLACK = 1e-14

TARGET_IDS = (
    "wili_1wk",
    "wili_2wk",
    "wili_3wk",
    "wili_4wk",
    "onset_week",
    "peak_week",
    "peak_intensity",
)
WEEK_AHEAD_TARGETS = TARGET_IDS[:4]
WEEK_TARGETS = ("onset_week", "peak_week")
NONE_LABEL = "none"


def _frozen_array(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class CategoricalForecast:
    """Probability vector over ``T`` ordered bins.

    ``offset`` counts zero bins prepended by :func:`pad_support`, so bin
    ``i`` of a padded forecast is bin ``i - offset`` of the original.
    """

    bin_labels: tuple
    probs: np.ndarray
    offset: int = 0

    def __post_init__(self):
        probs = _frozen_array(self.probs)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "bin_labels", tuple(self.bin_labels))
        if probs.ndim != 1:
            raise ValueError("probs must be one-dimensional")
        if probs.size == 0:
            raise EmptySupport("forecast has no bins")
        if len(self.bin_labels) != probs.size:
            raise ValueError(
                f"{len(self.bin_labels)} labels for {probs.size} probabilities"
            )
        if len(set(self.bin_labels)) != len(self.bin_labels):
            raise ValueError("bin labels must be unique")
        if np.any(probs < 0):
            raise NegativeProbability("probabilities must be nonnegative")
        if abs(math.fsum(probs) - 1.0) > NORMALIZATION_TOL:
            raise NotNormalized(f"probabilities sum to {math.fsum(probs)!r}")

    @classmethod
    def from_probs(cls, probs, labels: Optional[Sequence] = None, offset: int = 0):
        probs = np.asarray(probs, dtype=np.float64)
        if labels is None:
            labels = range(1, probs.size + 1)
        return cls(tuple(labels), probs, offset)

    @property
    def T(self) -> int:
        return int(self.probs.size)

    def with_probs(self, probs) -> "CategoricalForecast":
        return type(self)(self.bin_labels, probs, self.offset)

    def __eq__(self, other):
        if not isinstance(other, CategoricalForecast) or type(self) is not type(other):
            return NotImplemented
        return (
            self.bin_labels == other.bin_labels
            and self.offset == other.offset
            and np.array_equal(self.probs, other.probs)
        )

    def __hash__(self):
        return hash((self.bin_labels, self.offset, self.probs.tobytes()))

    def __repr__(self):
        return f"{type(self).__name__}(T={self.T}, probs={np.array2string(self.probs, precision=4)})"


@dataclass(frozen=True, eq=False, repr=False)
class BlurredForecast(CategoricalForecast):
    """Moving-average version of a forecast, produced by ``scoring.blur``."""

    d: int = 0

    def __eq__(self, other):
        base = CategoricalForecast.__eq__(self, other)
        if base is NotImplemented or not base:
            return base
        return self.d == other.d

    __hash__ = CategoricalForecast.__hash__


def validate_forecast(
    raw_probs, tol: float = NORMALIZATION_TOL, labels: Optional[Sequence] = None
) -> CategoricalForecast:
    """Check and renormalise a raw probability vector.

    Entries in ``[-1e-12, 0)`` are clamped to zero.  Sums within ``tol`` of
    one are silently rescaled.

    Raises
    ------
    EmptySupport, NegativeProbability, NotNormalized
    """
    p = np.array(raw_probs, dtype=np.float64).ravel()
    if p.size == 0:
        raise EmptySupport("forecast has no bins")
    if not np.all(np.isfinite(p)):
        raise NotNormalized("probabilities must be finite")
    if np.any(p < -NEGATIVE_CLAMP):
        bad = int(np.argmax(p < -NEGATIVE_CLAMP))
        raise NegativeProbability(f"probability {p[bad]!r} at position {bad} is negative")
    p[p < 0] = 0.0
    total = math.fsum(p)
    if abs(total - 1.0) > tol:
        raise NotNormalized(f"probabilities sum to {total!r}, tolerance {tol}")
    # a few ulps of drift is left alone so re-validating is a no-op
    if abs(total - 1.0) > _RENORM_SLACK:
        p = p / total
    return CategoricalForecast.from_probs(p, labels)


def _extend_labels(labels: tuple, before: int, after: int) -> tuple:
    if before == 0 and after == 0:
        return labels
    numeric = all(isinstance(x, Real) and not isinstance(x, bool) for x in labels)
    if numeric:
        step = labels[1] - labels[0] if len(labels) > 1 else 1
        is_int = all(isinstance(x, (int, np.integer)) for x in labels)
        head = [labels[0] - step * k for k in range(before, 0, -1)]
        tail = [labels[-1] + step * k for k in range(1, after + 1)]
        if not is_int:
            head = [round(x, 10) for x in head]
            tail = [round(x, 10) for x in tail]
        return tuple(head) + labels + tuple(tail)
    head = [f"<pad-{k}>" for k in range(before, 0, -1)]
    tail = [f"<pad+{k}>" for k in range(1, after + 1)]
    return tuple(head) + labels + tuple(tail)


def pad_support(f: CategoricalForecast, d: int) -> CategoricalForecast:
    """Add the fewest zero bins so the first and last ``d`` bins carry no mass.

    The result satisfies the regularity condition needed by ``blur`` and
    the hedging routines.  Existing probabilities are untouched.
    """
    if d < 0:
        raise ValueError("d must be nonnegative")
    p = f.probs
    nz = np.flatnonzero(p)
    lead = int(nz[0])
    trail = int(p.size - 1 - nz[-1])
    before = max(0, d - lead)
    after = max(0, d - trail)
    if before == 0 and after == 0:
        return f
    padded = np.concatenate([np.zeros(before), p, np.zeros(after)])
    labels = _extend_labels(f.bin_labels, before, after)
    return CategoricalForecast(labels, padded, f.offset + before)


def unpad(g: CategoricalForecast, original: CategoricalForecast) -> CategoricalForecast:
    """Map a forecast on a padded grid back onto ``original``'s bins.

    Raises ``ValueError`` if mass sits on a padding bin.
    """
    shift = g.offset - original.offset
    lo, hi = shift, shift + original.T
    outside = math.fsum(g.probs[:lo]) + math.fsum(g.probs[hi:])
    if outside > 0:
        raise ValueError(f"{outside!r} probability mass on padding bins")
    return CategoricalForecast(original.bin_labels, g.probs[lo:hi], original.offset)


@dataclass(frozen=True)
class Bin:
    """One outcome category: a numeric interval or a single epidemic week."""

    label: Any
    start: Optional[float] = None
    end: Optional[float] = None
    closed_right: bool = False

    def contains(self, value: float, eps: float = 1e-9) -> bool:
        if self.start is None or self.end is None:
            return False
        if value < self.start - eps:
            return False
        if self.closed_right:
            return value <= self.end + eps
        return value < self.end - eps


@dataclass(frozen=True)
class TargetSpec:
    """Bin grid and multibin half-width for one FluSight target."""

    target_id: str
    d: int
    bins: tuple
    units: str
    season: Optional[int] = None
    has_none: bool = False
    _index: dict = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.d < 0:
            raise ValueError("d must be nonnegative")
        object.__setattr__(self, "bins", tuple(self.bins))
        object.__setattr__(self, "_index", {b.label: i for i, b in enumerate(self.bins)})

    @property
    def labels(self) -> tuple:
        return tuple(b.label for b in self.bins)

    @property
    def none_index(self) -> Optional[int]:
        return self._index.get(NONE_LABEL) if self.has_none else None

    @property
    def is_week_target(self) -> bool:
        return self.units == "week"

    def index_of(self, label) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise OutOfRange(f"{label!r} is not a bin of {self.target_id}") from None


def outcome_to_bin(observed, spec: TargetSpec) -> int:
    """Index of the bin containing ``observed``.

    Interval bins are left-closed, right-open apart from a closed terminal
    bin.  Week targets accept ``"YYYY-EWww"`` labels, bare week numbers
    (interpreted in ``spec.season``) and ``"none"`` for onset.
    """
    from . import weeks

    if spec.is_week_target:
        if isinstance(observed, str) and observed.strip().lower() == NONE_LABEL:
            if spec.has_none:
                return spec.index_of(NONE_LABEL)
            raise OutOfRange(f"{spec.target_id} has no 'none' bin")
        try:
            label = weeks.canonical_week(observed, spec.season)
        except ValueError as exc:
            raise OutOfRange(str(exc)) from None
        return spec.index_of(label)

    try:
        value = float(observed)
    except (TypeError, ValueError):
        raise OutOfRange(f"cannot interpret {observed!r} as a number") from None
    if not math.isfinite(value):
        raise OutOfRange(f"{observed!r} is not finite")
    for i, b in enumerate(spec.bins):
        if b.contains(value):
            return i
    raise OutOfRange(f"{value!r} lies outside the {spec.target_id} bins")
