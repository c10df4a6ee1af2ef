"""Stationary/transition segmentation from shank and back kinematics."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import find_peaks

from .errors import DegenerateInputError, RejectedInputError
from .labels import STATIONARY, TRANSITION, StateSegment, segments_from_labels
from .model_sim import Kinematics

MOVING_AVERAGE_N = 5
SCOTT_FACTOR = 3.49
MIN_RUN = 3

PRODUCT = "product"
ADDITIVE = "additive"


@dataclass(frozen=True, eq=False)
class FeatureSignal:
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1:
            raise RejectedInputError("feature must be one-dimensional")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise RejectedInputError("feature values must be finite and non-negative")
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size


@dataclass(frozen=True, eq=False)
class BinarySegmentation:
    labels: np.ndarray
    segments: list[StateSegment] = field(default_factory=list)
    threshold: float = float("nan")

    @property
    def transitions(self) -> list[StateSegment]:
        return [s for s in self.segments if s.label == TRANSITION]


def forward_moving_average(x, n: int = MOVING_AVERAGE_N) -> np.ndarray:
    """``y[t] = mean(x[t:t+n])``, window truncated at the end of the series."""
    x = np.asarray(x, dtype=float)
    m = x.size
    csum = np.concatenate([[0.0], np.cumsum(x)])
    idx = np.arange(m)
    end = np.minimum(idx + n, m)
    return (csum[end] - csum[idx]) / (end - idx)


def build_feature(shank: Kinematics, back: Kinematics, form: str = PRODUCT, n: int = MOVING_AVERAGE_N) -> FeatureSignal:
    """Smoothed absolute product of shank and back angle and angular velocity."""
    if len(shank) != len(back):
        raise RejectedInputError(f"shank ({len(shank)}) and back ({len(back)}) lengths differ")
    if form == PRODUCT:
        raw = shank.theta * shank.omega * back.theta * back.omega
    elif form == ADDITIVE:
        raw = shank.theta * shank.omega + back.theta * back.omega
    else:
        raise RejectedInputError(f"unknown feature form {form!r}")
    return FeatureSignal(forward_moving_average(np.abs(raw), n))


def feature_peaks(feature: FeatureSignal) -> np.ndarray:
    """Values of the local maxima whose prominence clears rounding noise."""
    v = feature.values
    if v.size < 3 or not v.max() > 0:
        return np.empty(0)
    # relative floor keeps peak detection invariant to rescaling the feature
    idx, _ = find_peaks(v, prominence=np.finfo(float).eps * float(v.max()))
    return v[idx]


def scott_bin_width(values) -> float:
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        raise DegenerateInputError("need at least two values for a Scott bin width")
    sd = float(np.std(values, ddof=1))
    if not sd > 0:
        raise DegenerateInputError("values have zero spread; no transitions to separate")
    return SCOTT_FACTOR * sd * values.size ** (-1.0 / 3.0)


def first_bin_edge(values, start: float | None = None) -> float:
    """Right edge of the first Scott-rule bin of a histogram of ``values``."""
    values = np.asarray(values, dtype=float)
    h = scott_bin_width(values)
    return (float(values.min()) if start is None else float(start)) + h


def scott_threshold(feature: FeatureSignal) -> float:
    """Stationary/transition threshold from the histogram of feature peaks.

    The histogram starts at the feature minimum so that the first bin holds the
    near-zero stationary values even when noise-free data has no peaks there.
    """
    if len(feature) < 2 or np.ptp(feature.values) == 0:
        raise DegenerateInputError("feature is constant; no transitions present")
    peaks = feature_peaks(feature)
    return first_bin_edge(peaks, start=float(feature.values.min()))


def remove_islands(labels, max_len: int = MIN_RUN - 1) -> np.ndarray:
    """Flip interior runs of at most ``max_len`` samples to their neighbours' label.

    Runs touching either end of the recording are left alone (they are cut off
    by the recording, not spurious).  Shortest runs are merged first, leftmost
    on ties, until none remain, so the result is a fixed point.
    """
    labels = np.asarray(labels).copy()
    while True:
        change = np.flatnonzero(labels[1:] != labels[:-1]) + 1
        if change.size == 0:
            return labels
        starts = np.concatenate([[0], change])
        ends = np.concatenate([change, [labels.size]])
        lengths = ends - starts
        short = np.flatnonzero(lengths[1:-1] <= max_len) + 1
        if short.size == 0:
            return labels
        k = short[np.argmin(lengths[short])]
        labels[starts[k]:ends[k]] = labels[starts[k - 1]]


def _drop_short_edge_transitions(labels, min_len: int = MIN_RUN) -> np.ndarray:
    labels = labels.copy()
    for idx in (slice(None), slice(None, None, -1)):
        view = labels[idx]
        run = np.argmax(view != view[0]) if np.any(view != view[0]) else view.size
        if view[0] == TRANSITION and run < min_len and run < view.size:
            view[:run] = STATIONARY
    return labels


def classify_and_correct(feature: FeatureSignal, threshold: float, sample_rate_hz: float = 50.0) -> BinarySegmentation:
    """Threshold the feature, then remove spurious short runs.

    Interior runs of one or two samples are flipped; a transition run that is
    cut to fewer than three samples by either end of the recording becomes
    stationary.
    """
    if not threshold > 0:
        raise RejectedInputError(f"threshold must be positive, got {threshold}")
    raw = np.where(feature.values > threshold, TRANSITION, STATIONARY)
    labels = _drop_short_edge_transitions(remove_islands(raw))
    return BinarySegmentation(labels, segments_from_labels(labels, sample_rate_hz), float(threshold))


def segment(shank: Kinematics, back: Kinematics, sample_rate_hz: float = 50.0, form: str = PRODUCT) -> BinarySegmentation:
    feature = build_feature(shank, back, form)
    return classify_and_correct(feature, scott_threshold(feature), sample_rate_hz)
