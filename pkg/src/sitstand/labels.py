"""State labels and contiguous labelled spans."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RejectedInputError

SIT = "Sit"
STAND = "Stand"
SIT_TO_STAND = "SitToStand"
STAND_TO_SIT = "StandToSit"

STATIONARY = "Stationary"
TRANSITION = "Transition"

POSTURES = (SIT, STAND)
TRANSITIONS = (SIT_TO_STAND, STAND_TO_SIT)
FOUR_STATES = POSTURES + TRANSITIONS
ALL_LABELS = FOUR_STATES + (STATIONARY, TRANSITION)

# posture before / after each transition
TRANSITION_ENDPOINTS = {SIT_TO_STAND: (SIT, STAND), STAND_TO_SIT: (STAND, SIT)}


def is_transition(label: str) -> bool:
    return label in TRANSITIONS or label == TRANSITION


@dataclass(frozen=True)
class StateSegment:
    """Half-open span ``[start_idx, end_idx)`` of samples sharing one label."""

    start_idx: int
    end_idx: int
    label: str
    duration_s: float

    def __post_init__(self):
        if not self.start_idx < self.end_idx:
            raise RejectedInputError(
                f"segment start {self.start_idx} must precede end {self.end_idx}"
            )
        if self.label not in ALL_LABELS and self.label is not None:
            raise RejectedInputError(f"unknown segment label {self.label!r}")

    @classmethod
    def from_indices(cls, start_idx, end_idx, label, sample_rate_hz) -> "StateSegment":
        return cls(int(start_idx), int(end_idx), label, (end_idx - start_idx) / sample_rate_hz)

    @property
    def n(self) -> int:
        return self.end_idx - self.start_idx

    @property
    def midpoint(self) -> float:
        """Sample index of the span centre (may fall between samples)."""
        return 0.5 * (self.start_idx + self.end_idx - 1)

    def relabel(self, label) -> "StateSegment":
        return StateSegment(self.start_idx, self.end_idx, label, self.duration_s)


def segments_from_labels(labels, sample_rate_hz: float) -> list[StateSegment]:
    """Split a per-sample label sequence into maximal runs."""
    labels = np.asarray(labels)
    if labels.size == 0:
        return []
    change = np.flatnonzero(labels[1:] != labels[:-1]) + 1
    starts = np.concatenate([[0], change])
    ends = np.concatenate([change, [labels.size]])
    return [
        StateSegment.from_indices(s, e, str(labels[s]), sample_rate_hz)
        for s, e in zip(starts, ends)
    ]


def labels_from_segments(segments, n: int | None = None) -> np.ndarray:
    """Inverse of :func:`segments_from_labels`; segments must tile ``[0, n)``."""
    segments = sorted(segments, key=lambda s: s.start_idx)
    if n is None:
        n = segments[-1].end_idx if segments else 0
    out = np.empty(n, dtype=object)
    pos = 0
    for seg in segments:
        if seg.start_idx != pos:
            raise RejectedInputError(f"segments leave a gap or overlap at sample {pos}")
        out[seg.start_idx:seg.end_idx] = seg.label
        pos = seg.end_idx
    if pos != n:
        raise RejectedInputError(f"segments cover {pos} samples, expected {n}")
    return out.astype(str)


def to_binary(labels) -> np.ndarray:
    """Collapse four-state labels to Stationary/Transition."""
    labels = np.asarray(labels)
    return np.where(np.isin(labels, TRANSITIONS + (TRANSITION,)), TRANSITION, STATIONARY)
