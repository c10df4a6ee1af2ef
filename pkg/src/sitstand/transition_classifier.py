"""Sit-to-stand / stand-to-sit labelling of transition segments.

Each transition gets four features (regression slopes of shank and back angular
velocity, start-to-end change of shank and back angle); the transitions of one
recording are split into two clusters by k-means, the clusters are named from
their centroids, and stationary segments inherit the posture implied by the
preceding transition.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import AmbiguityError, InsufficientDataError, RejectedInputError
from .labels import (
    SIT,
    SIT_TO_STAND,
    STAND,
    STAND_TO_SIT,
    TRANSITION,
    TRANSITION_ENDPOINTS,
    TRANSITIONS,
    StateSegment,
    is_transition,
)
from .model_sim import Kinematics

N_RESTARTS = 10
MAX_ITER = 100
# spread below this (raw units: rad, rad/s per sample) is rounding residue
MIN_FEATURE_SD = 1e-9
FEATURE_NAMES = ("slope_omega_s", "slope_omega_b", "delta_theta_s", "delta_theta_b")


class SequenceWarning(UserWarning):
    """Transition labels do not alternate."""


@dataclass(frozen=True)
class TransitionFeatures:
    slope_omega_s: float
    slope_omega_b: float
    delta_theta_s: float
    delta_theta_b: float

    def __post_init__(self):
        if not np.all(np.isfinite(self.as_array())):
            raise RejectedInputError("transition features must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.slope_omega_s, self.slope_omega_b, self.delta_theta_s, self.delta_theta_b])


@dataclass(frozen=True, eq=False)
class ClusterResult:
    assignments: np.ndarray  # cluster id per transition, 0 or 1
    centroids: np.ndarray  # (2, 4), raw feature units
    inertia: float  # in standardised units

    def members(self, k: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == k)


def ols_slope(y) -> float:
    """Least-squares slope of ``y`` against its sample index."""
    y = np.asarray(y, dtype=float)
    x = np.arange(y.size) - 0.5 * (y.size - 1)
    return float(np.dot(x, y - y.mean()) / np.dot(x, x))


def extract_features(segment: StateSegment, shank: Kinematics, back: Kinematics) -> TransitionFeatures:
    if segment.n < 3:
        raise RejectedInputError(f"transition segment of {segment.n} samples is shorter than 3")
    if segment.end_idx > min(len(shank), len(back)):
        raise RejectedInputError("segment extends past the kinematics")
    sl = slice(segment.start_idx, segment.end_idx)
    return TransitionFeatures(
        ols_slope(shank.omega[sl]),
        ols_slope(back.omega[sl]),
        float(shank.theta[segment.end_idx - 1] - shank.theta[segment.start_idx]),
        float(back.theta[segment.end_idx - 1] - back.theta[segment.start_idx]),
    )


def standardize(x: np.ndarray, min_sd: float = MIN_FEATURE_SD) -> np.ndarray:
    """Per-column z-score; columns with spread at or below ``min_sd`` become zero.

    Without the floor a column of pure rounding residue (e.g. the velocity slope
    of a perfectly symmetric transition) would be blown up to unit variance.
    """
    mu = x.mean(axis=0)
    sd = x.std(axis=0)
    z = (x - mu) / np.where(sd > min_sd, sd, 1.0)
    z[:, sd <= min_sd] = 0.0
    return z


def _sq_dist(x, centres):
    return ((x[:, None, :] - centres[None, :, :]) ** 2).sum(axis=2)


def kmeans_plusplus(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    chosen = [int(rng.integers(n))]
    for _ in range(1, k):
        d2 = _sq_dist(x, x[chosen]).min(axis=1)
        total = d2.sum()
        if total > 0:
            idx = int(rng.choice(n, p=d2 / total))
        else:
            rest = [i for i in range(n) if i not in chosen]
            idx = int(rng.choice(rest))
        chosen.append(idx)
    return x[chosen].copy()


def kmeans(x: np.ndarray, k: int, rng: np.random.Generator, max_iter: int = MAX_ITER):
    """Lloyd iterations from a k-means++ start; returns (labels, centres, inertia)."""
    centres = kmeans_plusplus(x, k, rng)
    labels = None
    for _ in range(max_iter):
        new = _sq_dist(x, centres).argmin(axis=1)
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        for j in range(k):
            members = x[labels == j]
            if len(members):
                centres[j] = members.mean(axis=0)
            else:
                # re-seed an empty cluster at the worst-fit point
                far = int(_sq_dist(x, centres).min(axis=1).argmax())
                centres[j] = x[far]
    labels = _sq_dist(x, centres).argmin(axis=1)
    inertia = float(_sq_dist(x, centres)[np.arange(len(x)), labels].sum())
    return labels, centres, inertia


def cluster_transitions(features, seed=0, n_restarts: int = N_RESTARTS, max_iter: int = MAX_ITER) -> ClusterResult:
    """Two-cluster k-means over standardised transition features."""
    features = list(features)
    if len(features) < 2:
        raise InsufficientDataError(f"need at least two transitions to cluster, got {len(features)}")
    raw = np.array([f.as_array() for f in features])
    if len(np.unique(raw, axis=0)) < 2:
        raise AmbiguityError("all transitions have identical features; clusters are undefined")
    x = standardize(raw)
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(n_restarts):
        labels, _, inertia = kmeans(x, 2, rng, max_iter)
        if len(np.unique(labels)) < 2:
            continue
        if best is None or inertia < best[1] - 1e-12:
            best = (labels, inertia)
    if best is None:
        raise AmbiguityError("k-means did not produce two non-empty clusters")
    labels, inertia = best
    # cluster 0 is the one holding the first transition
    if labels[0] != 0:
        labels = 1 - labels
    centroids = np.array([raw[labels == j].mean(axis=0) for j in (0, 1)])
    return ClusterResult(labels, centroids, inertia)


def assign_cluster_labels(clusters: ClusterResult) -> dict[int, str]:
    """Name clusters from their centroids.

    Rising to stand straightens the back, so the cluster with the more negative
    mean back-angle change is sit-to-stand.  Equal changes fall back to the
    back angular-velocity slope (more negative is sit-to-stand).
    """
    if any(len(clusters.members(k)) == 0 for k in (0, 1)):
        raise AmbiguityError("both clusters must be non-empty")
    c = clusters.centroids
    d_theta = c[:, FEATURE_NAMES.index("delta_theta_b")]
    slope = c[:, FEATURE_NAMES.index("slope_omega_b")]
    if d_theta[0] != d_theta[1]:
        rising = int(np.argmin(d_theta))
    elif slope[0] != slope[1]:
        rising = int(np.argmin(slope))
    else:
        raise AmbiguityError(
            f"cluster centroids tie on back-angle change ({d_theta[0]:.4g}) "
            f"and back velocity slope ({slope[0]:.4g})"
        )
    return {rising: SIT_TO_STAND, 1 - rising: STAND_TO_SIT}


def label_stationary(segments: list[StateSegment]) -> list[StateSegment]:
    """Give each stationary segment the posture reached by the previous transition.

    A leading stationary segment takes the posture the first transition starts
    from.
    """
    segments = sorted(segments, key=lambda s: s.start_idx)
    transitions = [s for s in segments if s.label in TRANSITIONS]
    if not transitions:
        raise InsufficientDataError("no labelled transitions to infer postures from")
    if any(s.label == TRANSITION for s in segments):
        raise RejectedInputError("transition segments must be labelled before stationary ones")
    for prev, cur in zip(transitions, transitions[1:]):
        if prev.label == cur.label:
            warnings.warn(
                f"consecutive {cur.label} transitions at samples {prev.start_idx} and {cur.start_idx}",
                SequenceWarning,
                stacklevel=2,
            )
    out = []
    last = None
    first_start = TRANSITION_ENDPOINTS[transitions[0].label][0]
    for seg in segments:
        if seg.label in TRANSITIONS:
            last = seg.label
            out.append(seg)
        elif last is None:
            out.append(seg.relabel(first_start))
        else:
            out.append(seg.relabel(STAND if last == SIT_TO_STAND else SIT))
    return out


def classify_segments(segments, shank: Kinematics, back: Kinematics, seed=0, n_restarts: int = N_RESTARTS):
    """Four-state labels for a binary segmentation; returns labelled segments and clusters."""
    segments = sorted(segments, key=lambda s: s.start_idx)
    trans_idx = [i for i, s in enumerate(segments) if is_transition(s.label)]
    feats = [extract_features(segments[i], shank, back) for i in trans_idx]
    clusters = cluster_transitions(feats, seed=seed, n_restarts=n_restarts)
    names = assign_cluster_labels(clusters)
    labelled = list(segments)
    for i, cid in zip(trans_idx, clusters.assignments):
        labelled[i] = segments[i].relabel(names[int(cid)])
    return label_stationary(labelled), clusters
