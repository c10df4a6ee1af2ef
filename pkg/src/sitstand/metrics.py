"""Agreement, timing, posture and rank-test statistics for estimated kinematics."""
from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.stats import norm, rankdata

from .errors import DegenerateInputError, InsufficientDataError, RejectedInputError
from .labels import SIT, STAND, TRANSITIONS, StateSegment, segments_from_labels

RANGE = "range"
MEAN = "mean"
EXACT_MAX_N = 8
PHASE_POINTS = 101


def _pair(a, b, min_len=1):
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.size != b.size:
        raise RejectedInputError(f"sequence lengths differ ({a.size} vs {b.size})")
    if a.size < min_len:
        raise RejectedInputError(f"need at least {min_len} samples, got {a.size}")
    return a, b


def rmse(estimate, reference) -> float:
    e, r = _pair(estimate, reference)
    return float(np.sqrt(np.mean((e - r) ** 2)))


def nrmse(estimate, reference, normalization: str = RANGE) -> float:
    """RMSE over the reference range (or over |mean| of the reference)."""
    e, r = _pair(estimate, reference)
    if normalization == RANGE:
        scale = float(np.ptp(r))
    elif normalization == MEAN:
        scale = abs(float(np.mean(r)))
    else:
        raise RejectedInputError(f"unknown normalization {normalization!r}")
    if not scale > 0:
        raise DegenerateInputError("reference has zero range; NRMSE is undefined")
    return rmse(e, r) / scale


@dataclass(frozen=True, eq=False)
class AgreementReport:
    mean_diff: float
    sd_diff: float
    pct_within_2sd: float
    means: np.ndarray
    diffs: np.ndarray

    @property
    def limits(self) -> tuple[float, float]:
        return self.mean_diff - 2 * self.sd_diff, self.mean_diff + 2 * self.sd_diff

    def summary(self) -> dict:
        lo, hi = self.limits
        return {
            "mean_diff": self.mean_diff,
            "sd_diff": self.sd_diff,
            "pct_within_2sd": self.pct_within_2sd,
            "lower_limit": lo,
            "upper_limit": hi,
            "n": int(self.diffs.size),
        }


def bland_altman(a, b) -> AgreementReport:
    a, b = _pair(a, b, min_len=2)
    diffs = a - b
    mean_diff = float(diffs.mean())
    sd = float(diffs.std(ddof=1))
    if sd == 0:
        pct = 100.0
    else:
        inside = np.abs(diffs - mean_diff) <= 2 * sd
        pct = 100.0 * float(inside.mean())
    return AgreementReport(mean_diff, sd, pct, 0.5 * (a + b), diffs)


@dataclass
class TimingStats:
    durations: dict[str, list[float]] = field(default_factory=dict)
    mean: dict[str, float] = field(default_factory=dict)
    sd: dict[str, float] = field(default_factory=dict)
    empty: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


def timing_stats(segments) -> TimingStats:
    """Duration summary per transition class (SD with n-1 denominator)."""
    out = TimingStats()
    for label in TRANSITIONS:
        d = [float(s.duration_s) for s in segments if s.label == label]
        out.durations[label] = d
        out.mean[label] = float(np.mean(d)) if d else float("nan")
        out.sd[label] = float(np.std(d, ddof=1)) if len(d) > 1 else float("nan")
    out.empty = not any(out.durations.values())
    return out


@dataclass(frozen=True)
class MannWhitneyResult:
    u: float  # statistic of the first sample
    p_value: float  # two-sided
    p_less: float  # H1: first sample stochastically smaller
    p_greater: float
    method: str


def _tie_term(ranks) -> float:
    _, counts = np.unique(ranks, return_counts=True)
    return float(np.sum(counts ** 3 - counts))


def mann_whitney_u(sample_a, sample_b, method: str = "auto") -> MannWhitneyResult:
    """Rank-sum test; exact permutation distribution for small samples."""
    a = np.asarray(sample_a, dtype=float).ravel()
    b = np.asarray(sample_b, dtype=float).ravel()
    n1, n2 = a.size, b.size
    if n1 < 3 or n2 < 3:
        raise InsufficientDataError(f"each sample needs at least 3 observations (got {n1}, {n2})")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise RejectedInputError("samples must be finite")
    ranks = rankdata(np.concatenate([a, b]))
    u = float(ranks[:n1].sum() - n1 * (n1 + 1) / 2.0)
    if method == "auto":
        method = "exact" if max(n1, n2) <= EXACT_MAX_N else "normal"

    if method == "exact":
        total = math.comb(n1 + n2, n1)
        # midranks are multiples of 1/2; doubling keeps the comparison exact
        u2 = round(2 * u)
        offset = n1 * (n1 + 1)
        le = ge = 0
        for combo in itertools.combinations(range(n1 + n2), n1):
            v = round(2 * ranks[list(combo)].sum()) - offset
            le += v <= u2
            ge += v >= u2
        p_less, p_greater = le / total, ge / total
    elif method == "normal":
        n = n1 + n2
        mu = n1 * n2 / 2.0
        var = n1 * n2 / 12.0 * ((n + 1) - _tie_term(ranks) / (n * (n - 1)))
        if var <= 0:
            return MannWhitneyResult(u, 1.0, 1.0, 1.0, method)
        sd = math.sqrt(var)
        p_less = float(norm.cdf((u - mu + 0.5) / sd))
        p_greater = float(norm.sf((u - mu - 0.5) / sd))
    else:
        raise RejectedInputError(f"unknown method {method!r}")
    p_two = min(1.0, 2.0 * min(p_less, p_greater))
    return MannWhitneyResult(u, p_two, min(1.0, p_less), min(1.0, p_greater), method)


def bonferroni(p_values, m: int | None = None) -> np.ndarray:
    p = np.asarray(p_values, dtype=float)
    m = p.size if m is None else int(m)
    if m < 1:
        raise RejectedInputError("number of comparisons must be at least 1")
    return np.minimum(p * m, 1.0)


@dataclass
class PostureStats:
    """Mean/SD of shank and back angle per posture; ``missing`` lists absent states."""

    stats: dict[str, dict[str, dict[str, float]]] = field(default_factory=dict)
    missing: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def _posture_entry(values):
    values = np.asarray(values, dtype=float)
    return {
        "mean": float(values.mean()),
        "sd": float(values.std(ddof=1)) if values.size > 1 else 0.0,
        "n": int(values.size),
    }


def posture_stats(labels, shank_theta, back_theta) -> PostureStats:
    labels = np.asarray(labels)
    shank_theta, back_theta = _pair(shank_theta, back_theta)
    if labels.size != shank_theta.size:
        raise RejectedInputError("labels and angles differ in length")
    out = PostureStats()
    for state in (SIT, STAND):
        mask = labels == state
        if not mask.any():
            out.missing.append(state)
            continue
        out.stats[state] = {"shank": _posture_entry(shank_theta[mask]), "back": _posture_entry(back_theta[mask])}
    return out


def pooled_posture_stats(trials) -> PostureStats:
    """Posture statistics over several ``(labels, shank_theta, back_theta)`` trials."""
    trials = list(trials)
    if not trials:
        raise InsufficientDataError("no trials to pool")
    labels = np.concatenate([np.asarray(t[0]) for t in trials])
    shank = np.concatenate([np.asarray(t[1], dtype=float) for t in trials])
    back = np.concatenate([np.asarray(t[2], dtype=float) for t in trials])
    return posture_stats(labels, shank, back)


def classification_accuracy(estimated_labels, true_labels) -> float:
    est = np.asarray(estimated_labels)
    ref = np.asarray(true_labels)
    if est.shape != ref.shape:
        raise RejectedInputError(f"label sequences differ in length ({est.size} vs {ref.size})")
    if est.size == 0:
        raise InsufficientDataError("no labels to compare")
    return float(np.mean(est == ref))


def boundary_errors(true_segments, detected_segments) -> list[int]:
    """Distance in samples from each true boundary to the nearest detected one."""
    true_b = np.array([s.start_idx for s in true_segments[1:]])
    det_b = np.array([s.start_idx for s in detected_segments[1:]])
    if det_b.size == 0:
        return [int(10 ** 9)] * true_b.size
    return [int(np.min(np.abs(det_b - b))) for b in true_b]


def resample_phase(curve, n_points: int = PHASE_POINTS) -> np.ndarray:
    """Linear resampling of one transition onto 0-100 % phase."""
    curve = np.asarray(curve, dtype=float)
    if curve.size < 2:
        raise RejectedInputError("need at least two samples to resample")
    return np.interp(np.linspace(0.0, 1.0, n_points), np.linspace(0.0, 1.0, curve.size), curve)


def grand_average(curves, n_points: int = PHASE_POINTS):
    """Phase-normalised mean and SD; returns (phase_pct, mean, sd)."""
    curves = list(curves)
    if not curves:
        raise InsufficientDataError("no curves to average")
    stack = np.vstack([resample_phase(c, n_points) for c in curves])
    sd = stack.std(axis=0, ddof=1) if len(curves) > 1 else np.zeros(n_points)
    return np.linspace(0.0, 100.0, n_points), stack.mean(axis=0), sd


def transition_curves(labels, signal, sample_rate_hz: float = 50.0) -> dict[str, list[np.ndarray]]:
    signal = np.asarray(signal, dtype=float)
    out: dict[str, list[np.ndarray]] = {lab: [] for lab in TRANSITIONS}
    for seg in segments_from_labels(labels, sample_rate_hz):
        if seg.label in out and seg.n >= 2:
            out[seg.label].append(signal[seg.start_idx:seg.end_idx])
    return out


def labelled_segments(labels, sample_rate_hz: float) -> list[StateSegment]:
    return segments_from_labels(labels, sample_rate_hz)
