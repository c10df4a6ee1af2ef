"""Scoring the full pipeline against simulator ground truth over cohorts of trials."""
from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .config import PipelineConfig
from .ekf import default_r
from .errors import DegenerateInputError, SitStandError
from .labels import TRANSITIONS, segments_from_labels, to_binary
from .metrics import boundary_errors, classification_accuracy, nrmse
from .model_sim import G, GroundTruth, TrialRecording, sample_profile, simulate_trial
from .pipeline import estimate_kinematics
from .transition_classifier import SequenceWarning

DEFAULT_ACCEL_SD = float(np.sqrt(default_r(G)[0, 0]))
DEFAULT_GYRO_SD = float(np.sqrt(default_r(G)[2, 2]))


@dataclass
class TrialScore:
    n_true: int
    n_detected: int | None  # None when the pipeline raised
    boundary_errors: list[int] = field(default_factory=list)
    accuracy: float = 0.0
    binary_accuracy: float = 0.0
    mislabelled: int = 0
    nrmse: dict[str, float] = field(default_factory=dict)
    error: str | None = None


def score_trial(truth: GroundTruth, rec: TrialRecording, config: PipelineConfig) -> TrialScore:
    n_true = sum(s.label in TRANSITIONS for s in truth.segments)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", SequenceWarning)
            est = estimate_kinematics(rec, config)
    except SitStandError as exc:
        return TrialScore(n_true, None, error=f"{type(exc).__name__}: {exc}")
    true_bin = segments_from_labels(to_binary(truth.labels), rec.sample_rate_hz)
    true_tr = [s for s in truth.segments if s.label in TRANSITIONS]
    wrong = 0
    for s in est.segments:
        if s.label in TRANSITIONS:
            hit = [t for t in true_tr if t.start_idx < s.end_idx and s.start_idx < t.end_idx]
            wrong += not hit or hit[0].label != s.label
    errs = {}
    for name, e, r in (
        ("shank_theta", est.shank.theta, truth.shank.theta),
        ("shank_omega", est.shank.omega, truth.shank.omega),
        ("back_theta", est.back.theta, truth.back.theta),
        ("back_omega", est.back.omega, truth.back.omega),
        ("thigh_theta", est.thigh.theta, truth.thigh.theta),
    ):
        try:
            errs[name] = nrmse(e, r)
        except DegenerateInputError:
            errs[name] = float("nan")
    return TrialScore(
        n_true,
        len(est.binary.transitions),
        boundary_errors(true_bin, est.binary.segments),
        classification_accuracy(est.labels, truth.labels),
        classification_accuracy(to_binary(est.labels), to_binary(truth.labels)),
        wrong,
        errs,
    )


@dataclass
class CohortSummary:
    n_trials: int
    count_matches: int
    failures: int
    median_boundary_error: float
    mean_accuracy: float
    mean_binary_accuracy: float
    mislabelled_transitions: int
    mean_nrmse: dict[str, float]

    def to_dict(self) -> dict:
        return asdict(self)


def summarize(scores: list[TrialScore]) -> CohortSummary:
    errs = [e for s in scores for e in s.boundary_errors]
    ok = [s for s in scores if s.n_detected is not None]
    keys = ok[0].nrmse.keys() if ok else []
    return CohortSummary(
        n_trials=len(scores),
        count_matches=sum(s.n_true == s.n_detected for s in scores),
        failures=len(scores) - len(ok),
        median_boundary_error=float(np.median(errs)) if errs else float("nan"),
        mean_accuracy=float(np.mean([s.accuracy for s in scores])),
        mean_binary_accuracy=float(np.mean([s.binary_accuracy for s in scores])),
        mislabelled_transitions=sum(s.mislabelled for s in scores),
        mean_nrmse={k: float(np.nanmean([s.nrmse[k] for s in ok])) for k in keys},
    )


def run_cohort(
    n_trials: int = 50,
    seed: int = 2024,
    noise_factor: float = 1.0,
    config: PipelineConfig | None = None,
    sample_rate_hz: float = 50.0,
    **profile_kwargs,
) -> list[TrialScore]:
    """Random 2-5 cycle trials; noise SDs are ``noise_factor`` times the filter's R."""
    config = config or PipelineConfig()
    rng = np.random.default_rng(seed)
    scores = []
    for i in range(n_trials):
        profile = sample_profile(
            rng,
            noise_accel_sd=noise_factor * DEFAULT_ACCEL_SD,
            noise_gyro_sd=noise_factor * DEFAULT_GYRO_SD,
            **profile_kwargs,
        )
        truth, rec = simulate_trial(profile, sample_rate_hz, config.l_shank, config.l_back, seed=seed + i)
        scores.append(score_trial(truth, rec, config.replace(seed=i)))
    return scores
