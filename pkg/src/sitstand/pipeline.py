"""End-to-end estimation: two IMU streams in, three-segment kinematics out."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import PipelineConfig
from .ekf import run_ekf
from .errors import SitStandError
from .labels import labels_from_segments
from .model_sim import BACK, SHANK, THIGH, Kinematics, TrialRecording
from .segmenter import BinarySegmentation, segment
from .thigh import reconstruct_thigh
from .transition_classifier import ClusterResult, classify_segments


@dataclass(frozen=True, eq=False)
class KinematicsEstimate:
    t: np.ndarray
    shank: Kinematics
    thigh: Kinematics
    back: Kinematics
    labels: np.ndarray
    segments: list
    binary: BinarySegmentation
    clusters: ClusterResult
    boundary_jumps: list

    def as_dict(self) -> dict[str, Kinematics]:
        return {SHANK: self.shank, THIGH: self.thigh, BACK: self.back}


def _stage(name, fn, *args, **kwargs):
    """Call ``fn``; errors keep their type but gain a ``stage`` tag and message prefix."""
    try:
        return fn(*args, **kwargs)
    except SitStandError as exc:
        if getattr(exc, "stage", None) is None:
            exc.stage = name
            exc.args = (f"[{name}] {exc}",)
        raise


def estimate_sensed(rec: TrialRecording, config: PipelineConfig):
    shank = _stage("ekf", run_ekf, rec.shank_stream.planar(), config.ekf_config(rec.placement_shank.l))
    back = _stage("ekf", run_ekf, rec.back_stream.planar(), config.ekf_config(rec.placement_back.l))
    return shank, back


def segment_recording(rec: TrialRecording, config: PipelineConfig, shank=None, back=None):
    if shank is None or back is None:
        shank, back = estimate_sensed(rec, config)
    binary = _stage("segmenter", segment, shank, back, rec.sample_rate_hz, config.feature_form)
    return shank, back, binary


def estimate_kinematics(rec: TrialRecording, config: PipelineConfig | None = None) -> KinematicsEstimate:
    config = config or PipelineConfig()
    shank, back, binary = segment_recording(rec, config)
    segments, clusters = _stage(
        "transition_classifier",
        classify_segments,
        binary.segments,
        shank,
        back,
        seed=config.seed,
        n_restarts=config.n_restarts,
    )
    thigh = _stage(
        "thigh_reconstructor",
        reconstruct_thigh,
        segments,
        rec.sample_rate_hz,
        config.w,
        config.sit_deg,
        config.stand_deg,
    )
    labels = labels_from_segments(segments, len(rec))
    return KinematicsEstimate(
        rec.t.copy(), shank, thigh.kinematics, back, labels, segments, binary, clusters, thigh.boundary_jumps
    )
