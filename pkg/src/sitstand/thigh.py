"""Thigh kinematics from segment labels (no thigh sensor).

Stationary postures hold fixed thigh angles; transitions follow a single
logistic unit ``exp(-x*z) / (1 + exp(-z))`` with ``z = w * (t - b)``, where
``t`` is the sample index inside the segment, ``b`` its midpoint and ``x`` is 1
for sit-to-stand and 0 for stand-to-sit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import RejectedInputError
from .labels import SIT, SIT_TO_STAND, STAND, STAND_TO_SIT, StateSegment
from .model_sim import Kinematics

DEFAULT_W = 0.135
SIT_DEG = 90.0
STAND_DEG = 0.0
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SigmoidParams:
    w: float = DEFAULT_W
    b: float = 0.0
    gain_deg: float = SIT_DEG - STAND_DEG
    x: int = 0

    def __post_init__(self):
        if not (0.0 < self.w <= 1.0):
            raise RejectedInputError(f"w must lie in (0, 1], got {self.w}")
        if self.x not in (0, 1):
            raise RejectedInputError("x is 0 (stand-to-sit) or 1 (sit-to-stand)")

    @property
    def gain(self) -> float:
        return math.radians(self.gain_deg)


def _unit(t, p: SigmoidParams):
    z = p.w * (np.asarray(t, dtype=float) - p.b)
    # exp(-x z) / (1 + exp(-z)) is expit(z) for x=0 and expit(-z) for x=1
    return expit(-z) if p.x == 1 else expit(z)


def thigh_angle(t, params: SigmoidParams):
    """Thigh angle in radians above the standing angle; ``t`` in samples."""
    out = params.gain * _unit(t, params)
    return float(out) if np.ndim(out) == 0 else out


def thigh_derivatives(t, params: SigmoidParams, sample_rate_hz: float):
    """Analytic (omega, alpha) in rad/s and rad/s^2."""
    z = params.w * (np.asarray(t, dtype=float) - params.b)
    s = expit(z)
    ds = s * (1.0 - s)
    d2s = ds * (1.0 - 2.0 * s)
    sign = -1.0 if params.x == 1 else 1.0
    rate = params.w * sample_rate_hz
    return sign * params.gain * ds * rate, sign * params.gain * d2s * rate * rate


def thigh_kinematics(
    segment: StateSegment,
    sample_rate_hz: float = 50.0,
    w: float = DEFAULT_W,
    sit_deg: float = SIT_DEG,
    stand_deg: float = STAND_DEG,
) -> Kinematics:
    """Per-sample thigh (theta, omega, alpha) over one labelled segment."""
    n = segment.n
    sit, stand = math.radians(sit_deg), math.radians(stand_deg)
    if segment.label == SIT:
        return Kinematics(np.full(n, sit), np.zeros(n), np.zeros(n))
    if segment.label == STAND:
        return Kinematics(np.full(n, stand), np.zeros(n), np.zeros(n))
    if segment.label not in (SIT_TO_STAND, STAND_TO_SIT):
        raise RejectedInputError(f"segment at {segment.start_idx} has no posture label ({segment.label!r})")
    params = SigmoidParams(w=w, b=0.5 * (n - 1), gain_deg=sit_deg - stand_deg, x=int(segment.label == SIT_TO_STAND))
    t = np.arange(n)
    omega, alpha = thigh_derivatives(t, params, sample_rate_hz)
    return Kinematics(stand + thigh_angle(t, params), omega, alpha)


def tail_gap(n: int, w: float = DEFAULT_W, gain_deg: float = SIT_DEG - STAND_DEG) -> float:
    """Jump (rad) between an ``n``-sample transition's end sample and the adjoining posture.

    The end samples sit ``(n - 1) / 2`` samples from the midpoint, so this is a
    factor of at most ``exp(w / 2)`` above the continuous-edge value
    ``gain / (1 + exp(w * n / 2))``.
    """
    return math.radians(gain_deg) * float(expit(-w * 0.5 * (n - 1)))


@dataclass(frozen=True, eq=False)
class ThighReconstruction:
    kinematics: Kinematics
    boundary_jumps: list[tuple[int, float]]  # (sample index, |jump| in rad)


def reconstruct_thigh(
    segments,
    sample_rate_hz: float = 50.0,
    w: float = DEFAULT_W,
    sit_deg: float = SIT_DEG,
    stand_deg: float = STAND_DEG,
) -> ThighReconstruction:
    """Concatenate per-segment thigh kinematics over a full labelled recording."""
    segments = sorted(segments, key=lambda s: s.start_idx)
    parts = [thigh_kinematics(s, sample_rate_hz, w, sit_deg, stand_deg) for s in segments]
    kin = Kinematics(
        np.concatenate([p.theta for p in parts]),
        np.concatenate([p.omega for p in parts]),
        np.concatenate([p.alpha for p in parts]),
    )
    jumps = [
        (s.start_idx, float(abs(kin.theta[s.start_idx] - kin.theta[s.start_idx - 1])))
        for s in segments[1:]
    ]
    return ThighReconstruction(kin, jumps)


def golden_section(fun, lo: float, hi: float, tol: float = 1e-6, max_iter: int = 200) -> float:
    """Minimise a unimodal function on ``[lo, hi]``."""
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(max_iter):
        if b - a < tol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = fun(d)
    return 0.5 * (a + b)


def fit_w(reference_theta, segments, sample_rate_hz: float = 50.0, bounds=(1e-3, 1.0), **kwargs) -> tuple[float, float]:
    """Transition speed minimising thigh-angle RMSE against a reference trace.

    Returns ``(w, rmse)``.
    """
    reference_theta = np.asarray(reference_theta, dtype=float)

    def rmse(w):
        est = reconstruct_thigh(segments, sample_rate_hz, w, **kwargs).kinematics.theta
        if est.size != reference_theta.size:
            raise RejectedInputError("segments do not cover the reference trace")
        return float(np.sqrt(np.mean((est - reference_theta) ** 2)))

    w = golden_section(rmse, *bounds)
    return w, rmse(w)
