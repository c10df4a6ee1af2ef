"""Planar rigid-link sensor model and a trajectory-driven IMU simulator.

Angles are measured from the vertical in the sagittal plane.  A sensor sits at
distance ``l`` along the segment from its pivot (ankle for the shank, hip for
the back); pivot translation is ignored.  The simulator produces ground-truth
shank/thigh/back kinematics from a schedule of postures and transitions and
synthesises the two IMU streams that the estimator consumes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import expit

from .errors import RejectedInputError
from .labels import (
    POSTURES,
    SIT,
    SIT_TO_STAND,
    STAND,
    STAND_TO_SIT,
    TRANSITION_ENDPOINTS,
    TRANSITIONS,
    StateSegment,
)

G = 9.81
SHANK = "Shank"
BACK = "Back"
THIGH = "Thigh"

DEFAULT_SIT_ANGLES = (0.1, 0.15)
DEFAULT_STAND_ANGLES = (0.0, 0.0)
THIGH_SIT = math.pi / 2
THIGH_STAND = 0.0
DEFAULT_W = 0.135
MIN_WARP = 4.0
DEFAULT_L_SHANK = 0.25
DEFAULT_L_BACK = 0.35


def _check_finite(name, *values):
    for v in values:
        if not np.all(np.isfinite(v)):
            raise RejectedInputError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class SegmentState:
    theta: float
    omega: float
    alpha: float

    def __post_init__(self):
        _check_finite("SegmentState", self.theta, self.omega, self.alpha)

    def as_array(self) -> np.ndarray:
        return np.array([self.theta, self.omega, self.alpha], dtype=float)


@dataclass(frozen=True)
class SensorPlacement:
    l: float
    segment_id: str = SHANK

    def __post_init__(self):
        if self.segment_id not in (SHANK, BACK):
            raise RejectedInputError(f"sensors are worn on Shank or Back, not {self.segment_id!r}")
        if not (0.0 < self.l < 1.5):
            raise RejectedInputError(f"sensor distance must lie in (0, 1.5) m, got {self.l}")


@dataclass(frozen=True)
class ImuSample:
    t: float
    accel: tuple[float, float, float]
    gyro: tuple[float, float, float]

    def __post_init__(self):
        _check_finite("ImuSample", self.t, self.accel, self.gyro)


@dataclass(frozen=True, eq=False)
class Kinematics:
    """Per-sample (theta, omega, alpha) of one body segment."""

    theta: np.ndarray
    omega: np.ndarray
    alpha: np.ndarray

    def __post_init__(self):
        for name in ("theta", "omega", "alpha"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if not (self.theta.shape == self.omega.shape == self.alpha.shape) or self.theta.ndim != 1:
            raise RejectedInputError("theta, omega and alpha must be 1-D and equally long")

    def __len__(self):
        return self.theta.size

    def __getitem__(self, i):
        if isinstance(i, slice):
            return Kinematics(self.theta[i], self.omega[i], self.alpha[i])
        return SegmentState(float(self.theta[i]), float(self.omega[i]), float(self.alpha[i]))

    def as_array(self) -> np.ndarray:
        return np.column_stack([self.theta, self.omega, self.alpha])

    @classmethod
    def from_states(cls, states: Sequence[SegmentState]) -> "Kinematics":
        arr = np.array([[s.theta, s.omega, s.alpha] for s in states], dtype=float).reshape(-1, 3)
        return cls(arr[:, 0], arr[:, 1], arr[:, 2])

    @classmethod
    def from_array(cls, arr) -> "Kinematics":
        arr = np.asarray(arr, dtype=float)
        return cls(arr[:, 0], arr[:, 1], arr[:, 2])


@dataclass(frozen=True, eq=False)
class ImuStream:
    """One sensor's samples as arrays; ``accel``/``gyro`` have shape (n, 3)."""

    t: np.ndarray
    accel: np.ndarray
    gyro: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        accel = np.asarray(self.accel, dtype=float).reshape(-1, 3)
        gyro = np.asarray(self.gyro, dtype=float).reshape(-1, 3)
        if not (t.ndim == 1 and len(t) == len(accel) == len(gyro)):
            raise RejectedInputError("t, accel and gyro must have matching lengths")
        _check_finite("ImuStream", t, accel, gyro)
        if t.size > 1 and np.any(np.diff(t) <= 0):
            raise RejectedInputError("timestamps must be strictly increasing")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "accel", accel)
        object.__setattr__(self, "gyro", gyro)

    def __len__(self):
        return self.t.size

    def __iter__(self):
        for i in range(len(self)):
            yield ImuSample(float(self.t[i]), tuple(self.accel[i]), tuple(self.gyro[i]))

    def planar(self) -> np.ndarray:
        """(a_x, a_y, gyr_z) columns, the filter's measurement vector."""
        return np.column_stack([self.accel[:, 0], self.accel[:, 1], self.gyro[:, 2]])

    @classmethod
    def from_samples(cls, samples: Sequence[ImuSample]) -> "ImuStream":
        return cls(
            [s.t for s in samples],
            [s.accel for s in samples],
            [s.gyro for s in samples],
        )


@dataclass(frozen=True, eq=False)
class TrialRecording:
    shank_stream: ImuStream
    back_stream: ImuStream
    placement_shank: SensorPlacement
    placement_back: SensorPlacement
    sample_rate_hz: float = 50.0

    def __post_init__(self):
        if not self.sample_rate_hz > 0:
            raise RejectedInputError("sample_rate_hz must be positive")
        if len(self.shank_stream) != len(self.back_stream):
            raise RejectedInputError(
                f"shank and back streams differ in length "
                f"({len(self.shank_stream)} vs {len(self.back_stream)})"
            )
        if len(self.shank_stream):
            skew = np.max(np.abs(self.shank_stream.t - self.back_stream.t))
            if skew > 0.5 / self.sample_rate_hz:
                raise RejectedInputError(f"streams misaligned by up to {skew:.4g} s")

    def __len__(self):
        return len(self.shank_stream)

    @property
    def t(self) -> np.ndarray:
        return self.shank_stream.t


@dataclass(frozen=True)
class TrajectoryProfile:
    """Schedule and posture parameters driving :func:`simulate_segment_trajectory`.

    ``sit_angles`` and ``stand_angles`` are (theta_shank, theta_back) in radians.
    ``transition_speed_w`` is the logistic slope per sample at the transition
    midpoint, the same parameterisation as the thigh model.
    """

    schedule: tuple[tuple[str, float], ...]
    transition_speed_w: float = DEFAULT_W
    sit_angles: tuple[float, float] = DEFAULT_SIT_ANGLES
    stand_angles: tuple[float, float] = DEFAULT_STAND_ANGLES
    noise_accel_sd: float = 0.0
    noise_gyro_sd: float = 0.0
    thigh_angles: tuple[float, float] = (THIGH_SIT, THIGH_STAND)

    def __post_init__(self):
        schedule = tuple((str(lab), float(d)) for lab, d in self.schedule)
        object.__setattr__(self, "schedule", schedule)
        if not schedule:
            raise RejectedInputError("schedule is empty")
        if self.noise_accel_sd < 0 or self.noise_gyro_sd < 0:
            raise RejectedInputError("noise SDs must be non-negative")
        if not self.transition_speed_w > 0:
            raise RejectedInputError("transition_speed_w must be positive")
        posture = None
        prev_transition = None
        for label, dur in schedule:
            if not dur > 0:
                raise RejectedInputError(f"duration of {label} must be positive, got {dur}")
            if label in POSTURES:
                if prev_transition is False:
                    raise RejectedInputError("two stationary spans in a row")
                if posture is not None and posture != label:
                    raise RejectedInputError(f"{label} cannot follow posture {posture}")
                posture, prev_transition = label, False
            elif label in TRANSITIONS:
                if prev_transition is True:
                    raise RejectedInputError("two transitions in a row")
                start, end = TRANSITION_ENDPOINTS[label]
                if posture is not None and posture != start:
                    raise RejectedInputError(f"{label} cannot start from {posture}")
                posture, prev_transition = end, True
            else:
                raise RejectedInputError(f"unknown schedule label {label!r}")

    @classmethod
    def cycles(
        cls,
        n_cycles: int,
        sit_s: float = 3.0,
        stand_s: float = 3.0,
        sit_to_stand_s: float = 1.44,
        stand_to_sit_s: float = 1.55,
        **kwargs,
    ) -> "TrajectoryProfile":
        """Seated start, ``n_cycles`` rise/sit pairs, seated end."""
        if n_cycles < 1:
            raise RejectedInputError("need at least one cycle")
        schedule = []
        for _ in range(n_cycles):
            schedule += [(SIT, sit_s), (SIT_TO_STAND, sit_to_stand_s), (STAND, stand_s), (STAND_TO_SIT, stand_to_sit_s)]
        schedule.append((SIT, sit_s))
        return cls(tuple(schedule), **kwargs)

    def posture_angles(self, label: str) -> np.ndarray:
        """(shank, thigh, back) angles held during a stationary label."""
        if label == SIT:
            return np.array([self.sit_angles[0], self.thigh_angles[0], self.sit_angles[1]])
        return np.array([self.stand_angles[0], self.thigh_angles[1], self.stand_angles[1]])


def sample_profile(
    rng: np.random.Generator,
    n_cycles: int | None = None,
    cycle_range=(2, 5),
    sit_to_stand=(1.44, 0.36),
    stand_to_sit=(1.55, 0.33),
    stationary_range=(2.5, 5.0),
    min_transition_s=1.0,
    **kwargs,
) -> TrajectoryProfile:
    """Random schedule with transition durations drawn from normal timings."""
    if n_cycles is None:
        n_cycles = int(rng.integers(cycle_range[0], cycle_range[1] + 1))
    schedule = []
    for _ in range(n_cycles):
        schedule.append((SIT, rng.uniform(*stationary_range)))
        schedule.append((SIT_TO_STAND, max(min_transition_s, rng.normal(*sit_to_stand))))
        schedule.append((STAND, rng.uniform(*stationary_range)))
        schedule.append((STAND_TO_SIT, max(min_transition_s, rng.normal(*stand_to_sit))))
    schedule.append((SIT, rng.uniform(*stationary_range)))
    return TrajectoryProfile(tuple(schedule), **kwargs)


def measurement_model(theta, omega, alpha, l, g=G):
    """Vectorised sensor model: returns (a_x, a_y, gyr_z)."""
    theta = np.asarray(theta, dtype=float)
    return (
        g * np.sin(theta) - l * np.asarray(alpha, dtype=float),
        g * np.cos(theta) - l * np.asarray(omega, dtype=float) ** 2,
        np.asarray(omega, dtype=float) + 0.0,
    )


def predict_measurement(state: SegmentState, placement: SensorPlacement, g: float = G):
    """Accelerometer x/y and gyroscope z expected for ``state``."""
    _check_finite("state", state.theta, state.omega, state.alpha)
    if not g > 0:
        raise RejectedInputError("g must be positive")
    ax = g * math.sin(state.theta) - placement.l * state.alpha
    ay = g * math.cos(state.theta) - placement.l * state.omega ** 2
    return ax, ay, state.omega


def smooth_step(n: int, w: float):
    """Logistic step across ``n`` samples with flat (C-infinity) ends.

    The logistic argument is ``c * tan(pi * (u - 1/2))`` with ``u`` the sample
    centre position in (0, 1); ``c = w * n / pi`` makes the midpoint slope equal
    to a plain logistic of slope ``w`` per sample.  Returns the step value and
    its first and second derivatives with respect to the sample index.

    ``c`` is floored at ``MIN_WARP``: smaller values give an abrupt onset near
    the span ends that 50 Hz sampling cannot resolve.
    """
    c = max(w * n / math.pi, MIN_WARP)
    u = (np.arange(n) + 0.5) / n
    a = math.pi * (u - 0.5)
    tan_a = np.tan(a)
    sec2 = 1.0 + tan_a ** 2
    s = expit(c * tan_a)
    ds = s * (1.0 - s)
    d2s = ds * (1.0 - 2.0 * s)
    k = math.pi / n
    dz = c * k * sec2
    d2z = 2.0 * c * k * k * sec2 * tan_a
    return s, ds * dz, d2s * dz * dz + ds * d2z


@dataclass(frozen=True, eq=False)
class GroundTruth:
    t: np.ndarray
    shank: Kinematics
    thigh: Kinematics
    back: Kinematics
    segments: list[StateSegment] = field(default_factory=list)
    sample_rate_hz: float = 50.0

    def __len__(self):
        return self.t.size

    @property
    def labels(self) -> np.ndarray:
        from .labels import labels_from_segments

        return labels_from_segments(self.segments, len(self))

    def segment(self, name: str) -> Kinematics:
        return {SHANK: self.shank, THIGH: self.thigh, BACK: self.back}[name]


def simulate_segment_trajectory(profile: TrajectoryProfile, sample_rate_hz: float = 50.0) -> GroundTruth:
    """Ground-truth shank, thigh and back kinematics for a schedule."""
    if not profile.schedule:
        raise RejectedInputError("schedule is empty")
    if not sample_rate_hz > 0:
        raise RejectedInputError("sample_rate_hz must be positive")
    fs = float(sample_rate_hz)

    thetas, omegas, alphas, segments = [], [], [], []
    pos = 0
    for label, dur in profile.schedule:
        n = int(round(dur * fs))
        if n < 1:
            raise RejectedInputError(f"{label} span of {dur} s is shorter than one sample")
        if label in POSTURES:
            ang = profile.posture_angles(label)
            thetas.append(np.tile(ang, (n, 1)))
            omegas.append(np.zeros((n, 3)))
            alphas.append(np.zeros((n, 3)))
        else:
            start, end = TRANSITION_ENDPOINTS[label]
            a0 = profile.posture_angles(start)
            delta = profile.posture_angles(end) - a0
            s, ds, d2s = smooth_step(n, profile.transition_speed_w)
            thetas.append(a0 + np.outer(s, delta))
            omegas.append(np.outer(ds * fs, delta))
            alphas.append(np.outer(d2s * fs * fs, delta))
        segments.append(StateSegment.from_indices(pos, pos + n, label, fs))
        pos += n

    th = np.vstack(thetas)
    om = np.vstack(omegas)
    al = np.vstack(alphas)
    t = np.arange(pos) / fs
    kin = [Kinematics(th[:, j], om[:, j], al[:, j]) for j in range(3)]
    return GroundTruth(t, kin[0], kin[1], kin[2], segments, fs)


def synthesize_imu(
    shank: Kinematics,
    back: Kinematics,
    placement_shank: SensorPlacement,
    placement_back: SensorPlacement,
    sample_rate_hz: float = 50.0,
    noise_accel_sd: float = 0.0,
    noise_gyro_sd: float = 0.0,
    seed=None,
    g: float = G,
    t0: float = 0.0,
) -> TrialRecording:
    """IMU streams for the given truth: sensor model plus i.i.d. Gaussian noise.

    Out-of-plane channels (accel z, gyro x/y) carry noise only.
    """
    if len(shank) != len(back):
        raise RejectedInputError(f"truth lengths differ: shank {len(shank)}, back {len(back)}")
    if len(shank) == 0:
        raise RejectedInputError("truth sequences are empty")
    if noise_accel_sd < 0 or noise_gyro_sd < 0:
        raise RejectedInputError("noise SDs must be non-negative")
    rng = np.random.default_rng(seed)
    n = len(shank)
    t = t0 + np.arange(n) / sample_rate_hz
    streams = []
    for kin, placement in ((shank, placement_shank), (back, placement_back)):
        ax, ay, gz = measurement_model(kin.theta, kin.omega, kin.alpha, placement.l, g)
        zeros = np.zeros(n)
        accel = np.column_stack([ax, ay, zeros])
        gyro = np.column_stack([zeros, zeros, gz])
        noise = rng.standard_normal((n, 6))
        if noise_accel_sd > 0:
            accel = accel + noise_accel_sd * noise[:, :3]
        if noise_gyro_sd > 0:
            gyro = gyro + noise_gyro_sd * noise[:, 3:]
        streams.append(ImuStream(t, accel, gyro))
    return TrialRecording(streams[0], streams[1], placement_shank, placement_back, sample_rate_hz)


def simulate_trial(
    profile: TrajectoryProfile,
    sample_rate_hz: float = 50.0,
    l_shank: float = DEFAULT_L_SHANK,
    l_back: float = DEFAULT_L_BACK,
    seed=None,
    g: float = G,
) -> tuple[GroundTruth, TrialRecording]:
    """Convenience wrapper: trajectory then IMU synthesis with the profile's noise."""
    truth = simulate_segment_trajectory(profile, sample_rate_hz)
    rec = synthesize_imu(
        truth.shank,
        truth.back,
        SensorPlacement(l_shank, SHANK),
        SensorPlacement(l_back, BACK),
        sample_rate_hz,
        profile.noise_accel_sd,
        profile.noise_gyro_sd,
        seed,
        g,
    )
    return truth, rec
