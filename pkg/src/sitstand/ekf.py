"""Extended Kalman filter for one sensed segment (shank or back).

State is ``[theta, omega, alpha]`` under a constant-acceleration process model;
the measurement is accelerometer x/y plus gyroscope z through
:func:`sitstand.model_sim.measurement_model`.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError, RejectedInputError
from .model_sim import G, Kinematics, SegmentState

DEFAULT_DT = 0.02
DEFAULT_P0 = (0.1, 0.1, 0.1)


def default_q(dt: float = DEFAULT_DT) -> np.ndarray:
    return np.diag([(dt ** 2) ** 2, (0.1 * dt) ** 2, 0.04 ** 2])


def default_r(g: float = G) -> np.ndarray:
    return np.diag([(g / 10) ** 2, (g / 10) ** 2, 0.005 ** 2])


def transition_matrix(dt: float) -> np.ndarray:
    return np.array([[1.0, dt, 0.5 * dt * dt], [0.0, 1.0, dt], [0.0, 0.0, 1.0]])


@dataclass(frozen=True, eq=False)
class EkfConfig:
    """Filter parameters; ``q``/``r`` default to the tuned diagonal covariances."""

    l: float
    dt: float = DEFAULT_DT
    g: float = G
    q: np.ndarray | None = None
    r: np.ndarray | None = None
    init_window: int = 10
    p0: np.ndarray = field(default_factory=lambda: np.diag(DEFAULT_P0))

    def __post_init__(self):
        if not self.dt > 0:
            raise RejectedInputError("dt must be positive")
        if not self.g > 0:
            raise RejectedInputError("g must be positive")
        if not self.l > 0:
            raise RejectedInputError("sensor distance l must be positive")
        if self.init_window < 1:
            raise RejectedInputError("init_window must be at least 1")
        q = default_q(self.dt) if self.q is None else np.asarray(self.q, dtype=float)
        r = default_r(self.g) if self.r is None else np.asarray(self.r, dtype=float)
        p0 = np.asarray(self.p0, dtype=float)
        for name, m in (("q", q), ("r", r), ("p0", p0)):
            if m.shape != (3, 3) or not np.all(np.isfinite(m)):
                raise RejectedInputError(f"{name} must be a finite 3x3 matrix")
            if not np.allclose(m, m.T):
                raise RejectedInputError(f"{name} must be symmetric")
            if np.linalg.eigvalsh(m).min() < -1e-12:
                raise RejectedInputError(f"{name} must be positive semi-definite")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "p0", p0)

    @property
    def f(self) -> np.ndarray:
        return transition_matrix(self.dt)


@dataclass(frozen=True, eq=False)
class EkfState:
    x: SegmentState
    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.shape != (3, 3) or not np.all(np.isfinite(p)):
            raise RejectedInputError("covariance must be a finite 3x3 matrix")
        object.__setattr__(self, "p", p)

    @property
    def vector(self) -> np.ndarray:
        return self.x.as_array()


def measurement(x, l: float, g: float = G) -> np.ndarray:
    theta, omega, alpha = x
    return np.array([g * np.sin(theta) - l * alpha, g * np.cos(theta) - l * omega * omega, omega])


def measurement_jacobian(x, l: float, g: float = G) -> np.ndarray:
    """d h / d [theta, omega, alpha]."""
    theta, omega, _ = x
    return np.array(
        [
            [g * np.cos(theta), 0.0, -l],
            [-g * np.sin(theta), -2.0 * l * omega, 0.0],
            [0.0, 1.0, 0.0],
        ]
    )


def _symmetrize(p):
    return 0.5 * (p + p.T)


def _predict(x, p, f, q):
    return f @ x, _symmetrize(f @ p @ f.T + q)


def _update(x, p, z, r, l, g):
    h = measurement(x, l, g)
    jac = measurement_jacobian(x, l, g)
    s = jac @ p @ jac.T + r
    try:
        # K = P J^T S^-1, via S K^T = J P (S and P symmetric)
        gain = np.linalg.solve(s, jac @ p).T
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"innovation covariance is singular (cond={np.linalg.cond(s):.3g}) at x={x}"
        ) from exc
    x_new = x + gain @ (z - h)
    # Joseph form keeps p positive semi-definite under rounding
    a = np.eye(3) - gain @ jac
    p_new = _symmetrize(a @ p @ a.T + gain @ r @ gain.T)
    if not (np.all(np.isfinite(x_new)) and np.all(np.isfinite(p_new))):
        raise NumericalError(f"filter diverged at x={x}")
    return x_new, p_new


def ekf_predict(state: EkfState, config: EkfConfig) -> EkfState:
    x, p = _predict(state.vector, state.p, config.f, config.q)
    return EkfState(SegmentState(*x), p)


def ekf_update(state: EkfState, z, config: EkfConfig) -> EkfState:
    z = np.asarray(z, dtype=float)
    if z.shape != (3,) or not np.all(np.isfinite(z)):
        raise RejectedInputError(f"measurement must be three finite values, got {z!r}")
    x, p = _update(state.vector, state.p, z, config.r, config.l, config.g)
    return EkfState(SegmentState(*x), p)


def initial_state(stream: np.ndarray, config: EkfConfig) -> EkfState:
    """Static-pose start: tilt from mean gravity split, first gyro reading."""
    head = stream[: config.init_window]
    theta0 = float(np.arctan2(head[:, 0].mean(), head[:, 1].mean()))
    return EkfState(SegmentState(theta0, float(stream[0, 2]), 0.0), config.p0.copy())


def run_ekf(stream, config: EkfConfig, state0: EkfState | None = None, return_covariances=False):
    """Filter a (n, 3) stream of (a_x, a_y, gyr_z); one predict+update per sample.

    Returns the post-update :class:`Kinematics`, plus the (n, 3, 3) covariance
    history when ``return_covariances`` is set.
    """
    stream = np.asarray(stream, dtype=float)
    if stream.ndim != 2 or stream.shape[1] != 3:
        raise RejectedInputError("stream must have shape (n, 3)")
    if stream.shape[0] == 0:
        raise RejectedInputError("stream is empty")
    if not np.all(np.isfinite(stream)):
        bad = int(np.flatnonzero(~np.isfinite(stream).all(axis=1))[0])
        raise RejectedInputError(f"non-finite measurement at sample {bad}")

    if state0 is None:
        state0 = initial_state(stream, config)
    x, p = state0.vector, state0.p
    f, q, r, l, g = config.f, config.q, config.r, config.l, config.g
    n = stream.shape[0]
    out = np.empty((n, 3))
    covs = np.empty((n, 3, 3)) if return_covariances else None
    for k in range(n):
        x, p = _predict(x, p, f, q)
        x, p = _update(x, p, stream[k], r, l, g)
        out[k] = x
        if covs is not None:
            covs[k] = p
    kin = Kinematics.from_array(out)
    return (kin, covs) if return_covariances else kin
