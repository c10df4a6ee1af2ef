"""Three-segment sit-to-stand kinematics from a shank and a back IMU."""
from .config import PipelineConfig, load_config
from .ekf import EkfConfig, run_ekf
from .errors import (
    AmbiguityError,
    ConfigError,
    DegenerateInputError,
    FileError,
    InsufficientDataError,
    NumericalError,
    ParseError,
    RejectedInputError,
    SitStandError,
)
from .labels import SIT, SIT_TO_STAND, STAND, STAND_TO_SIT, StateSegment
from .model_sim import Kinematics, TrajectoryProfile, simulate_trial
from .pipeline import KinematicsEstimate, estimate_kinematics

__version__ = "0.1.0"

__all__ = [
    "AmbiguityError",
    "ConfigError",
    "DegenerateInputError",
    "EkfConfig",
    "FileError",
    "InsufficientDataError",
    "Kinematics",
    "KinematicsEstimate",
    "NumericalError",
    "ParseError",
    "PipelineConfig",
    "RejectedInputError",
    "SIT",
    "SIT_TO_STAND",
    "STAND",
    "STAND_TO_SIT",
    "SitStandError",
    "StateSegment",
    "TrajectoryProfile",
    "estimate_kinematics",
    "load_config",
    "run_ekf",
    "simulate_trial",
]
