"""Pipeline configuration and its INI file format.

Example::

    [trial]
    shank_csv = data/shank_imu.csv
    back_csv = data/back_imu.csv
    l_shank = 0.25          ; metres, ankle to shank sensor
    l_back = 0.35           ; metres, hip to back sensor
    sample_rate_hz = 50
    back_offset_s = 0.0     ; added to back timestamps before alignment

    [ekf]
    g = 9.81
    q_diag = 1.6e-07, 4e-06, 0.0016
    r_diag = 0.962361, 0.962361, 2.5e-05
    init_window = 10

    [classifier]
    feature_form = product  ; or additive
    n_restarts = 10

    [thigh]
    w = 0.135
    sit_deg = 90
    stand_deg = 0

    [run]
    seed = 0
    output_dir = out
"""
from __future__ import annotations

import configparser
import dataclasses
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .ekf import EkfConfig
from .errors import ConfigError, SitStandError
from .model_sim import DEFAULT_L_BACK, DEFAULT_L_SHANK, G
from .segmenter import ADDITIVE, PRODUCT

OUTPUT_DIR_ENV = "SITSTAND_OUTPUT_DIR"

_SECTIONS = {
    "trial": ("shank_csv", "back_csv", "l_shank", "l_back", "sample_rate_hz", "back_offset_s"),
    "ekf": ("g", "q_diag", "r_diag", "init_window"),
    "classifier": ("feature_form", "n_restarts"),
    "thigh": ("w", "sit_deg", "stand_deg"),
    "run": ("seed", "output_dir"),
}


def default_output_dir() -> str:
    return os.environ.get(OUTPUT_DIR_ENV, "sitstand_out")


@dataclass
class PipelineConfig:
    shank_csv: str | None = None
    back_csv: str | None = None
    l_shank: float = DEFAULT_L_SHANK
    l_back: float = DEFAULT_L_BACK
    sample_rate_hz: float = 50.0
    back_offset_s: float = 0.0
    g: float = G
    q_diag: tuple[float, float, float] | None = None
    r_diag: tuple[float, float, float] | None = None
    init_window: int = 10
    feature_form: str = PRODUCT
    n_restarts: int = 10
    w: float = 0.135
    sit_deg: float = 90.0
    stand_deg: float = 0.0
    seed: int = 0
    output_dir: str = dataclasses.field(default_factory=default_output_dir)

    def __post_init__(self):
        self.validate()

    def validate(self):
        if not (0 < self.l_shank < 1.5 and 0 < self.l_back < 1.5):
            raise ConfigError("sensor distances must lie in (0, 1.5) m")
        if not self.sample_rate_hz > 0:
            raise ConfigError("sample_rate_hz must be positive")
        if not self.g > 0:
            raise ConfigError("g must be positive")
        if self.feature_form not in (PRODUCT, ADDITIVE):
            raise ConfigError(f"feature_form must be {PRODUCT!r} or {ADDITIVE!r}")
        if not 0 < self.w <= 1:
            raise ConfigError("w must lie in (0, 1]")
        if self.init_window < 1 or self.n_restarts < 1:
            raise ConfigError("init_window and n_restarts must be at least 1")
        for name in ("q_diag", "r_diag"):
            v = getattr(self, name)
            if v is not None and (len(v) != 3 or min(v) < 0):
                raise ConfigError(f"{name} needs three non-negative values")
        if not 0 <= self.stand_deg < self.sit_deg <= 180:
            raise ConfigError("thigh angles need 0 <= stand_deg < sit_deg <= 180")

    def ekf_config(self, l: float) -> EkfConfig:
        try:
            return EkfConfig(
                l=l,
                dt=1.0 / self.sample_rate_hz,
                g=self.g,
                q=None if self.q_diag is None else np.diag(self.q_diag),
                r=None if self.r_diag is None else np.diag(self.r_diag),
                init_window=self.init_window,
            )
        except SitStandError as exc:
            raise ConfigError(str(exc)) from exc

    def replace(self, **changes) -> "PipelineConfig":
        changes = {k: v for k, v in changes.items() if v is not None}
        return dataclasses.replace(self, **changes)


def _convert(field_type: str, raw: str, key: str):
    try:
        if "tuple" in field_type:
            vals = tuple(float(x) for x in raw.replace(";", ",").split(",") if x.strip())
            return vals
        if field_type.startswith("int"):
            return int(raw)
        if field_type.startswith("float"):
            return float(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc


def read_config_overrides(path) -> dict:
    """Parse an INI config file into PipelineConfig field overrides."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    types = {f.name: str(f.type) for f in dataclasses.fields(PipelineConfig)}
    out = {}
    for section in parser.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"{path}: unknown section [{section}]")
        for key, raw in parser.items(section):
            if key not in _SECTIONS[section]:
                raise ConfigError(f"{path}: unknown key {key!r} in [{section}]")
            out[key] = _convert(types[key], raw.strip(), key)
    return out


def load_config(path=None, **flags) -> PipelineConfig:
    """Flags first, then the config file on top (file values win)."""
    try:
        cfg = PipelineConfig(**{k: v for k, v in flags.items() if v is not None})
        if path is not None:
            cfg = cfg.replace(**read_config_overrides(path))
            cfg.validate()
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg
