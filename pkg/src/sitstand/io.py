"""CSV interchange formats and ingestion onto a common uniform timebase.

Formats (UTF-8, LF, floats written with 17 significant digits):

* IMU stream, one file per sensor: ``t,ax,ay,az,gx,gy,gz`` (s, m/s^2, rad/s)
* kinematics (truth or estimate): ``t,theta_S,omega_S,alpha_S,theta_T,...,alpha_B``
  with an optional ``label`` column, followed by the same quantities in degrees
  (``theta_S_deg``, ...)
* binary segmentation: ``start_idx,end_idx,start_t,end_t,label``
* labelled segments: ``start_t,end_t,label,duration_s``
"""
from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .errors import FileError, ParseError, RejectedInputError
from .labels import ALL_LABELS, StateSegment
from .model_sim import (
    BACK,
    SHANK,
    THIGH,
    GroundTruth,
    ImuStream,
    Kinematics,
    SensorPlacement,
    TrialRecording,
)

IMU_COLUMNS = ("t", "ax", "ay", "az", "gx", "gy", "gz")
SEGMENT_KEYS = (("S", SHANK), ("T", THIGH), ("B", BACK))
KIN_COLUMNS = ("t",) + tuple(f"{q}_{k}" for k, _ in SEGMENT_KEYS for q in ("theta", "omega", "alpha"))
BINARY_COLUMNS = ("start_idx", "end_idx", "start_t", "end_t", "label")
LABELLED_COLUMNS = ("start_t", "end_t", "label", "duration_s")
MIN_OVERLAP_S = 1.0


def fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def write_rows(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def read_table(path, required, numeric=None):
    """Read a headed CSV; returns dict column -> list, numeric columns as floats."""
    path = Path(path)
    if not path.is_file():
        raise FileError(f"no such file: {path}")
    numeric = set(required if numeric is None else numeric)
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ParseError("file is empty", path, 1) from None
        missing = [c for c in required if c not in header]
        if missing:
            raise ParseError(f"missing columns {missing} in header {header}", path, 1)
        cols = {h: [] for h in header}
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(row)}", path, lineno)
            for h, v in zip(header, row):
                v = v.strip()
                if h in numeric:
                    try:
                        fv = float(v)
                    except ValueError:
                        raise ParseError(f"column {h!r}: {v!r} is not a number", path, lineno) from None
                    if not math.isfinite(fv):
                        raise ParseError(f"column {h!r}: non-finite value {v!r}", path, lineno)
                    cols[h].append(fv)
                else:
                    cols[h].append(v)
    return cols


def write_imu_csv(path, stream: ImuStream):
    rows = np.column_stack([stream.t, stream.accel, stream.gyro])
    write_rows(path, IMU_COLUMNS, rows.tolist())


def read_imu_csv(path) -> ImuStream:
    cols = read_table(path, IMU_COLUMNS)
    t = np.array(cols["t"])
    if t.size == 0:
        raise ParseError("no samples", path)
    bad = np.flatnonzero(np.diff(t) <= 0)
    if bad.size:
        raise RejectedInputError(f"{path}: timestamps not strictly increasing at line {bad[0] + 3}")
    accel = np.column_stack([cols[c] for c in ("ax", "ay", "az")])
    gyro = np.column_stack([cols[c] for c in ("gx", "gy", "gz")])
    return ImuStream(t, accel, gyro)


def _resample_stream(stream: ImuStream, grid: np.ndarray, offset: float, period: float) -> ImuStream:
    t = stream.t + offset
    if t.size == grid.size and np.allclose(t, grid, rtol=0.0, atol=1e-9 * period):
        return ImuStream(grid, stream.accel, stream.gyro)
    data = np.column_stack([stream.accel, stream.gyro])
    out = np.column_stack([np.interp(grid, t, data[:, j]) for j in range(6)])
    return ImuStream(grid, out[:, :3], out[:, 3:])


def resample_pair(shank: ImuStream, back: ImuStream, sample_rate_hz: float = 50.0, back_offset_s: float = 0.0):
    """Linearly resample both streams onto a uniform grid spanning their overlap.

    ``back_offset_s`` is added to the back timestamps before alignment.
    """
    if not sample_rate_hz > 0:
        raise RejectedInputError("sample rate must be positive")
    period = 1.0 / sample_rate_hz
    start = max(shank.t[0], back.t[0] + back_offset_s)
    end = min(shank.t[-1], back.t[-1] + back_offset_s)
    if end - start < MIN_OVERLAP_S:
        raise RejectedInputError(f"streams overlap for {max(end - start, 0):.3f} s, need at least {MIN_OVERLAP_S} s")
    n = int(math.floor((end - start) / period + 1e-9)) + 1
    grid = start + np.arange(n) * period
    return _resample_stream(shank, grid, 0.0, period), _resample_stream(back, grid, back_offset_s, period)


def ingest(
    shank_path,
    back_path,
    l_shank: float,
    l_back: float,
    sample_rate_hz: float = 50.0,
    back_offset_s: float = 0.0,
) -> TrialRecording:
    shank, back = resample_pair(read_imu_csv(shank_path), read_imu_csv(back_path), sample_rate_hz, back_offset_s)
    return TrialRecording(
        shank, back, SensorPlacement(l_shank, SHANK), SensorPlacement(l_back, BACK), sample_rate_hz
    )


def write_recording(directory, rec: TrialRecording, shank_name="shank_imu.csv", back_name="back_imu.csv"):
    directory = Path(directory)
    write_imu_csv(directory / shank_name, rec.shank_stream)
    write_imu_csv(directory / back_name, rec.back_stream)
    return directory / shank_name, directory / back_name


def write_kinematics_csv(path, t, segments: dict[str, Kinematics], labels=None):
    """Unified kinematics table; ``segments`` maps Shank/Thigh/Back to kinematics."""
    t = np.asarray(t, dtype=float)
    arrays = []
    for _, name in SEGMENT_KEYS:
        kin = segments[name]
        arrays += [kin.theta, kin.omega, kin.alpha]
    data = np.column_stack([t] + arrays)
    deg = np.degrees(np.column_stack(arrays))
    header = list(KIN_COLUMNS)
    if labels is not None:
        header.append("label")
    header += [c + "_deg" for c in KIN_COLUMNS[1:]]
    rows = []
    for i in range(t.size):
        row = data[i].tolist()
        if labels is not None:
            row.append(str(labels[i]))
        row += deg[i].tolist()
        rows.append(row)
    write_rows(path, header, rows)


def read_kinematics_csv(path):
    """Returns (t, {Shank/Thigh/Back: Kinematics}, labels or None)."""
    cols = read_table(path, KIN_COLUMNS, numeric=[c for c in KIN_COLUMNS] + [c + "_deg" for c in KIN_COLUMNS[1:]])
    t = np.array(cols["t"])
    kin = {}
    for key, name in SEGMENT_KEYS:
        kin[name] = Kinematics(
            np.array(cols[f"theta_{key}"]), np.array(cols[f"omega_{key}"]), np.array(cols[f"alpha_{key}"])
        )
    labels = None
    if "label" in cols:
        labels = np.array(cols["label"], dtype=str)
        bad = [lab for lab in set(labels.tolist()) if lab not in ALL_LABELS]
        if bad:
            raise ParseError(f"unknown labels {sorted(bad)}", path)
    return t, kin, labels


def write_truth_csv(path, truth: GroundTruth):
    write_kinematics_csv(path, truth.t, {SHANK: truth.shank, THIGH: truth.thigh, BACK: truth.back})


def write_binary_segments_csv(path, segments, t):
    t = np.asarray(t, dtype=float)
    period = (t[1] - t[0]) if t.size > 1 else 0.0
    rows = [
        (s.start_idx, s.end_idx, t[s.start_idx], t[s.end_idx - 1] + period, s.label) for s in segments
    ]
    write_rows(path, BINARY_COLUMNS, rows)


def read_binary_segments_csv(path, sample_rate_hz: float = 50.0) -> list[StateSegment]:
    cols = read_table(path, BINARY_COLUMNS, numeric=("start_idx", "end_idx", "start_t", "end_t"))
    return [
        StateSegment.from_indices(int(a), int(b), lab, sample_rate_hz)
        for a, b, lab in zip(cols["start_idx"], cols["end_idx"], cols["label"])
    ]


def write_labelled_segments_csv(path, segments, t):
    t = np.asarray(t, dtype=float)
    period = (t[1] - t[0]) if t.size > 1 else 0.0
    rows = [(t[s.start_idx], t[s.end_idx - 1] + period, s.label, s.duration_s) for s in segments]
    write_rows(path, LABELLED_COLUMNS, rows)


def read_labelled_segments_csv(path, t) -> list[StateSegment]:
    """Map labelled time spans back onto sample indices of timebase ``t``."""
    cols = read_table(path, LABELLED_COLUMNS, numeric=("start_t", "end_t", "duration_s"))
    t = np.asarray(t, dtype=float)
    period = (t[1] - t[0]) if t.size > 1 else 1.0
    out = []
    for a, b, lab, dur in zip(cols["start_t"], cols["end_t"], cols["label"], cols["duration_s"]):
        if lab not in ALL_LABELS:
            raise ParseError(f"unknown label {lab!r}", path)
        i0 = int(np.searchsorted(t, a - 0.5 * period))
        i1 = int(np.searchsorted(t, b - 0.5 * period))
        out.append(StateSegment(i0, i1, lab, dur))
    return out
