"""Command-line entry point: ``sitstand {simulate,estimate,segment,metrics,fit-w}``.

Every subcommand writes into an output directory (``--out``, else the config
file's ``output_dir``, else ``$SITSTAND_OUTPUT_DIR``, else ``sitstand_out``).
Errors map to exit codes: parse 3, config 4, insufficient data 5, numerical 6,
file 7, rejected input 8, degenerate input 9, ambiguity 10.
"""
from __future__ import annotations

import argparse
import configparser
import json
import sys
from pathlib import Path

import numpy as np

from . import io
from .config import PipelineConfig, load_config
from .ekf import default_r
from .errors import ConfigError, InsufficientDataError, RejectedInputError, SitStandError
from .labels import FOUR_STATES, TRANSITIONS, segments_from_labels
from .metrics import (
    bland_altman,
    classification_accuracy,
    grand_average,
    mann_whitney_u,
    nrmse,
    posture_stats,
    rmse,
    timing_stats,
    transition_curves,
)
from .model_sim import BACK, SHANK, THIGH, G, TrajectoryProfile, sample_profile, simulate_trial
from .pipeline import estimate_kinematics, segment_recording
from .thigh import fit_w

DEFAULT_ACCEL_SD = float(np.sqrt(default_r(G)[0, 0]))
DEFAULT_GYRO_SD = float(np.sqrt(default_r(G)[2, 2]))

SIM_FILES = ("shank_imu.csv", "back_imu.csv", "truth.csv", "truth_segments.csv")
PROFILE_KEYS = {
    "cycles": int,
    "sit_s": float,
    "stand_s": float,
    "sit_to_stand_s": float,
    "stand_to_sit_s": float,
    "transition_speed_w": float,
    "sit_angles": "pair",
    "stand_angles": "pair",
    "noise_accel_sd": float,
    "noise_gyro_sd": float,
    "random": "bool",
    "schedule": "schedule",
}


# ---------------------------------------------------------------- helpers


def _out_dir(args, cfg: PipelineConfig | None = None) -> Path:
    if getattr(args, "out", None):
        return Path(args.out)
    if cfg is not None:
        return Path(cfg.output_dir)
    return Path(PipelineConfig().output_dir)


def _dump_json(path: Path, obj):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _config_from_args(args) -> PipelineConfig:
    flags = {
        "shank_csv": getattr(args, "shank", None),
        "back_csv": getattr(args, "back", None),
        "l_shank": getattr(args, "l_shank", None),
        "l_back": getattr(args, "l_back", None),
        "sample_rate_hz": getattr(args, "sample_rate", None),
        "back_offset_s": getattr(args, "back_offset", None),
        "feature_form": getattr(args, "feature_form", None),
        "n_restarts": getattr(args, "n_restarts", None),
        "w": getattr(args, "w", None),
        "sit_deg": getattr(args, "sit_deg", None),
        "seed": getattr(args, "seed", None),
        "output_dir": getattr(args, "out", None),
    }
    return load_config(getattr(args, "config", None), **flags)


def _recording(cfg: PipelineConfig):
    if not cfg.shank_csv or not cfg.back_csv:
        raise ConfigError("both shank and back CSV paths are required (--shank/--back or [trial] in --config)")
    return io.ingest(cfg.shank_csv, cfg.back_csv, cfg.l_shank, cfg.l_back, cfg.sample_rate_hz, cfg.back_offset_s)


# ---------------------------------------------------------------- simulate


def _parse_pair(raw, key):
    vals = [float(v) for v in raw.split(",")]
    if len(vals) != 2:
        raise ValueError(f"{key} needs two comma-separated values")
    return tuple(vals)


def _parse_schedule(raw):
    out = []
    for item in raw.split(","):
        label, _, dur = item.strip().partition(":")
        out.append((label.strip(), float(dur)))
    return tuple(out)


def read_profile(path) -> dict:
    """``[profile]`` section of an INI file as keyword overrides."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"profile file not found: {path}")
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if parser.sections() != ["profile"]:
        raise ConfigError(f"{path}: expected a single [profile] section")
    out = {}
    for key, raw in parser.items("profile"):
        kind = PROFILE_KEYS.get(key)
        if kind is None:
            raise ConfigError(f"{path}: unknown profile key {key!r}")
        try:
            if kind == "pair":
                out[key] = _parse_pair(raw, key)
            elif kind == "schedule":
                out[key] = _parse_schedule(raw)
            elif kind == "bool":
                out[key] = parser.getboolean("profile", key)
            else:
                out[key] = kind(raw)
        except ValueError as exc:
            raise ConfigError(f"{path}: bad value for {key}: {raw!r} ({exc})") from exc
    return out


def build_profile(args) -> TrajectoryProfile:
    opts = {
        "cycles": args.cycles,
        "noise_accel_sd": 0.0 if args.zero_noise else args.noise_accel_sd,
        "noise_gyro_sd": 0.0 if args.zero_noise else args.noise_gyro_sd,
        "random": args.random,
    }
    if args.profile:
        opts.update(read_profile(args.profile))
        if args.zero_noise:
            opts["noise_accel_sd"] = opts["noise_gyro_sd"] = 0.0
    shape = {
        k: opts[k]
        for k in ("transition_speed_w", "sit_angles", "stand_angles", "noise_accel_sd", "noise_gyro_sd")
        if k in opts
    }
    try:
        if "schedule" in opts:
            return TrajectoryProfile(opts["schedule"], **shape)
        if opts["random"]:
            rng = np.random.default_rng([args.seed, 1])
            return sample_profile(rng, n_cycles=opts["cycles"], **shape)
        timing = {k: opts[k] for k in ("sit_s", "stand_s", "sit_to_stand_s", "stand_to_sit_s") if k in opts}
        return TrajectoryProfile.cycles(opts["cycles"], **timing, **shape)
    except RejectedInputError as exc:
        raise ConfigError(f"invalid profile: {exc}") from exc


def cmd_simulate(args) -> int:
    profile = build_profile(args)
    truth, rec = simulate_trial(profile, args.sample_rate, args.l_shank, args.l_back, seed=args.seed)
    out = _out_dir(args)
    io.write_recording(out, rec, SIM_FILES[0], SIM_FILES[1])
    io.write_kinematics_csv(
        out / SIM_FILES[2], truth.t, {SHANK: truth.shank, THIGH: truth.thigh, BACK: truth.back}, truth.labels
    )
    io.write_labelled_segments_csv(out / SIM_FILES[3], truth.segments, truth.t)
    print(f"wrote {len(truth)} samples, {sum(s.label in TRANSITIONS for s in truth.segments)} transitions to {out}")
    return 0


# ---------------------------------------------------------------- estimate / segment


def cmd_estimate(args) -> int:
    cfg = _config_from_args(args)
    rec = _recording(cfg)
    est = estimate_kinematics(rec, cfg)
    out = _out_dir(args, cfg)
    io.write_kinematics_csv(out / "estimate.csv", est.t, est.as_dict(), est.labels)
    io.write_labelled_segments_csv(out / "segments.csv", est.segments, est.t)
    n_tr = sum(s.label in TRANSITIONS for s in est.segments)
    print(f"estimated {len(rec)} samples, {n_tr} transitions; wrote {out / 'estimate.csv'}")
    return 0


def cmd_segment(args) -> int:
    cfg = _config_from_args(args)
    rec = _recording(cfg)
    _, _, binary = segment_recording(rec, cfg)
    out = _out_dir(args, cfg)
    io.write_binary_segments_csv(out / "binary_segments.csv", binary.segments, rec.t)
    print(f"{len(binary.transitions)} transitions (threshold {binary.threshold:.6g}); wrote {out / 'binary_segments.csv'}")
    return 0


# ---------------------------------------------------------------- metrics


def _read_pair(estimate_path, truth_path):
    t_est, est, lab_est = io.read_kinematics_csv(estimate_path)
    t_ref, ref, lab_ref = io.read_kinematics_csv(truth_path)
    if t_est.size != t_ref.size:
        raise RejectedInputError(f"estimate has {t_est.size} rows but truth has {t_ref.size}")
    return t_est, est, lab_est, ref, lab_ref


def _error_table(est, ref):
    rows = {}
    for seg in (SHANK, THIGH, BACK):
        rows[seg] = {}
        for q in ("theta", "omega", "alpha"):
            e, r = getattr(est[seg], q), getattr(ref[seg], q)
            try:
                n = nrmse(e, r)
            except SitStandError:
                n = float("nan")
            rows[seg][q] = {"rmse": rmse(e, r), "nrmse": n}
    return rows


def compute_metrics(estimate_path, truth_path, sample_rate_hz: float = 50.0) -> tuple[dict, dict]:
    """Returns (report, grand-average curves keyed by 'Label_Segment')."""
    t, est, lab_est, ref, lab_ref = _read_pair(estimate_path, truth_path)
    report: dict = {"n_samples": int(t.size), "errors": _error_table(est, ref)}
    report["bland_altman"] = {
        seg: bland_altman(est[seg].theta, ref[seg].theta).summary() for seg in (SHANK, THIGH, BACK)
    }
    curves = {}
    if lab_est is not None:
        if lab_ref is not None:
            report["accuracy"] = classification_accuracy(lab_est, lab_ref)
        segs = segments_from_labels(lab_est, sample_rate_hz)
        timing = timing_stats(segs)
        report["timing"] = {"mean": timing.mean, "sd": timing.sd, "count": {k: len(v) for k, v in timing.durations.items()}}
        try:
            mw = mann_whitney_u(timing.durations[TRANSITIONS[0]], timing.durations[TRANSITIONS[1]])
            report["timing"]["mann_whitney"] = {"u": mw.u, "p_value": mw.p_value, "method": mw.method}
        except InsufficientDataError as exc:
            report["timing"]["mann_whitney"] = {"skipped": str(exc)}
        post = posture_stats(lab_est, est[SHANK].theta, est[BACK].theta)
        report["posture"] = post.to_dict()
        for seg in (SHANK, THIGH, BACK):
            for label, items in transition_curves(lab_est, est[seg].theta, sample_rate_hz).items():
                if items:
                    curves[f"{label}_{seg}"] = grand_average(items)
    return report, curves


def format_report(report: dict) -> str:
    lines = [f"samples: {report['n_samples']}"]
    if "accuracy" in report:
        lines.append(f"accuracy: {100 * report['accuracy']:.2f} %")
    lines.append(f"{'segment':<8} {'quantity':<8} {'rmse':>12} {'nrmse':>10}")
    for seg, qs in report["errors"].items():
        for q, v in qs.items():
            lines.append(f"{seg:<8} {q:<8} {v['rmse']:>12.6f} {v['nrmse']:>10.4f}")
    lines.append(f"{'segment':<8} {'mean_diff':>12} {'sd_diff':>12} {'within_2sd':>11}")
    for seg, v in report["bland_altman"].items():
        lines.append(f"{seg:<8} {v['mean_diff']:>12.6f} {v['sd_diff']:>12.6f} {v['pct_within_2sd']:>10.1f}%")
    if "timing" in report:
        for label in TRANSITIONS:
            lines.append(
                f"{label:<11} n={report['timing']['count'][label]:<3d} mean={report['timing']['mean'][label]:.3f} s"
                f" sd={report['timing']['sd'][label]:.3f} s"
            )
    return "\n".join(lines) + "\n"


def cmd_metrics(args) -> int:
    report, curves = compute_metrics(args.estimate, args.truth, args.sample_rate)
    out = _out_dir(args)
    _dump_json(out / "metrics.json", report)
    text = format_report(report)
    (out / "metrics.txt").write_text(text, encoding="utf-8")
    for key in sorted(curves):
        phase, mean, sd = curves[key]
        io.write_rows(out / f"grand_average_{key}.csv", ("phase_pct", "mean", "sd"), np.column_stack([phase, mean, sd]).tolist())
    sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------- fit-w


def cmd_fit_w(args) -> int:
    t, ref, lab_ref = io.read_kinematics_csv(args.truth)[0:3]
    labels = lab_ref
    if args.estimate:
        t_est, _, labels = io.read_kinematics_csv(args.estimate)
        if t_est.size != t.size:
            raise RejectedInputError(f"estimate has {t_est.size} rows but truth has {t.size}")
    if labels is None:
        raise InsufficientDataError("no label column to take transition segments from")
    segs = segments_from_labels(labels, args.sample_rate)
    if not any(s.label in TRANSITIONS for s in segs):
        raise InsufficientDataError("no transitions to fit")
    if any(s.label not in FOUR_STATES for s in segs):
        raise RejectedInputError("labels must be four-state (Sit, Stand, SitToStand, StandToSit)")
    w, err = fit_w(ref[THIGH].theta, segs, args.sample_rate, (args.w_min, args.w_max))
    out = _out_dir(args)
    _dump_json(out / "fit_w.json", {"w": w, "rmse_rad": err, "n_transitions": sum(s.label in TRANSITIONS for s in segs)})
    print(f"w = {w:.6f} per sample (thigh RMSE {err:.6f} rad)")
    return 0


# ---------------------------------------------------------------- parser


def _add_pipeline_flags(p):
    p.add_argument("--config", help="INI config file; its values override flags")
    p.add_argument("--shank", help="shank IMU CSV")
    p.add_argument("--back", help="back IMU CSV")
    p.add_argument("--l-shank", type=float, help="ankle to shank sensor distance (m)")
    p.add_argument("--l-back", type=float, help="hip to back sensor distance (m)")
    p.add_argument("--sample-rate", type=float, help="common resampling rate (Hz)")
    p.add_argument("--back-offset", type=float, help="seconds added to back timestamps")
    p.add_argument("--feature-form", choices=("product", "additive"))
    p.add_argument("--n-restarts", type=int)
    p.add_argument("--w", type=float, help="thigh transition speed per sample")
    p.add_argument("--sit-deg", type=float, help="seated thigh angle (deg)")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sitstand", description="Sit-to-stand kinematics from two IMUs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="synthetic trial: truth plus IMU CSVs")
    p.add_argument("--cycles", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--random", action="store_true", help="random schedule durations drawn from the seed")
    p.add_argument("--zero-noise", action="store_true")
    p.add_argument("--noise-accel-sd", type=float, default=DEFAULT_ACCEL_SD)
    p.add_argument("--noise-gyro-sd", type=float, default=DEFAULT_GYRO_SD)
    p.add_argument("--profile", help="INI file with a [profile] section")
    p.add_argument("--l-shank", type=float, default=0.25)
    p.add_argument("--l-back", type=float, default=0.35)
    p.add_argument("--sample-rate", type=float, default=50.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="full pipeline to a unified kinematics CSV")
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("segment", help="binary stationary/transition segmentation only")
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("metrics", help="compare an estimate against truth")
    p.add_argument("--estimate", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--sample-rate", type=float, default=50.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("fit-w", help="fit the thigh transition speed to a reference")
    p.add_argument("--truth", required=True, help="kinematics CSV with reference thigh angle")
    p.add_argument("--estimate", help="take segment labels from this CSV instead of the truth")
    p.add_argument("--sample-rate", type=float, default=50.0)
    p.add_argument("--w-min", type=float, default=1e-3)
    p.add_argument("--w-max", type=float, default=1.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_fit_w)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SitStandError as exc:
        print(f"sitstand {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
