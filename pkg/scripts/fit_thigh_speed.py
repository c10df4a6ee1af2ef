"""Fit the thigh transition speed w on simulated trials.

Fits against the simulator's thigh angle twice per trial: once with the true
segment labels and once with the labels the pipeline detected, to separate
shape mismatch from segmentation error.

    python scripts/fit_thigh_speed.py --trials 20
"""
import argparse
import warnings

import numpy as np

from sitstand.config import PipelineConfig
from sitstand.evaluation import DEFAULT_ACCEL_SD, DEFAULT_GYRO_SD
from sitstand.model_sim import sample_profile, simulate_trial
from sitstand.pipeline import estimate_kinematics
from sitstand.thigh import fit_w
from sitstand.transition_classifier import SequenceWarning


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--seed", type=int, default=11)
    args = ap.parse_args()
    warnings.simplefilter("ignore", SequenceWarning)

    rng = np.random.default_rng(args.seed)
    truth_fit, detected_fit = [], []
    for i in range(args.trials):
        profile = sample_profile(rng, noise_accel_sd=DEFAULT_ACCEL_SD, noise_gyro_sd=DEFAULT_GYRO_SD)
        truth, rec = simulate_trial(profile, seed=args.seed + i)
        truth_fit.append(fit_w(truth.thigh.theta, truth.segments))
        est = estimate_kinematics(rec, PipelineConfig(seed=i))
        detected_fit.append(fit_w(truth.thigh.theta, est.segments))
    for name, fits in (("true labels", truth_fit), ("detected labels", detected_fit)):
        w = np.array([f[0] for f in fits])
        err = np.degrees([f[1] for f in fits])
        print(f"{name:>16}: w = {w.mean():.4f} +/- {w.std(ddof=1):.4f}, thigh RMSE {err.mean():.2f} deg")


if __name__ == "__main__":
    main()
