"""Recovered transition durations and rank tests between transition types and noise levels.

    python scripts/timing_analysis.py --trials 30
"""
import argparse
import warnings

import numpy as np

from sitstand.config import PipelineConfig
from sitstand.evaluation import DEFAULT_ACCEL_SD, DEFAULT_GYRO_SD
from sitstand.labels import SIT_TO_STAND, STAND_TO_SIT
from sitstand.metrics import bonferroni, mann_whitney_u, timing_stats
from sitstand.model_sim import sample_profile, simulate_trial
from sitstand.pipeline import estimate_kinematics
from sitstand.transition_classifier import SequenceWarning


def durations(n_trials, seed, noise_factor):
    rng = np.random.default_rng(seed)
    true_d = {SIT_TO_STAND: [], STAND_TO_SIT: []}
    est_d = {SIT_TO_STAND: [], STAND_TO_SIT: []}
    for i in range(n_trials):
        profile = sample_profile(
            rng, noise_accel_sd=noise_factor * DEFAULT_ACCEL_SD, noise_gyro_sd=noise_factor * DEFAULT_GYRO_SD
        )
        truth, rec = simulate_trial(profile, seed=seed + i)
        est = estimate_kinematics(rec, PipelineConfig(seed=i))
        for store, segs in ((true_d, truth.segments), (est_d, est.segments)):
            for k, v in timing_stats(segs).durations.items():
                store[k] += v
    return true_d, est_d


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=30)
    ap.add_argument("--seed", type=int, default=5)
    args = ap.parse_args()
    warnings.simplefilter("ignore", SequenceWarning)

    pvals, names = [], []
    for nf in (1.0, 3.0):
        true_d, est_d = durations(args.trials, args.seed, nf)
        print(f"noise x{nf:g}")
        for label in (SIT_TO_STAND, STAND_TO_SIT):
            t, e = np.array(true_d[label]), np.array(est_d[label])
            print(f"  {label:<11} true {t.mean():.3f} +/- {t.std(ddof=1):.3f} s   "
                  f"detected {e.mean():.3f} +/- {e.std(ddof=1):.3f} s  (n={e.size})")
        mw = mann_whitney_u(est_d[SIT_TO_STAND], est_d[STAND_TO_SIT])
        pvals.append(mw.p_value)
        names.append(f"x{nf:g} SitToStand vs StandToSit")
    for name, p, adj in zip(names, pvals, bonferroni(pvals)):
        print(f"{name}: p = {p:.4g}, Bonferroni-adjusted {adj:.4g}")


if __name__ == "__main__":
    main()
