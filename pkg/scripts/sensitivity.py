"""How segmentation quality depends on simulator posture angles, transition speed and feature form.

The product feature is proportional to both segment angles, so with the
standing posture calibrated to zero it fades out on the standing side of every
transition. This sweep shows how much of the labelled span is lost as a
function of the standing angles, the transition speed and the feature form.

    python scripts/sensitivity.py --trials 20
"""
import argparse
import itertools

from sitstand.config import PipelineConfig
from sitstand.evaluation import run_cohort, summarize


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--noise-factor", type=float, default=1.0)
    args = ap.parse_args()

    stand_angles = [(0.0, 0.0), (0.05, 0.05), (-0.1, -0.1)]
    speeds = [0.08, 0.135, 0.2]
    forms = ["product", "additive"]
    print(f"{'stand (S,B)':>13} {'w':>6} {'feature':>9} {'count':>7} {'med.bnd':>8} {'acc %':>7}")
    for stand, w, form in itertools.product(stand_angles, speeds, forms):
        scores = run_cohort(
            args.trials,
            args.seed,
            args.noise_factor,
            PipelineConfig(feature_form=form),
            stand_angles=stand,
            transition_speed_w=w,
        )
        s = summarize(scores)
        print(
            f"{str(stand):>13} {w:>6.3f} {form:>9} {s.count_matches:>3}/{s.n_trials:<3} "
            f"{s.median_boundary_error:>8.1f} {100 * s.mean_accuracy:>7.2f}"
        )


if __name__ == "__main__":
    main()
