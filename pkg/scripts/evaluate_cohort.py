"""Score the full pipeline on random synthetic cohorts at several noise levels.

    python scripts/evaluate_cohort.py --trials 50 --noise-factors 1 3 --json cohort.json
"""
import argparse
import json

from sitstand.evaluation import run_cohort, summarize


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=50)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--noise-factors", type=float, nargs="+", default=[0.0, 1.0, 3.0])
    ap.add_argument("--json", help="write summaries here")
    args = ap.parse_args()

    rows = {}
    print(f"{'noise':>6} {'count':>7} {'fail':>5} {'med.bnd':>8} {'acc %':>7} {'bin %':>7} {'mislab':>7} "
          f"{'nrmse th_S':>10} {'nrmse om_S':>10} {'nrmse th_T':>10}")
    for nf in args.noise_factors:
        s = summarize(run_cohort(args.trials, args.seed, nf))
        rows[str(nf)] = s.to_dict()
        print(
            f"{nf:>6.1f} {s.count_matches:>3}/{s.n_trials:<3} {s.failures:>5} {s.median_boundary_error:>8.1f} "
            f"{100 * s.mean_accuracy:>7.2f} {100 * s.mean_binary_accuracy:>7.2f} {s.mislabelled_transitions:>7} "
            f"{s.mean_nrmse.get('shank_theta', float('nan')):>10.4f} "
            f"{s.mean_nrmse.get('shank_omega', float('nan')):>10.4f} "
            f"{s.mean_nrmse.get('thigh_theta', float('nan')):>10.4f}"
        )
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2, sort_keys=True)


if __name__ == "__main__":
    main()
