"""Run the reviewer-calibration benefit study and print its table.

Example:
    python3 scripts/calibration_study.py --iterations 50 --seed 1
"""

import argparse

from privcal import StudyConfig, run_calibration_study
from privcal.simlab import STUDY_METHODS


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n-papers", type=int, default=100)
    parser.add_argument("--n-reviewers", type=int, default=100)
    parser.add_argument("--reviews-per-paper", type=int, default=3)
    parser.add_argument(
        "--noise-variances", type=float, nargs="+", default=[0.25, 0.5, 1.0]
    )
    parser.add_argument("--iterations", type=int, default=100)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    cfg = StudyConfig(
        n_papers=args.n_papers,
        n_reviewers=args.n_reviewers,
        reviews_per_paper=args.reviews_per_paper,
        noise_variances=tuple(args.noise_variances),
        iterations=args.iterations,
        seed=args.seed,
    )
    result = run_calibration_study(cfg)
    print(
        f"{'variance':>8}  {'method':>18}  {'kendall_tau':>16}  {'messy_middle':>16}"
    )
    for var in cfg.noise_variances:
        for method in STUDY_METHODS:
            cell = result.cells[(method, var)]
            print(
                f"{var:8.3f}  {method:>18}  "
                f"{cell.mean_kendall_tau:.4f} +/- {cell.se_kendall_tau:.4f}  "
                f"{cell.mean_messy_middle:.4f} +/- {cell.se_messy_middle:.4f}"
            )
    if result.degenerate_std_count:
        print(f"degenerate reviewer deviations replaced: {result.degenerate_std_count}")


if __name__ == "__main__":
    main()
