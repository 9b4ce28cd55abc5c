"""Tabulate a policy's analytic and simulated errors over a budget grid.

For one instance, walks a grid of conference-error targets, builds the
matching per-instance policy, and reports both the closed-form errors
and a seeded Monte Carlo estimate.

Example:
    python3 scripts/tradeoff_table.py --sigma2 1.0 --a2 2.0 --n 100000
"""

import argparse

import numpy as np

from privcal import (
    Infeasible,
    Instance,
    ReviewerProfile,
    ScorePair,
    per_instance_errors,
    simulate_instance,
)
from privcal.mechanism import alg1_policy, alg3_policy


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--a1", type=float, default=1.0)
    parser.add_argument("--b1", type=float, default=0.0)
    parser.add_argument("--a2", type=float, default=1.0)
    parser.add_argument("--b2", type=float, default=1.0)
    parser.add_argument("--sigma2", type=float, default=0.0)
    parser.add_argument("--s1", type=float, default=0.5)
    parser.add_argument("--s2", type=float, default=1.0)
    parser.add_argument("--steps", type=int, default=11)
    parser.add_argument("--n", type=int, default=0, help="replicates (0 = analytic only)")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    inst = Instance(
        ReviewerProfile.affine(args.a1, args.b1),
        ReviewerProfile.affine(args.a2, args.b2),
        args.sigma2,
        ScorePair(args.s1, args.s2),
    )
    build = alg1_policy if inst.noiseless else alg3_policy

    header = f"{'target':>8}  {'q1':>8}  {'q2':>8}  {'ec':>9}  {'ea':>9}"
    if args.n:
        header += f"  {'ec_mc':>9}  {'ea_mc':>9}"
    print(header)
    for target in np.linspace(0.0, 1.0, args.steps):
        pol = build(inst, float(target))
        if isinstance(pol, Infeasible):
            print(f"{target:8.3f}  infeasible (min ec {pol.min_feasible_ec:.6f})")
            continue
        err = per_instance_errors(inst, pol)
        line = (
            f"{target:8.3f}  {pol.q1:8.4f}  {pol.q2:8.4f}  "
            f"{err.ec:9.6f}  {err.ea:9.6f}"
        )
        if args.n:
            sim = simulate_instance(inst, pol, args.n, args.seed)
            line += f"  {sim.empirical.ec:9.6f}  {sim.empirical.ea:9.6f}"
        print(line)


if __name__ == "__main__":
    main()
