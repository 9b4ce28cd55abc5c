"""Sweep score pairs and print per-instance Pareto frontiers.

Example:
    python3 scripts/frontier_sweep.py --a2 1.5 --b2 0.8 --sigma2 0.5 \
        --s2 1.0 --s1-min -2 --s1-max 2 --steps 21
"""

import argparse

import numpy as np

from privcal import (
    Instance,
    ReviewerProfile,
    ScorePair,
    SegmentKind,
    frontier,
)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--a1", type=float, default=1.0)
    parser.add_argument("--b1", type=float, default=0.0)
    parser.add_argument("--a2", type=float, default=1.0)
    parser.add_argument("--b2", type=float, default=1.0)
    parser.add_argument("--sigma2", type=float, default=0.0)
    parser.add_argument("--s2", type=float, default=1.0, help="fixed second score")
    parser.add_argument("--s1-min", type=float, default=-2.0)
    parser.add_argument("--s1-max", type=float, default=2.0)
    parser.add_argument("--steps", type=int, default=21)
    args = parser.parse_args()

    r1 = ReviewerProfile.affine(args.a1, args.b1)
    r2 = ReviewerProfile.affine(args.a2, args.b2)
    print(f"{'s1':>8}  {'kind':>7}  {'ec_min':>10}  {'ec_max':>10}  {'ea_max':>10}")
    for s1 in np.linspace(args.s1_min, args.s1_max, args.steps):
        inst = Instance(r1, r2, args.sigma2, ScorePair(float(s1), args.s2))
        seg = frontier(inst)
        kind = "point" if seg.kind is SegmentKind.POINT else "segment"
        print(
            f"{s1:8.3f}  {kind:>7}  {seg.start.ec:10.6f}  "
            f"{seg.end.ec:10.6f}  {seg.end.ea:10.6f}"
        )


if __name__ == "__main__":
    main()
