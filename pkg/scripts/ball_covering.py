"""Covering the unit ball: truncation radius vs eps, and net size vs dimension."""
import argparse

import numpy as np

from fmnc import mnc
from fmnc.metric import build_fnorm
from fmnc.space import make_space


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eps", type=float, default=0.5)
    ap.add_argument("--step", type=float, default=0.25)
    ap.add_argument("--max-dim", type=int, default=5)
    args = ap.parse_args()
    d2 = build_fnorm(make_space("c-grid", 2, 2), "gauge")
    B = mnc.ball_grid(d2, np.zeros(2), 1.0, 1 / 16)
    print("unbounded budget, ball grid in 2D")
    for bottom in (0.5, 0.25, 0.125, 0.0625):
        grid = mnc.geometric_grid(2.0, bottom)
        b = mnc.alpha_bounds(d2, B, grid, None)
        print(f"  finest eps {min(grid):.4f}  upper {b.upper:.4f}  centres {len(b.net.centers)}")
    print(f"greedy net size of the unit ball at eps={args.eps}")
    rows = mnc.ball_covering_trend(lambda d: build_fnorm(make_space("c-grid", d, 1), "gauge"),
                                   range(1, args.max_dim + 1), args.eps, args.step)
    for r in rows:
        print(f"  dim {r['dim']}  grid points {r['points']:>6}  net size {r['net_size']}")


if __name__ == "__main__":
    main()
