"""Scaling and additive margins for every shipped space and metric mode."""
import argparse

import numpy as np

from fmnc import metric as mt
from fmnc.space import shipped_spaces
from fmnc.suites import slug


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=1000)
    ap.add_argument("--depth", type=int, default=8)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    lams = 2.0 ** -np.arange(5)
    print(f"{'space':<22}{'mode':<10}{'additive':>12}{'scaling':>12}{'capped':>12}")
    for space in shipped_spaces():
        for mode in mt.MODES:
            if mode != "standard" and not space.locally_convex:
                continue
            d = mt.build_fnorm(space, mode, depth=args.depth)
            add = mt.audit_additive(d, mt.sample_pairs(space, args.samples, rng, k=4)).max_margin
            sc = mt.audit_scaling(d, mt.sample_pairs(space, args.samples, rng, scale=0.6), lams)
            cap = sc.regions["capped"]["max_margin"]
            print(f"{slug(space):<22}{mode:<10}{add:>12.3g}{sc.max_margin:>12.3g}"
                  f"{'-' if cap is None else format(cap, '.3g'):>12}")


if __name__ == "__main__":
    main()
