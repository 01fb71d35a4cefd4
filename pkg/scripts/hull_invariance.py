"""Net transfer to hull samples on seeded clouds: the bound comparison per cloud."""
import argparse

from fmnc.metric import build_fnorm
from fmnc.suites import RunConfig, hull_clouds, transfer_one


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--clouds", type=int, default=10)
    ap.add_argument("--eps", type=float, default=0.1)
    args = ap.parse_args()
    cfg = RunConfig(seed=args.seed, cloud_count=args.clouds)
    print(f"{'cloud':>5}{'n':>4}{'dim':>4}{'r':>3}{'upper M':>9}{'co radius':>11}{'gap':>8}"
          f"{'lower M':>9}{'lower co':>10}")
    for i, M in hull_clouds(cfg):
        q = transfer_one(build_fnorm(M.space, "gauge"), M, args.eps, cfg.max_centers, cfg.resolution)
        print(f"{i:>5}{len(M):>4}{M.space.dim:>4}{q['resolution']:>3}{q['upper_M']:>9.3f}{q['co_radius']:>11.3f}"
              f"{q['grid_gap']:>8.3f}{q['lower_M']:>9.3f}{q['lower_co']:>10.3f}")


if __name__ == "__main__":
    main()
