"""Sweep alpha = 1/k for the extremizer and write the sharpness table and plot.

    python3 scripts/sharpness_sweep.py --out results/sharpness
"""
import argparse
import math
from pathlib import Path

from dyadmax.cli import rows_to_csv
from dyadmax.extremizer import SHARPNESS_COLUMNS, sharpness_report
from dyadmax.scalars import bellman_three_on_surface
from dyadmax.svg import loglog_svg


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=float, default=2.0)
    ap.add_argument("--q", type=float, default=1.5)
    ap.add_argument("--f", type=float, default=1.0)
    ap.add_argument("--A", type=float, default=1.2)
    ap.add_argument("--ks", default="4,16,64,256,1024")
    ap.add_argument("--out", default="results/sharpness")
    args = ap.parse_args()

    ks = [int(k) for k in args.ks.split(",")]
    rows = sharpness_report(args.p, args.q, args.f, args.A, ks)
    target = bellman_three_on_surface(args.p, args.q, args.f, args.A)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "sharpness.csv").write_text(rows_to_csv(rows, SHARPNESS_COLUMNS))
    gaps = [abs(r["MTp_integral"] - target) for r in rows]
    (out / "value_gap.svg").write_text(
        loglog_svg(ks, gaps, "k (alpha = 1/k)", "|z^p F(alpha) - target|",
                   f"p={args.p:g} q={args.q:g} f={args.f:g} A={args.A:g}"))

    print(f"target omega_q^p F = {target:.15g}")
    print(f"{'k':>6} {'value':>18} {'rel gap':>10} {'rank M':>7}")
    for r, g in zip(rows, gaps):
        print(f"{r['k']:>6} {r['MTp_integral']:>18.12g} {g / target:>10.3e} {r['rank_M']:>7}")
    # slope of the gap in log-log: about -1 means the gap scales like alpha
    for (k0, g0), (k1, g1) in zip(zip(ks, gaps), zip(ks[1:], gaps[1:])):
        print(f"  order estimate {k0}->{k1}: {math.log(g1 / g0) / math.log(k1 / k0):+.3f}")


if __name__ == "__main__":
    main()
