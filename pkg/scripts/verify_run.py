"""Run the randomized inequality net over every tree family and value law.

Writes one JSON report per family and prints the worst scaled residual of
each check.  Exit status is 1 if any check failed anywhere.
"""
import argparse
import sys
from pathlib import Path

from dyadmax.verify import TREE_FAMILIES, VALUE_LAWS, VerificationPlan, run_plan


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="results/verify")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    failed = False
    for family in TREE_FAMILIES:
        depth = (10, 10) if family == "binary" else (3, 8)
        plan = VerificationPlan(seed=args.seed, samples=args.samples, tree=family,
                                min_depth=depth[0], max_depth=depth[1], value_laws=VALUE_LAWS)
        report = run_plan(plan)
        (out / f"{family}.json").write_text(report.to_json())
        failed |= not report.ok
        print(f"[{family}] failures={report.failures}")
        for name, c in sorted(report.checks.items()):
            print(f"  {name:9s} runs={c.runs:6d} worst={c.worst_scaled:+.3e}  [{c.inequality}]")
    sys.exit(1 if failed else 0)


if __name__ == "__main__":
    main()
