"""Compare the two fermionic linear optics bounds along a one-parameter family in SO(2m)."""
import argparse
import sys

from liebounds.experiments import ExperimentConfig, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--m", type=int, default=2)
    ap.add_argument("--out", default="results/so_compare.csv")
    args = ap.parse_args()
    table = run_experiment(ExperimentConfig("so_compare", m=args.m))
    path = table.write(args.out)
    below = all(r[1] < r[2] for r in table.rows)
    print(f"wrote {path} ({len(table.rows)} rows); ours below oszmaniec everywhere: {below}")
    return 0 if below else 1


if __name__ == "__main__":
    sys.exit(main())
