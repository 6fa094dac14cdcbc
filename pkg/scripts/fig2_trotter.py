"""Trotter error bounds for a single bosonic mode, their log-log slopes and the ECD sandwich."""
import argparse
import sys
import time

from liebounds.experiments import ExperimentConfig, fit_loglog_slope, run_experiment, trotter_sandwich


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/trotter_compare.csv")
    ap.add_argument("--sandwich-out", default="results/trotter_sandwich.csv")
    ap.add_argument("--no-sandwich", action="store_true")
    args = ap.parse_args()
    t0 = time.perf_counter()
    cfg = ExperimentConfig("trotter_compare")
    table = run_experiment(cfg)
    table.write(args.out)
    ours = fit_loglog_slope(table, "L", "ours")
    becker = fit_loglog_slope(table, "L", "becker")
    print(f"wrote {args.out}; slope ours={ours:.4f} becker={becker:.4f} "
          f"({time.perf_counter() - t0:.1f} s)")
    ok = abs(ours + 1) <= 0.05 and abs(becker + 0.5) <= 0.05
    if not args.no_sandwich:
        sw = trotter_sandwich(cfg)
        sw.write(args.sandwich_out)
        held = all(r[1] <= r[2] + 1e-6 for r in sw.rows)
        print(f"wrote {args.sandwich_out}; lower bound below ECD bound at every L: {held}")
        ok = ok and held
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
