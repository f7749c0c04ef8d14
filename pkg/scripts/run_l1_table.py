"""Desk-scale l1 Student-t table: IRPNM vs proximal gradient for d in {20, 40}.

    python scripts/run_l1_table.py --out-dir results/l1 --trials 5
"""

import argparse

from irpnm.bench.experiment import run_experiment
from irpnm.bench.generators import ExperimentSpec


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out-dir", default="results/l1")
    ap.add_argument("--n", type=int, default=4096)
    ap.add_argument("--trials", type=int, default=5)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    print(f"{'d':>4} {'solver':>6} {'Fval':>16} {'r(x)':>10} {'time(s)':>8} {'order':>6}")
    for d in (20.0, 40.0):
        spec = ExperimentSpec(family="l1_studentt", n=args.n, d=d, trials=args.trials,
                              solvers=("irpnm", "pg"))
        summary = run_experiment(spec, f"{args.out_dir}/d{int(d)}", jobs=args.jobs)
        for name, s in summary["solvers"].items():
            order = s["mean_order"]
            print(f"{d:4.0f} {name:>6} {s['Fval']:16.10f} {s['r(x)']:10.2e} {s['time(s)']:8.2f} "
                  f"{'n/a' if order is None else f'{order:6.2f}':>6}")
    print(f"outputs in {args.out_dir}")


if __name__ == "__main__":
    main()
