"""Estimated convergence order versus rho on one seeded l1 Student-t instance.

Writes curves.csv (rho, k, err, r) for plotting log10 errors against k.

    python scripts/rho_sensitivity.py --out results/rho_curves.csv
"""

import argparse
import csv
from pathlib import Path

from irpnm.bench.generators import ExperimentSpec, generate
from irpnm.diagnostics import convergence_report
from irpnm.solver import SolverConfig, solve


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="results/rho_curves.csv")
    ap.add_argument("--d", type=float, default=20.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--rhos", type=float, nargs="+", default=[0.1, 0.3, 0.5, 0.7])
    args = ap.parse_args()

    inst = generate(ExperimentSpec(family="l1_studentt", d=args.d, seed=args.seed))
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["rho", "k", "err", "r"])
        for rho in args.rhos:
            _, rec = solve(inst.problem, SolverConfig(rho=rho), inst.x_init)
            rep = convergence_report(rec, inst.problem)
            for k, (e, r) in enumerate(zip(rep.errors, rec.column("r"))):
                w.writerow([rho, k, e, r])
            print(f"rho={rho:.2f} {rec.status} iters={rec.iterations} "
                  f"order={rep.estimated_order} {rep.stationarity.kind}")


if __name__ == "__main__":
    main()
