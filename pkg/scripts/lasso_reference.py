"""Compute ISTA reference objectives for the seeded lasso instances.

Runs 10^6 ISTA iterations (step 1/||A||^2) on every instance, batched, and
prints the final objective values. An instance leaves the batch early only
when ISTA reaches a bitwise fixed point, after which further iterations
cannot change it. The printed values are the frozen oracle in
tests/test_acceptance.py.

    python scripts/lasso_reference.py --seeds 20
"""

import argparse
import time

import numpy as np

from irpnm.bench.generators import gen_lasso

LASSO_SEED0 = 1000


def ista_batch(A, b, lam, iters):
    L = np.linalg.norm(A, 2, axis=(1, 2)) ** 2
    AtA = np.einsum("kmi,kmj->kij", A, A) / L[:, None, None]
    Atb = np.einsum("kmi,km->ki", A, b) / L[:, None]
    thr = (lam / L)[:, None]
    x = np.zeros((A.shape[0], A.shape[2]))
    active = np.arange(A.shape[0])
    for it in range(iters):
        xa = x[active]
        v = xa - np.einsum("kij,kj->ki", AtA[active], xa) + Atb[active]
        xn = np.sign(v) * np.maximum(np.abs(v) - thr[active], 0.0)
        moved = np.any(xn != xa, axis=1)
        x[active] = xn
        active = active[moved]
        if active.size == 0:
            break
    return x, it + 1


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--iters", type=int, default=1_000_000)
    args = ap.parse_args()
    insts = [gen_lasso(LASSO_SEED0 + s) for s in range(args.seeds)]
    A = np.stack([i.problem.smooth.A.matrix for i in insts])
    b = np.stack([i.problem.smooth.b for i in insts])
    lam = np.array([i.lam for i in insts])
    t0 = time.perf_counter()
    x, iters = ista_batch(A, b, lam, args.iters)
    print(f"# {iters} iterations, {time.perf_counter() - t0:.1f} s")
    for inst, xi in zip(insts, x):
        print(f"    {inst.seed}: {inst.problem.objective(xi)!r},")


if __name__ == "__main__":
    main()
