"""Restart success rate of the product Procrustes search: subspace start versus Haar-random start."""
import argparse
import time

import numpy as np

from unirel import families as fam
from unirel.config import SearchConfig
from unirel.equivalence import procrustes_search
from unirel.relations import product_conjugate


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--pairs", type=int, default=10)
    p.add_argument("--restarts", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    print(f"{'dims':>5} {'init':>9} {'success':>8} {'max residual':>14} {'seconds':>8}")
    for dims in [(2, 2), (2, 3), (3, 3)]:
        for init in ("subspace", "random"):
            rng = np.random.default_rng(args.seed)
            wins, best, start = 0, 0.0, time.perf_counter()
            for _ in range(args.pairs):
                rel = fam.random_relation(*dims, rng)
                v = product_conjugate(rel, fam.random_unitary(dims[0], rng), fam.random_unitary(dims[1], rng))
                res = procrustes_search(rel, v, SearchConfig(restarts=args.restarts, init=init), run_all=True)
                wins += res.successes
                best = max(best, res.residual)
            rate = wins / (args.pairs * args.restarts)
            print(f"{dims[0]}x{dims[1]:<3} {init:>9} {rate:8.1%} {best:14.2e} {time.perf_counter() - start:8.2f}")


if __name__ == "__main__":
    main()
