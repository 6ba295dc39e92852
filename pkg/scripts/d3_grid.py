"""Verdict table for the one-parameter family u(a, lambda) with three-dimensional fixed space.

Pairs are equivalent exactly when a = b and mu is lambda or its conjugate; the
table marks any verdict disagreeing with that rule.
"""
import argparse
import itertools

import numpy as np

from unirel import families as fam
from unirel.config import SearchConfig
from unirel.equivalence import decide_numeric


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--a", type=float, nargs="+", default=[0.0, 0.2, 0.4, 0.55, 0.7])
    p.add_argument("--phase", type=float, nargs="+", default=[0.7, -0.7, 2.0, -2.0, np.pi])
    p.add_argument("--restarts", type=int, default=8)
    args = p.parse_args()
    grid = [(a, np.exp(1j * t)) for a in args.a for t in args.phase]
    counts, wrong = {}, 0
    for (a, lam), (b, mu) in itertools.combinations_with_replacement(grid, 2):
        verdict = decide_numeric(fam.u_a_lambda(a, lam), fam.u_a_lambda(b, mu), SearchConfig(restarts=args.restarts))
        expected = a == b and min(abs(lam - mu), abs(lam - np.conj(mu))) < 1e-12
        counts[verdict.status] = counts.get(verdict.status, 0) + 1
        if verdict.status == "Undecided" or verdict.equivalent != expected:
            wrong += 1
            print(f"mismatch: a={a} lambda={lam:.3f} b={b} mu={mu:.3f} -> {verdict.status}")
    print(f"{len(grid)} grid points, {sum(counts.values())} pairs: "
          + ", ".join(f"{k} {v}" for k, v in sorted(counts.items())) + f"; mismatches {wrong}")


if __name__ == "__main__":
    main()
