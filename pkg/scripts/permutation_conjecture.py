"""Does product unitary equivalence of permutation matrices coincide with product conjugacy?

For every pair of distinct product-conjugacy classes with nm <= 6, runs the
numerical decision on class representatives. An Equivalent verdict would be a
counterexample; Undecided pairs are inconclusive.
"""
import argparse
import itertools

from unirel.config import SearchConfig
from unirel.equivalence import decide_numeric
from unirel.perms import format_cycles, perm_matrix, permutation_classes
from unirel.relations import validate


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--max-nm", type=int, default=6)
    p.add_argument("--restarts", type=int, default=8)
    args = p.parse_args()
    config = SearchConfig(restarts=args.restarts, max_iter=200)
    for n in range(1, args.max_nm + 1):
        for m in range(1, args.max_nm // n + 1):
            reps = [c[0] for c in permutation_classes(n, m)]
            counts = {}
            for p1, p2 in itertools.combinations(reps, 2):
                verdict = decide_numeric(validate(n, m, perm_matrix(p1, n, m)), validate(n, m, perm_matrix(p2, n, m)),
                                         config)
                counts[verdict.status] = counts.get(verdict.status, 0) + 1
                if verdict.equivalent:
                    print(f"  counterexample ({n},{m}): {format_cycles(p1, n, m)} ~ {format_cycles(p2, n, m)}")
            print(f"({n},{m}) {len(reps)} classes: " + ", ".join(f"{k} {v}" for k, v in sorted(counts.items())))


if __name__ == "__main__":
    main()
