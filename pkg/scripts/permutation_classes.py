"""Count product-conjugacy classes of permutation relation matrices for small (n, m)."""
import argparse
import time

from unirel.errors import BudgetExceeded
from unirel.perms import format_cycles, permutation_classes


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--max-nm", type=int, default=6)
    p.add_argument("--show", action="store_true", help="list a representative of every class")
    args = p.parse_args()
    print(f"{'n':>2} {'m':>2} {'classes':>8} {'seconds':>8}")
    for n in range(1, args.max_nm + 1):
        for m in range(1, args.max_nm // n + 1):
            start = time.perf_counter()
            try:
                classes = permutation_classes(n, m)
            except BudgetExceeded as exc:
                print(f"{n:>2} {m:>2} skipped: {exc}")
                continue
            print(f"{n:>2} {m:>2} {len(classes):>8} {time.perf_counter() - start:8.2f}")
            if args.show:
                for c in classes:
                    print(f"      {format_cycles(c[0], n, m):<30} size {len(c)}")


if __name__ == "__main__":
    main()
