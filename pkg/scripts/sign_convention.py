"""Which resolvent sign makes the lifted Mobius maps automorphisms?

For each sign, reports the worst relation residual of the lifted automorphism at
core points, the pullback pairing error, the vacuum-image norm error and Gram
deviation of the implementing unitary, and the defect identity. The sign with small residuals everywhere is the default.
"""
import argparse

import numpy as np

from unirel import families as fam
from unirel import fock as F
from unirel.characters import core_subspaces, random_core_point
from unirel.mobius import (DEFAULT_SIGN, SIGNS, defect_residual, implementing_unitary, lift_to_Au, mobius_data,
                           pullback_residual, automorphism_residual)


def measure(sign, rng, samples):
    th = pull = norm = gram = defect = 0.0
    for rel in (fam.identity(), fam.u2(), fam.u3(), fam.u_a_lambda(0, np.exp(0.7j))):
        fk = F.build(rel, 4)
        sub = core_subspaces(rel)
        for _ in range(samples):
            lifted = lift_to_Au(fk, rel, random_core_point(sub, rng, radius=0.7), sign=sign)
            th = max(th, automorphism_residual(fk, lifted.composed.images_e, lifted.composed.images_f))
    free = F.free_fock(2, 12)
    for _ in range(samples):
        data = mobius_data(fam.random_ball_point(2, rng, 0.3))
        pull = max(pull, pullback_residual(data, fam.random_ball_point(2, rng, 0.6), sign=sign))
        imp = implementing_unitary(free, data, 3, sign=sign)
        norm = max(norm, abs(imp.xi0_norm - 1))
        gram = max(gram, imp.gram_deviation)
        defect = max(defect, defect_residual(F.free_fock(2, 6), data, sign=sign))
    return th, pull, norm, gram, defect


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--samples", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    print(f"{'sign':>6} {'automorphism':>13} {'pullback':>10} {'|xi0| - 1':>10} {'Gram':>10} {'defect':>10}")
    for sign in SIGNS:
        row = measure(sign, np.random.default_rng(args.seed), args.samples)
        print(f"{sign:>6} {row[0]:13.2e}" + "".join(f" {x:10.2e}" for x in row[1:]))
    print(f"default: {DEFAULT_SIGN}")


if __name__ == "__main__":
    main()
