"""Residual tables for the invariant suites surfaced by ``unirel verify``.

Each suite returns a list of :class:`Check` rows; a row passes when its
residual is at most the tolerance it names.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from . import fock as F
from .characters import (character_vector, offdiagonal_residual, core_subspaces, dimfix_check,
                         random_core_point, random_variety_point, variety_test)
from .config import DEFAULT_TOLERANCES
from .equivalence import intertwining_fock_unitary, intertwining_residual
from .families import random_ball_point, random_unitary
from .mobius import (ball_map, corechar_orbit_check, adjoint_relation_residual, eta_commutator,
                     lift_to_Au, mobius_data, automorphism_residual)
from .relations import RelationMatrix

SUITES = ("relations", "commutant", "characters", "core", "mobius", "intertwiner")


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    residual: float
    tolerance: float

    @property
    def passed(self):
        return bool(self.residual <= self.tolerance)

    def as_dict(self):
        out = asdict(self)
        out["passed"] = self.passed
        return out


def _sum(ops):
    acc = ops[0]
    for op in ops[1:]:
        acc = acc + op
    return acc


def relation_residuals(fk):
    """Forward and swapped relation residuals, maximized over generator pairs."""
    n, m, u = fk.n, fk.m, fk.u
    fwd = swp = 0.0
    for i in range(n):
        for j in range(m):
            rhs = _sum([u[i * m + j, k * m + l] * (fk.L_f[l] @ fk.L_e[k]) for k in range(n) for l in range(m)])
            fwd = max(fwd, F.residual(fk.L_e[i] @ fk.L_f[j], rhs))
    for k in range(n):
        for l in range(m):
            rhs = _sum([np.conj(u[i * m + j, k * m + l]) * (fk.L_e[i] @ fk.L_f[j])
                        for i in range(n) for j in range(m)])
            swp = max(swp, F.residual(fk.L_f[l] @ fk.L_e[k], rhs))
    return fwd, swp


def isometry_residual(fk, family):
    ident = fk.identity()
    return max((F.residual(g.H @ g, ident) for g in family), default=0.0)


def orthogonality_residual(fk, family):
    return max((F.residual(a.H @ b) for x, a in enumerate(family) for y, b in enumerate(family) if x != y),
               default=0.0)


def defect_residual(fk):
    """Sum_l L_{f_l} L_{f_l}^* against I - P (P the projection onto f-free words)."""
    if fk.m == 0:
        return 0.0
    total = _sum([g @ g.H for g in fk.L_f])
    return F.residual(total, fk.identity() - fk.f_free_projection())


def commutant_residual(fk):
    return max((F.residual(a @ b - b @ a) for a in fk.L_e + fk.L_f for b in fk.R_e + fk.R_f), default=0.0)


def suite_relations(rel, fk, rng, tol):
    fwd, swp = relation_residuals(fk)
    t = tol.relation
    return [
        Check("relations", "relation L_e L_f", fwd, t),
        Check("relations", "swapped relation L_f L_e", swp, t),
        Check("relations", "isometry L_e", isometry_residual(fk, fk.L_e), t),
        Check("relations", "isometry L_f", isometry_residual(fk, fk.L_f), t),
        Check("relations", "range orthogonality L_e", orthogonality_residual(fk, fk.L_e), t),
        Check("relations", "range orthogonality L_f", orthogonality_residual(fk, fk.L_f), t),
        Check("relations", "defect sum L_f L_f^* = I - P", defect_residual(fk), t),
    ]


def suite_commutant(rel, fk, rng, tol):
    t = tol.relation
    return [
        Check("commutant", "[L_x, R_y]", commutant_residual(fk), t),
        Check("commutant", "isometry R_e", isometry_residual(fk, fk.R_e), t),
        Check("commutant", "isometry R_f", isometry_residual(fk, fk.R_f), t),
    ]


def suite_characters(rel, fk, rng, tol, samples=10):
    """Variety points: the variety residual and the eigen-relation L_x^* psi = conj(x) psi."""
    low = fk.degree_slice(fk.N - 1).stop
    var = eig = 0.0
    found = 0
    for _ in range(samples):
        pt = random_variety_point(rel, rng, radius=0.8)
        if pt is None:
            continue
        found += 1
        p = variety_test(rel, *pt)
        var = max(var, p.variety_residual)
        psi = character_vector(fk, p).vector
        for g, c in list(zip(fk.L_e, p.z)) + list(zip(fk.L_f, p.w)):
            eig = max(eig, float(np.max(np.abs((g.matrix.conj().T @ psi)[:low] - np.conj(c) * psi[:low]))))
    rows = [Check("characters", "variety residual", var, tol.variety),
            Check("characters", "character vector eigen-relation", eig, tol.relation)]
    if found == 0:
        rows = [Check("characters", "variety points found (none: trivial variety)", 0.0, tol.variety)]
    return rows


def suite_core(rel, fk, rng, tol, samples=20):
    sub = core_subspaces(rel, tol.rank)
    core = nest = 0.0
    dimfix_fail = 0
    for _ in range(samples):
        z, w = random_core_point(sub, rng)
        p = variety_test(rel, z, w)
        core = max(core, p.core_residual)
        if not dimfix_check(rel, p).holds:
            dimfix_fail += 1
        lam = rng.standard_normal(rel.n) + 1j * rng.standard_normal(rel.n)
        mu = rng.standard_normal(rel.m) + 1j * rng.standard_normal(rel.m)
        nest = max(nest, offdiagonal_residual(rel, p, lam, mu))
    return [
        Check("core", f"core residual (dim Z = {sub.dim_z}, dim W = {sub.dim_w})", core, tol.variety),
        Check("core", "dimension bound failures on core points", float(dimfix_fail), 0.0),
        Check("core", "nest representation off-diagonal residual", nest, tol.nest),
    ]


def suite_mobius(rel, fk, rng, tol, samples=3):
    ident = round_trip = 0.0
    for dim in (rel.n, rel.m):
        a = random_ball_point(dim, rng, 0.9)
        data = mobius_data(a)
        ident = max(ident, max(data.identity_residuals().values()))
        lam = random_ball_point(dim, rng, 0.9)
        round_trip = max(round_trip, float(np.linalg.norm(ball_map(data.inverse(), ball_map(data, lam)) - lam)))
    sub = core_subspaces(rel, tol.rank)
    th = dc = eta = orb = 0.0
    for _ in range(samples):
        z, w = random_core_point(sub, rng, radius=0.7)
        lifted = lift_to_Au(fk, rel, (z, w))
        th = max(th, automorphism_residual(fk, lifted.composed.images_e, lifted.composed.images_f))
        dc = max(dc, adjoint_relation_residual(fk, lifted.theta_z.images_e))
        eta = max(eta, eta_commutator(fk, lifted.theta_z.data_e))
        orb = max(orb, corechar_orbit_check(fk, rel, (z, w)).max_deviation)
    return [
        Check("mobius", "X identities and X^* J X = J", ident, tol.x_identities),
        Check("mobius", "ball map round trip", round_trip, tol.ball_round_trip),
        Check("mobius", "lifted automorphism relation", th, tol.automorphism),
        Check("mobius", "adjoint relation with L_f^*", dc, tol.automorphism),
        Check("mobius", "[L_eta, L_f]", eta, tol.relation),
        Check("mobius", "vacuum character of lifted generators", orb, tol.automorphism),
    ]


def suite_intertwiner(rel, fk, rng, tol):
    star = F.build(rel.adjoint(), fk.N)
    W = F.reversal_unitary(fk, star)
    Wd = W.dense()
    unit = float(np.max(np.abs(Wd.conj().T @ Wd - np.eye(fk.dim))))
    inter = max([F.residual(star.R_e[i] @ W - W @ fk.L_e[i]) for i in range(fk.n)]
                + [F.residual(star.R_f[j] @ W - W @ fk.L_f[j]) for j in range(fk.m)])
    A, B = random_unitary(rel.n, rng), random_unitary(rel.m, rng)
    K = np.kron(A, B)
    fv = F.build(RelationMatrix(rel.n, rel.m, K.conj().T @ rel.u @ K), fk.N)
    WAB = intertwining_fock_unitary(fk, fv, A, B)
    d = WAB.dense()
    return [
        Check("intertwiner", "reversal W unitarity", unit, tol.relation),
        Check("intertwiner", "R_x W = W L_x", inter, tol.relation),
        Check("intertwiner", "W_{A,B} unitarity", float(np.max(np.abs(d.conj().T @ d - np.eye(fk.dim)))),
              tol.intertwiner),
        Check("intertwiner", "W_{A,B} intertwining", intertwining_residual(fk, fv, A, B, WAB), tol.intertwiner),
    ]


_RUNNERS = {
    "relations": suite_relations,
    "commutant": suite_commutant,
    "characters": suite_characters,
    "core": suite_core,
    "mobius": suite_mobius,
    "intertwiner": suite_intertwiner,
}


def run_suites(rel, suite="all", N=4, seed=0, tol=DEFAULT_TOLERANCES, memory_cap_mb=F.MEMORY_CAP_MB):
    names = SUITES if suite == "all" else (suite,)
    unknown = [s for s in names if s not in _RUNNERS]
    if unknown:
        raise ValueError(f"unknown suite {unknown[0]!r}; choose from {', '.join(SUITES)} or all")
    fk = F.build(rel, N, memory_cap_mb)
    rng = np.random.default_rng(seed)
    rows = []
    for name in names:
        rows.extend(_RUNNERS[name](rel, fk, rng, tol))
    return rows
