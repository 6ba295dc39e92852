import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import seeds
from unirel import families as fam
from unirel import fock as F
from unirel import mobius as M
from unirel.characters import core_subspaces, random_core_point, variety_test
from unirel.errors import DenominatorVanishes, NotInCoreInterior, NotInOpenBall, RelationMismatch

ball_dims = st.integers(1, 4)


def test_data_at_origin():
    d = M.mobius_data(np.zeros(3))
    assert d.x0 == 1 and not d.eta.any()
    assert np.array_equal(d.X1, np.eye(3)) and np.array_equal(d.X, np.eye(4))


def test_data_half():
    d = M.mobius_data([0.5])
    assert d.x0 == pytest.approx(2 / np.sqrt(3), abs=1e-15)
    assert d.eta[0] == pytest.approx(1 / np.sqrt(3), abs=1e-15)
    assert abs(d.eta[0]) ** 2 == pytest.approx(d.x0 ** 2 - 1, abs=1e-15)


@given(seeds, ball_dims, st.floats(0, 0.999))
def test_u1n_identities(seed, n, r):
    alpha = fam.random_ball_point(n, np.random.default_rng(seed), 1.0)
    alpha = alpha / max(np.linalg.norm(alpha), 1e-300) * r
    res = M.mobius_data(alpha).identity_residuals()
    scale = 1 / (1 - r * r)  # x0^2
    assert max(res.values()) <= 1e-12 * max(1.0, scale)


def test_not_in_open_ball():
    with pytest.raises(NotInOpenBall):
        M.mobius_data([0.6, 0.8])
    with pytest.raises(NotInOpenBall):
        M.ball_map(M.mobius_data([0.1]), [1.5])


def test_denominator_vanishes():
    Z = np.array([[1.0, -1.0], [0.0, 1.0]])
    with pytest.raises(DenominatorVanishes):
        M.ball_map_matrix(Z, [1.0])


def test_ball_map_basics():
    rng = np.random.default_rng(0)
    a = fam.random_ball_point(3, rng, 0.8)
    d = M.mobius_data(a)
    assert np.abs(M.ball_map(d, np.zeros(3)) - a).max() < 1e-15
    lam = fam.random_ball_point(3, rng)
    assert np.array_equal(M.ball_map(M.mobius_data(np.zeros(3)), lam), lam)


@given(seeds, ball_dims)
def test_ball_map_round_trip_and_group_action(seed, n):
    rng = np.random.default_rng(seed)
    d1 = M.mobius_data(fam.random_ball_point(n, rng, 0.9))
    d2 = M.mobius_data(fam.random_ball_point(n, rng, 0.9))
    lam = fam.random_ball_point(n, rng, 0.95)
    out = M.ball_map(d1, lam)
    assert np.linalg.norm(out) < 1
    assert np.linalg.norm(M.ball_map(d1.inverse(), out) - lam) <= 1e-10
    assert np.abs(np.linalg.inv(d1.X) - d1.inverse().X).max() < 1e-10
    both = M.ball_map_matrix(d1.X @ d2.X, lam)
    assert np.linalg.norm(M.ball_map(d1, M.ball_map(d2, lam)) - both) <= 1e-10


def test_theta_identity_at_origin():
    fk = F.free_fock(2, 3)
    auto = M.theta_on_generators(fk, M.mobius_data(np.zeros(2)))
    for img, gen in zip(auto.images_e, fk.L_e):
        assert F.residual(img, gen) == 0


def test_resolvent_series_inverts():
    fk = F.free_fock(2, 4)
    d = M.mobius_data([0.3, 0.2j])
    for sign, s in M.SIGNS.items():
        res = M.resolvent(fk, d, sign)
        base = F.FockOperator(fk, d.x0 * np.eye(fk.dim) + s * fk.left(d.eta).dense(), 0, 1)
        assert np.abs((base @ res).dense() - np.eye(fk.dim)).max() < 1e-14
        v = np.random.default_rng(1).standard_normal(fk.dim)
        assert np.abs(M.apply_resolvent(fk, d, v, sign) - res.dense() @ v).max() < 1e-14


@settings(max_examples=15)
@given(seeds)
def test_character_pullback(seed):
    rng = np.random.default_rng(seed)
    d = M.mobius_data(fam.random_ball_point(2, rng, 0.4))
    lam = fam.random_ball_point(2, rng, 0.4)
    _, tail = M.pullback_degree(d, lam)
    assert tail <= 1e-11
    assert M.pullback_residual(d, lam) <= 1e-10


def test_minus_sign_breaks_pullback():
    rng = np.random.default_rng(3)
    d = M.mobius_data(fam.random_ball_point(2, rng, 0.5))
    lam = fam.random_ball_point(2, rng, 0.6)
    assert M.pullback_residual(d, lam, sign="minus") > 1e-3


@pytest.mark.parametrize("t", [0.0, 0.3, -0.7 + 0.2j, 0.5j])
def test_scalar_symbol_matches_operator(t):
    # n = 1: <Theta(L) xi0, w_t> is the symbol evaluated at conj(t)
    d = M.mobius_data([0.4 - 0.1j])
    fk = F.free_fock(1, 60)
    w = np.array([np.conj(t) ** k for k in range(fk.dim)])
    got = np.vdot(w, M.theta_vacuum_image(fk, d, [1.0]))
    # scalar functional calculus: (conj(eta) + X1 s) / (x0 + eta s) at s = t
    assert abs(got - M.scalar_symbol(d, t)) < 1e-12


def test_generator_images_are_contractions():
    fk = F.free_fock(2, 6)
    auto = M.theta_on_generators(fk, M.mobius_data([0.3, -0.2j]))
    ok, norm = auto.is_contraction()
    assert ok and norm > 0.5


def test_implementing_unitary_at_origin():
    fk = F.free_fock(2, 3)
    U = M.unitary_matrix(fk, M.mobius_data(np.zeros(2)))
    assert np.array_equal(U, np.eye(fk.dim))


@pytest.mark.parametrize("seed", range(3))
def test_implementing_unitary_orthonormal(seed):
    rng = np.random.default_rng(seed)
    a = fam.random_ball_point(2, rng, 1.0)
    a *= 0.3 / np.linalg.norm(a)
    fk = F.free_fock(2, 12)
    d = M.mobius_data(a)
    imp = M.implementing_unitary(fk, d, 3)
    assert imp.gram_deviation <= min(1e-5, M.gram_tolerance(0.3, 12, 3))
    assert abs(imp.xi0_norm - 1) <= 1e-6
    # U L_i = Theta(L_i) U on the computed columns
    images = M.theta_images(fk, d)
    for col, word in enumerate(imp.words):
        if len(word) < 3:
            for i in range(2):
                nxt = imp.words.index((i,) + word)
                assert np.abs(images[i].dense() @ imp.columns[:, col] - imp.columns[:, nxt]).max() < 1e-12


def test_defect_identity():
    fk = F.free_fock(2, 5)
    d = M.mobius_data([0.2, 0.4j])
    assert M.defect_residual(fk, d) < 1e-12
    assert M.defect_residual(fk, d, sign="minus") > 1e-3
    with pytest.raises(ValueError):
        M.defect_residual(F.build(fam.identity(), 2), d)


LIFT_CASES = [fam.identity(), fam.u2(), fam.u3(), fam.u_a_lambda(0, np.exp(1j)), fam.u_a_lambda(0, -1)]


@settings(max_examples=12)
@given(seeds, st.integers(0, len(LIFT_CASES) - 1))
def test_lifted_relations_at_core_points(seed, which):
    rel = LIFT_CASES[which]
    rng = np.random.default_rng(seed)
    fk = F.build(rel, 4)
    z, w = random_core_point(core_subspaces(rel), rng, radius=0.8)
    lifted = M.lift_to_Au(fk, rel, (z, w))
    for auto in (lifted.theta_z, lifted.theta_w, lifted.composed, lifted.compose("wz")):
        assert M.automorphism_residual(fk, auto.images_e, auto.images_f) <= 1e-9
    assert M.adjoint_relation_residual(fk, lifted.theta_z.images_e) <= 1e-9
    assert M.eta_commutator(fk, lifted.theta_z.data_e) <= 1e-10
    assert M.corechar_orbit_check(fk, rel, (z, w)).max_deviation <= 1e-9


def test_lift_examples():
    fk = F.build(fam.u2(), 4)
    lifted = M.lift_to_Au(fk, fam.u2(), ([0, 0], [0.4, 0]))
    assert M.automorphism_residual(fk, lifted.theta_w.images_e, lifted.theta_w.images_f) <= 1e-9
    ident = M.lift_to_Au(fk, fam.u2(), ([0, 0], [0, 0]))
    for img, gen in zip(ident.composed.images_e + ident.composed.images_f, fk.L_e + fk.L_f):
        assert F.residual(img, gen) == 0


@pytest.mark.parametrize("rel,point,tol", [
    (fam.identity(), ([0.3, 0], [0, 0.2]), 1e-10),
    (fam.u_a_lambda(0, np.exp(1j)), ([0.5, 0], [0.5, 0]), 1e-9),
    (fam.u2(), ([0, 0], [0, 0]), 0.0),
])
def test_orbit_check_examples(rel, point, tol):
    rep = M.corechar_orbit_check(F.build(rel, 4), rel, point)
    assert rep.max_deviation <= tol


def test_lift_rejects_non_core_and_boundary_points():
    fk = F.build(fam.u2(), 3)
    with pytest.raises(NotInCoreInterior):
        M.lift_to_Au(fk, fam.u2(), ([0.5, 0], [0, 0]))
    with pytest.raises(NotInCoreInterior):
        M.lift_to_Au(fk, fam.u2(), ([0, 0], [1.0, 0]))
    with pytest.raises(RelationMismatch):
        M.lift_to_Au(fk, fam.u3(), ([0.2, 0], [0, 0]))


def test_bigraded_composition_preserves_relations():
    # Psi_{A,B} o Theta_{z,w} for u = I, where every (A, B) commutes with u
    rel = fam.identity()
    fk = F.build(rel, 4)
    rng = np.random.default_rng(2)
    A, B = fam.random_unitary(2, rng), fam.random_unitary(2, rng)
    lifted = M.lift_to_Au(fk, rel, ([0.3, 0.1], [0.2j, 0]))
    e = [sum((A[i, j] * lifted.composed.images_e[j] for j in range(2)), start=0 * fk.identity())
         for i in range(2)]
    f = [sum((B[k, l] * lifted.composed.images_f[l] for l in range(2)), start=0 * fk.identity())
         for k in range(2)]
    assert M.automorphism_residual(fk, e, f) <= 1e-9


def test_default_sign_is_the_one_that_passes():
    # select the sign empirically: the pullback, Gram and defect checks must all hold
    rng = np.random.default_rng(9)
    fk = F.free_fock(2, 10)
    passing = []
    for sign in M.SIGNS:
        ok = True
        for _ in range(3):
            d = M.mobius_data(fam.random_ball_point(2, rng, 0.3))
            ok &= M.pullback_residual(d, fam.random_ball_point(2, rng, 0.5), sign=sign) < 1e-10
            ok &= M.implementing_unitary(fk, d, 2, sign=sign).gram_deviation < 1e-4
            ok &= M.defect_residual(F.free_fock(2, 4), d, sign=sign) < 1e-12
        if ok:
            passing.append(sign)
    assert passing == [M.DEFAULT_SIGN]
