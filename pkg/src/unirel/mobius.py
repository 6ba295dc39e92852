"""Mobius automorphisms from U(1, n) acting on the e-generators, and their lifts.

For alpha in the open ball, ``x0 = (1 - |alpha|^2)^{-1/2}``, ``eta = x0 alpha``
and ``X1 = (I + eta eta^*)^{1/2}``.  The generator images are

    Theta(L_zeta) = (x0 I + s L_eta)^{-1} (L_{X1 zeta} + <zeta, eta> I),

with ``<zeta, eta> = sum zeta_i conj(eta_i)`` and ``s = +1`` ("plus") or
``s = -1`` ("minus").  The resolvent is the Neumann series
``x0^{-1} sum_j (-s L_eta / x0)^j``, which terminates on a truncation
because L_eta raises degree.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh

from .characters import variety_test
from .errors import DenominatorVanishes, NotInCoreInterior, NotInOpenBall, RelationMismatch
from .fock import INF, FockOperator, FockWord, free_fock, residual

SIGNS = {"plus": 1.0, "minus": -1.0}
DEFAULT_SIGN = "plus"


@dataclass(frozen=True)
class MobiusData:
    alpha: np.ndarray
    x0: float
    eta: np.ndarray
    X1: np.ndarray
    X: np.ndarray = field(repr=False)

    @property
    def n(self):
        return self.alpha.size

    def inverse(self):
        """Data for -alpha, whose matrix is X^{-1}."""
        return mobius_data(-self.alpha)

    def identity_residuals(self):
        """Residuals of |eta|^2 = x0^2 - 1, X1 eta = x0 eta, X1^2 = I + eta eta^*, X^* J X = J."""
        n = self.n
        eta = self.eta
        J = j_matrix(n)
        return {
            "eta_norm": abs(np.vdot(eta, eta).real - (self.x0 ** 2 - 1)),
            "X1_eta": float(np.max(np.abs(self.X1 @ eta - self.x0 * eta), initial=0.0)),
            "X1_square": float(np.max(np.abs(self.X1 @ self.X1 - np.eye(n) - np.outer(eta, eta.conj())),
                                      initial=0.0)),
            "XJX": float(np.max(np.abs(self.X.conj().T @ J @ self.X - J))),
        }


def j_matrix(n):
    return np.diag(np.concatenate([[1.0], -np.ones(n)]))


def psd_sqrt(a):
    """Square root of a Hermitian positive semidefinite matrix via its spectral decomposition."""
    vals, vecs = eigh(a)
    return (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.conj().T


def mobius_data(alpha):
    alpha = np.atleast_1d(np.asarray(alpha, dtype=complex))
    r2 = float(np.vdot(alpha, alpha).real)
    if not r2 < 1.0:
        raise NotInOpenBall(f"|alpha| = {np.sqrt(r2):.6g} is not < 1")
    n = alpha.size
    x0 = 1.0 / np.sqrt(1.0 - r2)
    eta = x0 * alpha
    X1 = psd_sqrt(np.eye(n) + np.outer(eta, eta.conj()))
    X = np.zeros((n + 1, n + 1), dtype=complex)
    X[0, 0] = x0
    X[0, 1:] = eta.conj()
    X[1:, 0] = eta
    X[1:, 1:] = X1
    return MobiusData(alpha, x0, eta, X1, X)


# --- ball maps ---

def ball_map_matrix(Z, lam, tol=1e-14):
    """theta_Z(lambda) = (Z1 lambda + eta2) / (z0 + <lambda, eta1>) for Z = [[z0, eta1^*], [eta2, Z1]]."""
    lam = np.atleast_1d(np.asarray(lam, dtype=complex))
    if np.linalg.norm(lam) > 1 + 1e-12:
        raise NotInOpenBall(f"|lambda| = {np.linalg.norm(lam):.6g} exceeds 1")
    head = Z[0, 0] + Z[0, 1:] @ lam
    if abs(head) <= tol:
        raise DenominatorVanishes("z0 + <lambda, eta1> vanishes")
    return (Z[1:, 1:] @ lam + Z[1:, 0]) / head


def ball_map(data, lam):
    return ball_map_matrix(data.X, lam)


# --- operators on truncated Fock space ---

def _sign(sign):
    try:
        return SIGNS[sign]
    except KeyError:
        raise ValueError(f"sign convention must be 'plus' or 'minus', got {sign!r}") from None


def _gens(fock, family):
    return fock.L_e if family == "e" else fock.L_f


def _combo(fock, gens, coeffs):
    mat = sp.csr_matrix((fock.dim, fock.dim), dtype=complex)
    for c, g in zip(coeffs, gens):
        if c != 0:
            mat = mat + c * g.matrix
    return mat.tocsr()


def resolvent(fock, data, sign=DEFAULT_SIGN, family="e"):
    """(x0 I + s L_eta)^{-1} as the terminating Neumann series, exact on the truncation."""
    s = _sign(sign)
    step = (-s / data.x0) * _combo(fock, _gens(fock, family), data.eta)
    term = sp.identity(fock.dim, dtype=complex, format="csr")
    total = term.copy()
    for _ in range(fock.N):
        term = (step @ term).tocsr()
        if term.nnz == 0:
            break
        total = total + term
    return FockOperator(fock, (total / data.x0).tocsr(), 0, INF)


def apply_resolvent(fock, data, v, sign=DEFAULT_SIGN, family="e"):
    """Resolvent applied to a vector, by the same series without forming the matrix."""
    s = _sign(sign)
    step = _combo(fock, _gens(fock, family), data.eta)
    term = np.asarray(v, dtype=complex) / data.x0
    total = term.copy()
    for _ in range(fock.N):
        term = (-s / data.x0) * (step @ term)
        if not np.any(term):
            break
        total += term
    return total


@dataclass
class AutoOnFock:
    """Generator images of an automorphism on a truncated Fock space."""

    fock: object
    images_e: list
    images_f: list
    sign: str = DEFAULT_SIGN
    data_e: MobiusData = None
    data_f: MobiusData = None

    def is_contraction(self, tol=1e-10):
        norms = [np.linalg.norm(op.dense(), 2) for op in self.images_e + self.images_f]
        return max(norms, default=0.0) <= 1 + tol, max(norms, default=0.0)


def theta_images(fock, data, sign=DEFAULT_SIGN, family="e"):
    """[Theta(L_{g_1}), ..., Theta(L_{g_n})] for the chosen generator family."""
    gens = _gens(fock, family)
    res = resolvent(fock, data, sign, family)
    ident = fock.identity()
    out = []
    for i in range(len(gens)):
        col = data.X1[:, i]
        inner = FockOperator(fock, _combo(fock, gens, col), 1, 1) + np.conj(data.eta[i]) * ident
        out.append(res @ inner)
    return out


def theta_on_generators(fock, data, sign=DEFAULT_SIGN):
    """Theta_alpha on the e-generators; the f-generators are left fixed."""
    return AutoOnFock(fock, theta_images(fock, data, sign, "e"), list(fock.L_f), sign, data_e=data)


def theta_vacuum_image(fock, data, zeta, sign=DEFAULT_SIGN):
    """Theta(L_zeta) xi_0 computed with vector operations only."""
    zeta = np.asarray(zeta, dtype=complex)
    v = _combo(fock, fock.L_e, data.X1 @ zeta) @ fock.vacuum()
    v = v + np.vdot(data.eta, zeta) * fock.vacuum()
    return apply_resolvent(fock, data, v, sign)


@lru_cache(maxsize=8)
def _free(n, N):
    return free_fock(n, N, memory_cap_mb=512)


def pullback_degree(data, lam, tol_tail=1e-14, max_dim=2 ** 17):
    """Truncation degree for :func:`pullback_residual` and the geometric tail bound it leaves.

    The pairing is a series in r = |alpha| |lambda|; degree N leaves a tail of
    at most r^{N+1} / (1 - r).  N is the smallest degree meeting ``tol_tail``,
    capped so the free Fock space keeps at most ``max_dim`` basis vectors.
    """
    r = float(np.linalg.norm(data.alpha) * np.linalg.norm(lam))
    n = data.n
    cap = 1
    while sum(n ** k for k in range(cap + 2)) <= max_dim and cap < 200:
        cap += 1
    if r == 0:
        return 1, 0.0
    N = 1
    while r ** (N + 1) / (1 - r) > tol_tail and N < cap:
        N += 1
    return N, r ** (N + 1) / (1 - r)


def pullback_residual(data, lam, zeta=None, sign=DEFAULT_SIGN, N=None, tol_tail=1e-14):
    """|phi_lambda(Theta(L_zeta)) - phi_{theta_conj(X)}(lambda)(L_zeta)| maximized over zeta = e_1..e_n.

    phi_lambda(A) is evaluated on free Fock space as <A xi_0, w_lambda> with
    w_lambda the character vector, truncated at the degree chosen by
    :func:`pullback_degree` unless ``N`` is given.
    """
    lam = np.atleast_1d(np.asarray(lam, dtype=complex))
    n = data.n
    if N is None:
        N, _ = pullback_degree(data, lam, tol_tail)
    fock = _free(n, N)
    w = np.zeros(fock.dim, dtype=complex)
    for (k, _), off in fock.offsets.items():
        block = np.ones(1, dtype=complex)
        for _ in range(k):
            block = np.kron(block, np.conj(lam))
        w[off:off + block.size] = block
    mu = ball_map_matrix(np.conj(data.X), lam)
    zetas = np.eye(n) if zeta is None else [np.asarray(zeta, dtype=complex)]
    worst = 0.0
    for z in zetas:
        lhs = np.vdot(w, theta_vacuum_image(fock, data, z, sign))
        worst = max(worst, abs(lhs - mu @ z))
    return float(worst)


def scalar_symbol(data, t, sign=DEFAULT_SIGN):
    """n = 1: the scalar function (conj(eta) + X1 t) / (x0 + s eta t)."""
    s = _sign(sign)
    eta = complex(data.eta[0])
    return (np.conj(eta) + data.X1[0, 0] * t) / (data.x0 + s * eta * t)


# --- the implementing unitary on the free part ---

@dataclass(frozen=True)
class ImplementingData:
    xi0_prime: np.ndarray
    words: list  # e-words (tuples) of degree <= D, in basis order
    columns: np.ndarray  # columns w(V) xi0' in the ambient truncation
    gram_deviation: float
    xi0_norm: float


def _apply_theta(fock, data, i, v, sign):
    inner = _combo(fock, fock.L_e, data.X1[:, i]) @ v + np.conj(data.eta[i]) * v
    return apply_resolvent(fock, data, inner, sign)


def implementing_unitary(fock, data, D, sign=DEFAULT_SIGN):
    """Images U_X xi_w = w(V_1..V_n) xi0' for e-words of degree <= D, plus their Gram deviation.

    The computation uses only L_e, so ``fock`` may be a free Fock space or
    any F(n, m, u) (the images stay in the f-free part).
    """
    xi = apply_resolvent(fock, data, fock.vacuum(), sign)
    words = [()]
    cols = {(): xi}
    for p in range(1, D + 1):
        for w in [w for w in words if len(w) == p - 1]:
            for i in range(fock.n):
                nw = (i,) + w
                cols[nw] = _apply_theta(fock, data, i, cols[w], sign)
                words.append(nw)
    words.sort(key=lambda w: (len(w), w))
    mat = np.column_stack([cols[w] for w in words])
    gram = mat.conj().T @ mat
    dev = float(np.max(np.abs(gram - np.eye(len(words)))))
    return ImplementingData(xi, words, mat, dev, float(np.linalg.norm(xi)))


def gram_tolerance(alpha_norm, N, D, C=10.0):
    return C * alpha_norm ** (N - D)


def unitary_matrix(fock, data, sign=DEFAULT_SIGN):
    """Truncated matrix of U_X on the free Fock space ``fock`` (columns for every word of degree <= N)."""
    impl = implementing_unitary(fock, data, fock.N, sign)
    out = np.zeros((fock.dim, fock.dim), dtype=complex)
    for w, col in zip(impl.words, impl.columns.T):
        out[:, fock.index(FockWord(w, ()))] = col
    return out


def defect_residual(fock, data, sign=DEFAULT_SIGN):
    """||I - sum V_i V_i^* - xi0' xi0'^*|| on the whole truncation.

    Every entry of V V^* only involves intermediate degrees up to the smaller
    of the two outer degrees, so the identity is exact on the truncation.
    """
    if fock.m != 0:
        raise ValueError("defect identity is stated on free Fock space")
    images = theta_images(fock, data, sign)
    total = np.eye(fock.dim, dtype=complex)
    for op in images:
        d = op.dense()
        total -= d @ d.conj().T
    xi = apply_resolvent(fock, data, fock.vacuum(), sign)
    total -= np.outer(xi, xi.conj())
    return float(np.max(np.abs(total)))


# --- lifts to A_u ---

def _check_core_interior(rel, point):
    if not (point.in_core and point.interior):
        raise NotInCoreInterior(
            f"(z, w) must lie in the core and the open balls (core residual {point.core_residual:.2e})")


@dataclass
class LiftedAuto:
    """Theta_{z,w} on F(n, m, u) together with its two factors."""

    fock: object
    point: object
    sign: str
    theta_z: AutoOnFock  # Theta_alpha on e-generators, identity on f
    theta_w: AutoOnFock  # identity on e, Theta_beta on f-generators
    composed: AutoOnFock

    def compose(self, order="zw"):
        """Generator images of theta_z o theta_w ("zw") or theta_w o theta_z ("wz").

        Each factor fixes the other family, and a homomorphism applied to a
        series in one family is the same series in the images, so both orders
        substitute the same generator images.
        """
        first, second = (self.theta_w, self.theta_z) if order == "zw" else (self.theta_z, self.theta_w)
        # apply `first`, then `second` to the resulting expressions
        e = [second.images_e[i] if first.images_e[i] is self.fock.L_e[i] else first.images_e[i]
             for i in range(self.fock.n)]
        f = [second.images_f[j] if first.images_f[j] is self.fock.L_f[j] else first.images_f[j]
             for j in range(self.fock.m)]
        return AutoOnFock(self.fock, e, f, self.sign, self.theta_z.data_e, self.theta_w.data_f)


def lift_to_Au(fock, rel, point, sign=DEFAULT_SIGN):
    """Theta~_z, Theta~_w and Theta_{z,w} for a core point (z, w) in the open balls.

    alpha = conj(z) drives the e-factor, beta = conj(w) the f-factor.
    """
    if fock.rel is None or not np.allclose(fock.u, rel.u, atol=1e-14, rtol=0):
        raise RelationMismatch("Fock space was not built from this relation matrix")
    if not hasattr(point, "in_core"):
        point = variety_test(rel, *point)
    _check_core_interior(rel, point)
    dz = mobius_data(np.conj(point.z))
    dw = mobius_data(np.conj(point.w))
    tz = AutoOnFock(fock, theta_images(fock, dz, sign, "e"), list(fock.L_f), sign, data_e=dz)
    tw = AutoOnFock(fock, list(fock.L_e), theta_images(fock, dw, sign, "f"), sign, data_f=dw)
    lifted = LiftedAuto(fock, point, sign, tz, tw, None)
    lifted.composed = lifted.compose("zw")
    return lifted


def _sum(ops):
    acc = ops[0]
    for op in ops[1:]:
        acc = acc + op
    return acc


def automorphism_residual(fock, images_e, images_f=None):
    """max_{i,j} residual of Theta(L_{e_i}) G_j = sum u_{(i,j),(k,l)} G_l Theta(L_{e_k}) with G = images_f or L_f."""
    f = images_f if images_f is not None else fock.L_f
    n, m, u = fock.n, fock.m, fock.u
    worst = 0.0
    for i in range(n):
        for j in range(m):
            rhs = _sum([u[i * m + j, k * m + l] * (f[l] @ images_e[k]) for k in range(n) for l in range(m)])
            worst = max(worst, residual(images_e[i] @ f[j], rhs))
    return worst


def adjoint_relation_residual(fock, images_e):
    """max_{i,j} residual of L_{f_j}^* Theta(L_{e_i}) = sum u_{(i,l),(k,j)} Theta(L_{e_k}) L_{f_l}^*."""
    n, m, u = fock.n, fock.m, fock.u
    worst = 0.0
    for i in range(n):
        for j in range(m):
            rhs = _sum([u[i * m + l, k * m + j] * (images_e[k] @ fock.L_f[l].H)
                        for k in range(n) for l in range(m)])
            worst = max(worst, residual(fock.L_f[j].H @ images_e[i], rhs))
    return worst


def eta_commutator(fock, data):
    """max_j residual of [L_eta, L_{f_j}]."""
    l_eta = fock.left(data.eta)
    return max((residual(l_eta @ g - g @ l_eta) for g in fock.L_f), default=0.0)


@dataclass(frozen=True)
class OrbitReport:
    deviation_zw: float
    deviation_wz: float
    product_deviation: float

    @property
    def max_deviation(self):
        return max(self.deviation_zw, self.deviation_wz, self.product_deviation)


def corechar_orbit_check(fock, rel, point, sign=DEFAULT_SIGN):
    """Vacuum expectation of Theta_{z,w}(g) against the coordinates of (z, w), for both composition orders.

    alpha_{(0,0)}(A) = <A xi_0, xi_0>; on generators this must return z_i and
    w_j, and on the products Theta(L_{e_i}) Theta(L_{f_j}) it must return z_i w_j.
    """
    lifted = lift_to_Au(fock, rel, point, sign)
    z, w = lifted.point.z, lifted.point.w
    xi = fock.vacuum()

    def vac(op):
        return complex(np.vdot(xi, op.matrix @ xi))

    devs = []
    for order in ("zw", "wz"):
        auto = lifted.compose(order)
        d = max([abs(vac(a) - z[i]) for i, a in enumerate(auto.images_e)]
                + [abs(vac(b) - w[j]) for j, b in enumerate(auto.images_f)])
        devs.append(d)
    auto = lifted.composed
    prod = max((abs(vac(a @ b) - z[i] * w[j]) for i, a in enumerate(auto.images_e)
                for j, b in enumerate(auto.images_f)), default=0.0)
    return OrbitReport(devs[0], devs[1], prod)

