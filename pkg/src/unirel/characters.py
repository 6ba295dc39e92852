"""Characters of the algebra: the variety V_u, its core, character vectors and T2 representations.

Points are pairs ``(z, w)`` in ``C^n x C^m``.  The variety condition
``z_i w_j = sum u_{(i,j),(k,l)} z_k w_l`` is the vanishing of the bilinear
pairings ``z^T C_{(i,j)} w`` with ``C_{(i,j)} = u_{(i,j)} - E_{i,j}``.

Polynomials in the generators are dicts ``{letters: coefficient}`` where
``letters`` is a tuple of ``("e", i)`` / ``("f", j)`` pairs (0-based),
read left to right as an operator product.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_TOLERANCES
from .errors import DimensionMismatch, NotInCore, NotInterior, NotInVariety
from .relations import blocks

TOL = DEFAULT_TOLERANCES


def c_matrices(rel):
    """Array ``C[i, j]`` of the n x m matrices C_{(i,j)}."""
    return blocks(rel).c


@dataclass(frozen=True)
class CharacterPoint:
    z: np.ndarray
    w: np.ndarray
    in_variety: bool
    in_omega: bool
    in_core: bool
    interior: bool
    variety_residual: float = 0.0
    core_residual: float = 0.0

    def generator_values(self):
        return self.z, self.w


def _as_vec(x, dim, name):
    x = np.atleast_1d(np.asarray(x, dtype=complex))
    if x.shape != (dim,):
        raise DimensionMismatch(f"{name} must have length {dim}, got shape {x.shape}")
    return x


def variety_residual(rel, z, w):
    """max_{i,j} |z^T C_{(i,j)} w|."""
    c = c_matrices(rel)
    return float(np.max(np.abs(np.einsum("k,ijkl,l->ij", z, c, w)), initial=0.0))


def core_residual(rel, z, w):
    """max over (i,j) of ||C_{(i,j)} w|| and ||C_{(i,j)}^T z||."""
    c = c_matrices(rel)
    cw = np.einsum("ijkl,l->ijk", c, w)
    ctz = np.einsum("ijkl,k->ijl", c, z)
    return float(max(np.max(np.linalg.norm(cw, axis=-1), initial=0.0),
                     np.max(np.linalg.norm(ctz, axis=-1), initial=0.0)))


def variety_test(rel, z, w, tol=TOL.variety, margin=TOL.interior_margin):
    """Classify the point (z, w): variety, closed-ball (Omega), core and open-ball membership."""
    z = _as_vec(z, rel.n, "z")
    w = _as_vec(w, rel.m, "w")
    vres = variety_residual(rel, z, w)
    cres = core_residual(rel, z, w)
    nz, nw = np.linalg.norm(z), np.linalg.norm(w)
    in_var = vres <= tol
    in_omega = in_var and nz <= 1 + tol and nw <= 1 + tol
    return CharacterPoint(
        z=z, w=w,
        in_variety=bool(in_var),
        in_omega=bool(in_omega),
        in_core=bool(in_omega and cres <= tol),
        interior=bool(nz < 1 - margin and nw < 1 - margin),
        variety_residual=vres,
        core_residual=cres,
    )


# --- core subspaces ---

@dataclass(frozen=True)
class CoreSubspaces:
    """Orthonormal bases (as columns) of Z and W, and d = dim Ker(u - I)."""

    Z: np.ndarray
    W: np.ndarray
    d_kernel: int
    warnings: tuple = field(default=())

    @property
    def dim_z(self):
        return self.Z.shape[1]

    @property
    def dim_w(self):
        return self.W.shape[1]

    def contains(self, z, w, tol=TOL.variety):
        """Membership in (Z cap closed ball) x (W cap closed ball)."""
        z, w = np.asarray(z, dtype=complex), np.asarray(w, dtype=complex)
        rz = np.linalg.norm(z - self.Z @ (self.Z.conj().T @ z))
        rw = np.linalg.norm(w - self.W @ (self.W.conj().T @ w))
        return bool(rz <= tol and rw <= tol and np.linalg.norm(z) <= 1 + tol and np.linalg.norm(w) <= 1 + tol)


def null_space(a, rel_tol=TOL.rank, warn=(TOL.rank_warn_low, TOL.rank_warn_high)):
    """Orthonormal kernel basis by SVD plus warnings for singular values near the threshold.

    The threshold is ``rel_tol * max(s_max, 1)``: relation-derived matrices
    have entries of order one, and a near-zero matrix should have a full
    kernel rather than be rescaled into a full-rank one.
    """
    a = np.asarray(a, dtype=complex)
    cols = a.shape[1]
    if a.size == 0:
        return np.eye(cols, dtype=complex), []
    _, s, vh = np.linalg.svd(a)
    scale = max(float(s[0]) if s.size else 0.0, 1.0)
    rank = int(np.sum(s > rel_tol * scale))
    notes = [f"singular value {x:.2e} in ambiguity band" for x in s / scale if warn[0] <= x <= warn[1]]
    return vh[rank:].conj().T, notes


def kernel_dimension(rel, tol=TOL.eigen_cluster):
    """dim Ker(u - I): singular values of u - I are |lambda - 1| over the spectrum of the normal matrix u."""
    s = np.linalg.svd(rel.u - np.eye(rel.size), compute_uv=False)
    return int(np.sum(s <= tol))


def core_subspaces(rel, tol=TOL.rank):
    c = c_matrices(rel)
    n, m = rel.n, rel.m
    stack_w = c.reshape(n * m * n, m)  # rows of every C_{(i,j)}
    stack_z = c.transpose(0, 1, 3, 2).reshape(n * m * m, n)  # rows of every C_{(i,j)}^T
    W, warn_w = null_space(stack_w, tol)
    Z, warn_z = null_space(stack_z, tol)
    return CoreSubspaces(Z=Z, W=W, d_kernel=kernel_dimension(rel), warnings=tuple(warn_z + warn_w))


def describe_core(rel, sub=None):
    """Human-readable description of the core as a product of balls in Z and W."""
    sub = sub or core_subspaces(rel)

    def span(basis, letter, dim):
        if basis.shape[1] == 0:
            return "{0}"
        if basis.shape[1] == dim:
            return f"closed unit ball of C^{dim}"
        if basis.shape[1] == 1:
            v = basis[:, 0]
            k = int(np.argmax(np.abs(v)))
            v = v * abs(v[k]) / v[k]
            if np.sum(np.abs(v) > 1e-9) == 1:
                return f"{{{letter}: {letter}_{k + 1} in closed unit disc, other coordinates 0}}"
        return f"{basis.shape[1]}-dim subspace of C^{dim} intersected with the closed ball"

    return {"Z": span(sub.Z, "z", rel.n), "W": span(sub.W, "w", rel.m)}


# --- dimension bounds on Ker(u - I) ---

@dataclass(frozen=True)
class DimfixReport:
    fixed_residual_w: float  # max_i ||u(delta_i (x) w) - delta_i (x) w||
    fixed_residual_z: float  # max_j ||u(z (x) delta_j) - z (x) delta_j||
    required: int
    d_kernel: int
    span_rank: int

    @property
    def holds(self):
        return self.d_kernel >= self.required and self.span_rank >= self.required


def dimfix_check(rel, point, tol=TOL.variety):
    """Check the fixed vectors z (x) delta_j, delta_i (x) w of u and the resulting lower bound on d."""
    if not point.in_core:
        raise NotInCore(f"point is not in the core (core residual {point.core_residual:.2e})")
    n, m = rel.n, rel.m
    z, w = point.z, point.w
    eye_n, eye_m = np.eye(n), np.eye(m)
    vecs, rw, rz = [], 0.0, 0.0
    zero_z = np.linalg.norm(z) <= tol
    zero_w = np.linalg.norm(w) <= tol
    if not zero_w:
        for i in range(n):
            x = np.kron(eye_n[i], w)
            rw = max(rw, float(np.linalg.norm(rel.u @ x - x)))
            vecs.append(x)
    if not zero_z:
        for j in range(m):
            x = np.kron(z, eye_m[j])
            rz = max(rz, float(np.linalg.norm(rel.u @ x - x)))
            vecs.append(x)
    if zero_z and zero_w:
        required = 0
    elif zero_w:
        required = m
    elif zero_z:
        required = n
    else:
        required = m + n - 1
    rank = int(np.linalg.matrix_rank(np.array(vecs), tol=1e-9)) if vecs else 0
    return DimfixReport(rw, rz, required, kernel_dimension(rel), rank)


# --- polynomials and character evaluation ---

def letters(text):
    """Parse "e1 f2 e1" (1-based) into a letter tuple."""
    out = []
    for tok in text.split():
        kind, idx = tok[0], int(tok[1:]) - 1
        if kind not in "ef" or idx < 0:
            raise ValueError(f"bad generator {tok!r}")
        out.append((kind, idx))
    return tuple(out)


def poly_mul(p, q):
    out = {}
    for a, ca in p.items():
        for b, cb in q.items():
            out[a + b] = out.get(a + b, 0) + ca * cb
    return out


def normal_order(rel, poly, drop=0.0):
    """Rewrite every monomial with all e-letters before all f-letters.

    Uses ``L_{f_l} L_{e_k} = sum_{i,j} conj(u_{(i,j),(k,l)}) L_{e_i} L_{f_j}``.
    Returns ``{(e_word, f_word): coefficient}``.
    """
    m = rel.m
    out = {}
    work = list(poly.items())
    while work:
        word, coeff = work.pop()
        if abs(coeff) <= drop:
            continue
        pos = None
        for p in range(len(word) - 1):
            if word[p][0] == "f" and word[p + 1][0] == "e":
                pos = p
                break
        if pos is None:
            e = tuple(x for k, x in word if k == "e")
            f = tuple(x for k, x in word if k == "f")
            out[(e, f)] = out.get((e, f), 0) + coeff
            continue
        l, k = word[pos][1], word[pos + 1][1]
        col = np.conj(rel.u[:, k * m + l])
        for r in np.flatnonzero(col):
            i, j = divmod(int(r), m)
            work.append((word[:pos] + (("e", i), ("f", j)) + word[pos + 2:], coeff * col[r]))
    return out


def character_eval(rel, point, poly, tol=TOL.variety):
    """alpha_{(z,w)} of a polynomial, evaluated on its normal-ordered form."""
    if not point.in_variety:
        raise NotInVariety(f"point is not in the variety (residual {point.variety_residual:.2e})")
    total = 0j
    for (e, f), c in normal_order(rel, poly).items():
        total += c * np.prod(point.z[list(e)]) * np.prod(point.w[list(f)])
    return complex(total)


# --- character vectors on Fock space ---

@dataclass(frozen=True)
class CharacterVector:
    vector: np.ndarray  # truncated w_alpha
    norm_sq_exact: float  # (1 - |z|^2)^{-1} (1 - |w|^2)^{-1}
    tail_bound: float  # bound on the squared norm beyond degree N

    @property
    def normalized(self):
        return self.vector / np.linalg.norm(self.vector)


def norm_tail_bound(a, b, N):
    """Bound on sum_{k+l>N} a^k b^l for a, b in [0, 1)."""
    h = math.ceil((N + 1) / 2)
    bound = (a ** h + b ** h) / ((1 - a) * (1 - b))
    if a + b < 1:
        bound = min(bound, (a + b) ** (N + 1) / (1 - a - b))
    return bound


def character_vector(fock, point):
    """Truncated w_alpha = sum conj(alpha(e_i f_j)) e_i f_j over basis words of degree <= N."""
    if not point.interior:
        raise NotInterior("character vectors need |z| < 1 and |w| < 1")
    zc, wc = np.conj(point.z), np.conj(point.w)
    v = np.zeros(fock.dim, dtype=complex)
    for (k, l), off in fock.offsets.items():
        block = np.ones(1, dtype=complex)
        for _ in range(k):
            block = np.kron(block, zc)
        for _ in range(l):
            block = np.kron(block, wc)
        v[off:off + block.size] = block
    a = float(np.linalg.norm(point.z) ** 2)
    b = float(np.linalg.norm(point.w) ** 2) if point.w.size else 0.0
    return CharacterVector(v, 1.0 / ((1 - a) * (1 - b)), norm_tail_bound(a, b, fock.N))


# --- nest representations into 2x2 upper triangular matrices ---

@dataclass(frozen=True)
class NestRep:
    point: CharacterPoint
    lam: np.ndarray
    mu: np.ndarray
    rho_e: np.ndarray  # shape (n, 2, 2)
    rho_f: np.ndarray  # shape (m, 2, 2)
    residual: float


def _upper(d, x):
    out = np.zeros((len(d), 2, 2), dtype=complex)
    out[:, 0, 0] = d
    out[:, 1, 1] = d
    out[:, 0, 1] = x
    return out


def nest_rep(rel, point, lam, mu):
    """Images rho(L_{e_i}), rho(L_{f_j}) and the largest relation residual over (i, j)."""
    lam = _as_vec(lam, rel.n, "lambda")
    mu = _as_vec(mu, rel.m, "mu")
    re, rf = _upper(point.z, lam), _upper(point.w, mu)
    t = rel.tensor()
    worst = 0.0
    for i in range(rel.n):
        for j in range(rel.m):
            rhs = np.einsum("kl,lab,kbc->ac", t[i, j], rf, re)
            worst = max(worst, float(np.linalg.norm(re[i] @ rf[j] - rhs)))
    return NestRep(point, lam, mu, re, rf, worst)


def offdiagonal_residual(rel, point, lam, mu):
    """max_{i,j} |lambda^T C_{(i,j)} w + z^T C_{(i,j)} mu|, the scalar form of the off-diagonal condition."""
    c = c_matrices(rel)
    vals = np.einsum("k,ijkl,l->ij", lam, c, point.w) + np.einsum("k,ijkl,l->ij", point.z, c, mu)
    return float(np.max(np.abs(vals), initial=0.0))


def violating_pair(rel, point):
    """A (lambda, mu) with unit norm breaking the off-diagonal condition, for a point outside the core.

    Picks the (i, j) with the largest ||C_{(i,j)} w|| or ||C_{(i,j)}^T z|| and
    aligns lambda (or mu) with its conjugate, so the residual equals that norm.
    """
    c = c_matrices(rel)
    cw = np.einsum("ijkl,l->ijk", c, point.w)
    ctz = np.einsum("ijkl,k->ijl", c, point.z)
    nw = np.linalg.norm(cw, axis=-1)
    nz = np.linalg.norm(ctz, axis=-1)
    lam = np.zeros(rel.n, dtype=complex)
    mu = np.zeros(rel.m, dtype=complex)
    if nw.max(initial=0.0) >= nz.max(initial=0.0):
        i, j = np.unravel_index(np.argmax(nw), nw.shape)
        if nw[i, j] == 0:
            raise NotInCore("point is in the core; no violating pair exists")
        lam = np.conj(cw[i, j]) / nw[i, j]
    else:
        i, j = np.unravel_index(np.argmax(nz), nz.shape)
        mu = np.conj(ctz[i, j]) / nz[i, j]
    return lam, mu


# --- sampling ---

def random_core_point(sub, rng, radius=1.0):
    """Uniform-ish point of (Z cap ball(radius)) x (W cap ball(radius)); zero factors stay zero."""
    def sample(basis):
        k = basis.shape[1]
        if k == 0:
            return np.zeros(basis.shape[0], dtype=complex)
        v = rng.standard_normal(k) + 1j * rng.standard_normal(k)
        v *= radius * rng.random() ** (1.0 / (2 * k)) / np.linalg.norm(v)
        return basis @ v

    return sample(sub.Z), sample(sub.W)


def random_variety_point(rel, rng, radius=0.9, tries=50):
    """Random interior point of V_u that is not forced to be zero, or None if none was found.

    Draws w at random and solves the linear system z^T C_{(i,j)} w = 0 for z,
    then the mirrored strategy; the nonzero side is scaled into the ball.
    """
    c = c_matrices(rel)
    n, m = rel.n, rel.m
    for t in range(tries):
        if t % 2 == 0:
            w = rng.standard_normal(m) + 1j * rng.standard_normal(m)
            rows = np.einsum("ijkl,l->ijk", c, w).reshape(-1, n)
            basis, _ = null_space(rows)
            if basis.shape[1] == 0:
                continue
            z = basis @ (rng.standard_normal(basis.shape[1]) + 1j * rng.standard_normal(basis.shape[1]))
        else:
            z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            rows = np.einsum("k,ijkl->ijl", z, c).reshape(-1, m)
            basis, _ = null_space(rows)
            if basis.shape[1] == 0:
                continue
            w = basis @ (rng.standard_normal(basis.shape[1]) + 1j * rng.standard_normal(basis.shape[1]))
        z = z * radius * rng.uniform(0.3, 1.0) / np.linalg.norm(z)
        w = w * radius * rng.uniform(0.3, 1.0) / np.linalg.norm(w)
        return z, w
    return None
