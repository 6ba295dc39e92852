"""Truncated Fock space F(n, m, u) with left/right creation operators.

Basis vectors are normal-form words ``e_{i_1}...e_{i_k} f_{j_1}...f_{j_l}``
(all e-letters first) of total degree ``k + l <= N``.  They are ordered by
total degree, then by ``(k, l)``, then lexicographically, so every degree
projection is a contiguous slice.  Inside a block ``(k, l)`` the local index
of a word is ``e_index * m**l + f_index`` where the indices are read as
base-n / base-m numerals (first letter most significant), which is exactly
the ``np.kron`` ordering of ``E^{(x)k} (x) F^{(x)l}``.

Every operator on the truncation is stored as a :class:`FockOperator` that
remembers which (output degree, input degree) entries agree with the
untruncated operator.  Single generators, their adjoints and any
degree-raising power series are compressions and therefore exact entrywise;
products that pass through degrees above ``N`` lose exactness, and the mask
tracks exactly where.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
import scipy.sparse as sp

from .errors import MemoryBudgetExceeded, RelationMismatch, TruncationTooSmall
from .relations import RelationMatrix, forward_matrix, swap_matrix

INF = math.inf
MEMORY_CAP_MB = 64
_BYTES_PER_NNZ = 28


@dataclass(frozen=True)
class FockWord:
    e: tuple
    f: tuple

    @property
    def degree(self):
        return len(self.e) + len(self.f)

    @property
    def bidegree(self):
        return len(self.e), len(self.f)

    def __str__(self):
        letters = [f"e{i + 1}" for i in self.e] + [f"f{j + 1}" for j in self.f]
        return " ".join(letters) if letters else "xi0"


def _digits(idx, base, length):
    """Base-``base`` digits of ``idx`` (most significant first), shape (len(idx), length)."""
    idx = np.asarray(idx)
    out = np.zeros((idx.size, length), dtype=np.int64)
    rest = idx.copy()
    for pos in range(length - 1, -1, -1):
        out[:, pos] = rest % base
        rest //= base
    return out


def _from_digits(d, base):
    out = np.zeros(d.shape[0], dtype=np.int64)
    for pos in range(d.shape[1]):
        out = out * base + d[:, pos]
    return out


class FockOperator:
    """A matrix on a truncated Fock space plus its degree band and exactness mask.

    ``lo``/``hi`` bound the degree shift of the *untruncated* operator
    (``hi = inf`` for power series such as resolvents).  ``exact[p, q]`` is
    True when every matrix entry from input degree ``q`` to output degree
    ``p`` equals the corresponding entry of the untruncated operator.
    """

    __array_priority__ = 100

    def __init__(self, fock, matrix, lo, hi, exact=None):
        self.fock = fock
        self.matrix = matrix
        self.lo = lo
        self.hi = hi
        if exact is None:
            exact = np.ones((fock.N + 1, fock.N + 1), dtype=bool)
        self.exact = exact

    @property
    def N(self):
        return self.fock.N

    @property
    def valid_degree(self):
        """Largest input degree d such that all columns of degree <= d are exact (-1 if none)."""
        ok = self.exact.all(axis=0)
        bad = np.flatnonzero(~ok)
        return self.N if bad.size == 0 else int(bad[0]) - 1

    def dense(self):
        m = self.matrix
        return m.toarray() if sp.issparse(m) else np.asarray(m)

    @property
    def H(self):
        m = self.matrix
        adj = m.conj().T
        if sp.issparse(adj):
            adj = adj.tocsr()
        return FockOperator(self.fock, adj, -self.hi, -self.lo, self.exact.T.copy())

    def _compose_mask(self, other):
        a, b, N = self, other, self.N
        mask = np.ones((N + 1, N + 1), dtype=bool)
        for p in range(N + 1):
            for q in range(N + 1):
                lower = max(q + b.lo, p - a.hi)
                upper = min(p - a.lo, q + b.hi)
                if lower > upper:
                    continue
                if upper > N:
                    mask[p, q] = False
                    continue
                r0, r1 = int(max(lower, 0)), int(min(upper, N))
                if r0 <= r1 and not (a.exact[p, r0:r1 + 1].all() and b.exact[r0:r1 + 1, q].all()):
                    mask[p, q] = False
        return mask

    def __matmul__(self, other):
        if isinstance(other, FockOperator):
            prod = self.matrix @ other.matrix
            return FockOperator(self.fock, prod, self.lo + other.lo, self.hi + other.hi,
                                self._compose_mask(other))
        return self.matrix @ other

    def __add__(self, other):
        if not isinstance(other, FockOperator):
            return NotImplemented
        return FockOperator(self.fock, self.matrix + other.matrix, min(self.lo, other.lo),
                            max(self.hi, other.hi), self.exact & other.exact)

    def __sub__(self, other):
        return self + (-1) * other

    def __mul__(self, scalar):
        if isinstance(scalar, FockOperator):
            return NotImplemented
        return FockOperator(self.fock, self.matrix * scalar, self.lo, self.hi, self.exact.copy())

    __rmul__ = __mul__

    def __neg__(self):
        return -1 * self

    def mask_entries(self, rows, cols):
        d = self.fock.degrees
        return self.exact[d[rows], d[cols]]

    def norm_on_exact(self, max_in=None, max_out=None):
        """Frobenius norm of the matrix restricted to exact entries (and optional degree caps)."""
        d = self.fock.degrees
        m = self.matrix
        if sp.issparse(m):
            c = m.tocoo()
            keep = self.exact[d[c.row], d[c.col]]
            if max_in is not None:
                keep &= d[c.col] <= max_in
            if max_out is not None:
                keep &= d[c.row] <= max_out
            return float(np.sqrt(np.sum(np.abs(c.data[keep]) ** 2)))
        m = np.asarray(m)
        keep = self.exact[d[:, None], d[None, :]]
        if max_in is not None:
            keep &= (d <= max_in)[None, :]
        if max_out is not None:
            keep &= (d <= max_out)[:, None]
        return float(np.sqrt(np.sum(np.abs(m[keep]) ** 2)))


def residual(a, b=None, max_in=None, max_out=None):
    """Frobenius norm of ``a - b`` over the entries where both sides are exact."""
    diff = a if b is None else a - b
    return diff.norm_on_exact(max_in=max_in, max_out=max_out)


class TruncatedFock:
    """Compression of F(n, m, u) to total degree <= N.

    Use :func:`build` (relation matrix) or :func:`free_fock` (e-letters only).
    """

    def __init__(self, n, m, u, N, memory_cap_mb=MEMORY_CAP_MB):
        if N < 1:
            raise TruncationTooSmall(f"truncation degree must be >= 1, got {N}")
        self.n, self.m, self.N = int(n), int(m), int(N)
        self.u = np.asarray(u, dtype=complex)
        self.rel = RelationMatrix(self.n, self.m, self.u) if self.m > 0 else None
        self.blocks = [(k, p - k) for p in range(N + 1) for k in range(p + 1)
                       if self.block_size(k, p - k) > 0]
        self.offsets = {}
        pos = 0
        for b in self.blocks:
            self.offsets[b] = pos
            pos += self.block_size(*b)
        self.dim = pos
        est = self._storage_estimate()
        if est > memory_cap_mb * 2 ** 20:
            raise MemoryBudgetExceeded(
                f"generator storage estimate {est / 2**20:.1f} MB exceeds cap {memory_cap_mb} MB "
                f"(n={n}, m={m}, N={N}, basis size {self.dim})")
        deg = np.empty(self.dim, dtype=np.int64)
        for (k, l), off in self.offsets.items():
            deg[off:off + self.block_size(k, l)] = k + l
        deg.setflags(write=False)
        self.degrees = deg
        if self.m > 0:
            self._swap = swap_matrix(self.rel)
            self._fwd = forward_matrix(self.rel)
        else:
            self._swap = self._fwd = np.zeros((0, 0), dtype=complex)
        self.L_e = [self._op(self._left_e(i), 1) for i in range(self.n)]
        self.R_f = [self._op(self._right_f(j), 1) for j in range(self.m)]
        self.L_f = [self._op(self._left_f(j), 1) for j in range(self.m)]
        self.R_e = [self._op(self._right_e(i), 1) for i in range(self.n)]

    # --- sizes and indexing ---

    def block_size(self, k, l):
        return self.n ** k * self.m ** l

    @staticmethod
    def expected_dim(n, m, N):
        return sum(n ** k * m ** (p - k) for p in range(N + 1) for k in range(p + 1))

    def _storage_estimate(self):
        n, m, N = self.n, self.m, self.N
        nnz = 0
        for p in range(N):
            for k in range(p + 1):
                l = p - k
                size = self.block_size(k, l)
                nnz += (n + m) * size  # L_e, R_f: one entry per column
                nnz += m * (n ** k * m) * n ** k * m ** l  # L_f dense e-blocks
                nnz += n * n ** k * (n * m ** l) * m ** l  # R_e dense f-blocks
        return nnz * _BYTES_PER_NNZ

    def degree_slice(self, p):
        idx = np.flatnonzero(self.degrees == p)
        return slice(int(idx[0]), int(idx[-1]) + 1) if idx.size else slice(0, 0)

    def index(self, word):
        k, l = word.bidegree
        if (k, l) not in self.offsets:
            raise KeyError(f"word {word} outside the truncation")
        e = 0
        for i in word.e:
            e = e * self.n + i
        f = 0
        for j in word.f:
            f = f * self.m + j
        return self.offsets[(k, l)] + e * self.m ** l + f

    def word(self, idx):
        for (k, l) in reversed(self.blocks):
            off = self.offsets[(k, l)]
            if idx >= off:
                local = idx - off
                e, f = divmod(local, self.m ** l)
                return FockWord(tuple(_digits([e], self.n, k)[0]), tuple(_digits([f], self.m, l)[0]))
        raise IndexError(idx)

    @cached_property
    def basis(self):
        return [self.word(i) for i in range(self.dim)]

    # --- vectors and simple operators ---

    def vacuum(self):
        v = np.zeros(self.dim, dtype=complex)
        v[0] = 1.0
        return v

    def vector(self, coeffs):
        """Vector from ``{FockWord: coefficient}``."""
        v = np.zeros(self.dim, dtype=complex)
        for w, c in coeffs.items():
            v[self.index(w)] += c
        return v

    def _op(self, matrix, shift):
        return FockOperator(self, matrix, shift, shift)

    def identity(self):
        return self._op(sp.identity(self.dim, dtype=complex, format="csr"), 0)

    def degree_projection(self, p):
        return self._op(sp.diags((self.degrees == p).astype(complex), format="csr"), 0)

    def f_free_projection(self):
        """Projection onto words without f-letters (the copy of the full Fock space of E)."""
        diag = np.zeros(self.dim, dtype=complex)
        for (k, l), off in self.offsets.items():
            if l == 0:
                diag[off:off + self.block_size(k, 0)] = 1.0
        return self._op(sp.diags(diag, format="csr"), 0)

    def left(self, zeta):
        """L_zeta = sum zeta_i L_{e_i}."""
        return _combine(self, self.L_e, zeta)

    def left_f(self, zeta):
        return _combine(self, self.L_f, zeta)

    # --- letter reordering kernels ---

    @lru_cache(maxsize=None)
    def shuffle(self, l, k):
        """F^{(x)l} (x) E^{(x)k} -> E^{(x)k} (x) F^{(x)l} by iterated swaps (f-letters moved right)."""
        return _bubble(["f"] * l + ["e"] * k, "f", "e", self._swap, self.n, self.m)

    @lru_cache(maxsize=None)
    def regrade_block(self, k, l):
        """E^{(x)k} (x) F^{(x)l} -> F^{(x)l} (x) E^{(x)k} by iterated forward rewrites."""
        return _bubble(["e"] * k + ["f"] * l, "e", "f", self._fwd, self.n, self.m)

    # --- generator construction ---

    def _assemble(self, pieces):
        rows, cols, data = [], [], []
        for r, c, d in pieces:
            rows.append(r)
            cols.append(c)
            data.append(d)
        if not rows:
            return sp.csr_matrix((self.dim, self.dim), dtype=complex)
        mat = sp.coo_matrix((np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
                            shape=(self.dim, self.dim))
        return mat.tocsr()

    def _dense_block_pieces(self, block, r_off, c_off):
        c = sp.coo_matrix(block)
        return c.row + r_off, c.col + c_off, c.data.astype(complex)

    def _left_e(self, i):
        pieces = []
        for (k, l) in self.blocks:
            if k + l + 1 > self.N:
                continue
            size = self.block_size(k, l)
            local = np.arange(size)
            rows = self.offsets[(k + 1, l)] + i * size + local
            pieces.append((rows, self.offsets[(k, l)] + local, np.ones(size, dtype=complex)))
        return self._assemble(pieces)

    def _right_f(self, j):
        pieces = []
        for (k, l) in self.blocks:
            if k + l + 1 > self.N:
                continue
            size = self.block_size(k, l)
            local = np.arange(size)
            rows = self.offsets[(k, l + 1)] + local * self.m + j
            pieces.append((rows, self.offsets[(k, l)] + local, np.ones(size, dtype=complex)))
        return self._assemble(pieces)

    def _left_f(self, j):
        pieces = []
        for (k, l) in self.blocks:
            if k + l + 1 > self.N:
                continue
            nk = self.n ** k
            g = self.shuffle(1, k)[:, j * nk:(j + 1) * nk]
            blk = sp.kron(sp.coo_matrix(g), sp.identity(self.m ** l), format="coo")
            pieces.append(self._dense_block_pieces(blk, self.offsets[(k, l + 1)], self.offsets[(k, l)]))
        return self._assemble(pieces)

    def _right_e(self, i):
        pieces = []
        for (k, l) in self.blocks:
            if k + l + 1 > self.N:
                continue
            ml = self.m ** l
            h = self.shuffle(l, 1)[:, np.arange(ml) * self.n + i]
            blk = sp.kron(sp.identity(self.n ** k), sp.coo_matrix(h), format="coo")
            pieces.append(self._dense_block_pieces(blk, self.offsets[(k + 1, l)], self.offsets[(k, l)]))
        return self._assemble(pieces)


def _combine(fock, gens, coeffs):
    coeffs = np.asarray(coeffs, dtype=complex)
    mat = sp.csr_matrix((fock.dim, fock.dim), dtype=complex)
    for c, g in zip(coeffs, gens):
        if c != 0:
            mat = mat + c * g.matrix
    return FockOperator(fock, mat.tocsr(), 1, 1)


def _bubble(seq, first, second, kernel, n, m):
    """Reorder a letter sequence so every ``second`` precedes every ``first``.

    ``kernel`` maps the pair (first, second) to (second, first) in kron
    coordinates.  Adjacent pairs are rewritten right-to-left, one at a time.
    """
    dims = {"e": n, "f": m}
    seq = list(seq)
    total = int(np.prod([dims[s] for s in seq])) if seq else 1
    mat = np.eye(total, dtype=complex)
    while True:
        pos = [p for p in range(len(seq) - 1) if seq[p] == first and seq[p + 1] == second]
        if not pos:
            return mat
        p = pos[-1]
        left = int(np.prod([dims[s] for s in seq[:p]])) if p else 1
        right = int(np.prod([dims[s] for s in seq[p + 2:]])) if p + 2 < len(seq) else 1
        step = np.kron(np.eye(left), np.kron(kernel, np.eye(right)))
        mat = step @ mat
        seq[p], seq[p + 1] = seq[p + 1], seq[p]


def build(rel, N, memory_cap_mb=MEMORY_CAP_MB):
    """Build the truncation of F(n, m, u) to total degree <= N."""
    return TruncatedFock(rel.n, rel.m, rel.u, N, memory_cap_mb)


def free_fock(n, N, memory_cap_mb=MEMORY_CAP_MB):
    """Truncated full Fock space of C^n (no f-letters)."""
    return TruncatedFock(n, 0, np.zeros((0, 0)), N, memory_cap_mb)


# --- Fourier components ---

def fourier_component(A, k):
    """Degree-k band of A: sum_p Q_{p+k} A Q_p, extracted exactly."""
    d = A.fock.degrees
    m = A.matrix
    if sp.issparse(m):
        c = m.tocoo()
        keep = (d[c.row] - d[c.col]) == k
        mat = sp.coo_matrix((c.data[keep], (c.row[keep], c.col[keep])), shape=m.shape).tocsr()
    else:
        mat = np.where((d[:, None] - d[None, :]) == k, m, 0)
    # off the band both sides vanish, so only band entries inherit inexactness
    p = np.arange(A.N + 1)
    exact = np.where((p[:, None] - p[None, :]) == k, A.exact, True)
    return FockOperator(A.fock, mat, k, k, exact)


def cesaro_sum(A, p):
    """Fejer mean sum_{|k| < p} (1 - |k|/p) Phi_k(A)."""
    acc = None
    for k in range(-A.N, A.N + 1):
        if abs(k) >= p:
            continue
        term = (1.0 - abs(k) / p) * fourier_component(A, k)
        acc = term if acc is None else acc + term
    acc.lo, acc.hi = A.lo, A.hi
    return acc


# --- word reversal and regrading ---

def reversal_unitary(fock_u, fock_ustar, tol=1e-12):
    """W: F(n,m,u) -> F(n,m,u*) sending e_w f_v to the reversed word, renormal-ordered in F(n,m,u*)."""
    if (fock_u.n, fock_u.m, fock_u.N) != (fock_ustar.n, fock_ustar.m, fock_ustar.N):
        raise RelationMismatch("the two truncations differ in n, m or N")
    if np.max(np.abs(fock_ustar.u - fock_u.u.conj().T), initial=0.0) > tol:
        raise RelationMismatch("second space is not built from u*")
    n, m = fock_u.n, fock_u.m
    pieces = []
    for (k, l) in fock_u.blocks:
        size = fock_u.block_size(k, l)
        local = np.arange(size)
        e_idx, f_idx = np.divmod(local, m ** l) if l else (local, np.zeros_like(local))
        e_rev = _from_digits(_digits(e_idx, n, k)[:, ::-1], n)
        f_rev = _from_digits(_digits(f_idx, m, l)[:, ::-1], m) if l else f_idx
        rev_pos = f_rev * n ** k + e_rev  # coordinate in F^l (x) E^k
        perm = np.zeros((size, size))
        perm[rev_pos, local] = 1.0
        blk = fock_ustar.shuffle(l, k) @ perm if (k and l) else perm
        off = fock_u.offsets[(k, l)]
        pieces.append(fock_u._dense_block_pieces(blk, off, off))
    return FockOperator(fock_u, fock_u._assemble(pieces), 0, 0)


def regrade_f_first(fock):
    """Unitary sending each normal-form word to its f-before-e expansion.

    Within block (k, l) the output coordinates are ``f_index * n**k + e_index``
    (f-letters first).  Built from the forward relation only.
    """
    pieces = []
    for (k, l) in fock.blocks:
        off = fock.offsets[(k, l)]
        blk = fock.regrade_block(k, l) if (k and l) else _plain_reorder(fock, k, l)
        pieces.append(fock._dense_block_pieces(blk, off, off))
    return FockOperator(fock, fock._assemble(pieces), 0, 0)


def _plain_reorder(fock, k, l):
    # a pure e-word or pure f-word is already in f-first order
    return np.eye(fock.block_size(k, l), dtype=complex)
