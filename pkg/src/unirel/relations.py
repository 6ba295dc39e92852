"""Relation matrices u for the commutation rule e_i f_j = sum u_{(i,j),(k,l)} f_l e_k.

Rows and columns of ``u`` are indexed by pairs ``(i, j)`` with
``0 <= i < n`` and ``0 <= j < m``, flattened lexicographically as
``i * m + j``.  The Python API is 0-based; the JSON format and the CLI
print 1-based pairs.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, IndexOutOfRange, NotUnitary, ParseError

UNITARY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class RelationMatrix:
    """A validated ``nm x nm`` unitary together with its factor dimensions."""

    n: int
    m: int
    u: np.ndarray = field(repr=False)

    def __post_init__(self):
        u = np.array(self.u, dtype=complex)
        u.setflags(write=False)
        object.__setattr__(self, "u", u)

    @property
    def size(self):
        return self.n * self.m

    def pair(self, row):
        """0-based flat index -> 0-based pair (i, j)."""
        return divmod(int(row), self.m)

    def index(self, i, j):
        if not (0 <= i < self.n and 0 <= j < self.m):
            raise IndexOutOfRange(f"pair ({i}, {j}) outside {self.n} x {self.m}")
        return i * self.m + j

    def tensor(self):
        """``u`` reshaped to ``T[i, j, k, l] = u_{(i,j),(k,l)}``."""
        return self.u.reshape(self.n, self.m, self.n, self.m)

    def adjoint(self):
        return RelationMatrix(self.n, self.m, self.u.conj().T)

    def unitarity_residual(self):
        return unitarity_residual(self.u)

    def __eq__(self, other):
        if not isinstance(other, RelationMatrix):
            return NotImplemented
        return (self.n, self.m) == (other.n, other.m) and np.array_equal(self.u, other.u)

    def __hash__(self):
        return hash((self.n, self.m, self.u.tobytes()))


@dataclass(frozen=True)
class BlockDecomposition:
    """``blocks[i, j]`` is the n x m matrix u_{(i,j)}; ``c[i, j] = blocks[i, j] - E_{i,j}``."""

    blocks: np.ndarray
    c: np.ndarray

    def reassemble(self):
        n, m = self.blocks.shape[:2]
        return self.blocks.reshape(n * m, n * m)


def unitarity_residual(u):
    u = np.asarray(u)
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def validate(n, m, matrix, tol=UNITARY_TOL):
    """Check shape and unitarity and wrap ``matrix`` as a :class:`RelationMatrix`."""
    if int(n) < 1 or int(m) < 1:
        raise DimensionMismatch(f"n and m must be positive, got n={n}, m={m}")
    u = np.asarray(matrix, dtype=complex)
    size = int(n) * int(m)
    if u.shape != (size, size):
        raise DimensionMismatch(f"expected a {size}x{size} matrix for n={n}, m={m}, got shape {u.shape}")
    res = unitarity_residual(u)
    if not res <= tol:
        raise NotUnitary(res, tol)
    return RelationMatrix(int(n), int(m), u)


def blocks(rel):
    n, m = rel.n, rel.m
    b = rel.tensor().copy()
    c = b.copy()
    for i in range(n):
        for j in range(m):
            c[i, j, i, j] -= 1.0
    return BlockDecomposition(b, c)


def exchange_tilde(rel):
    """Conjugate flip ``v~_{(i,j),(k,l)} = conj(v_{(l,k),(j,i)})``.

    The result is indexed by pairs over ``{0..m-1} x {0..n-1}``, i.e. it is a
    relation matrix with the roles of n and m interchanged.
    """
    t = rel.tensor()
    tt = np.conj(t.transpose(3, 2, 1, 0))
    return RelationMatrix(rel.m, rel.n, tt.reshape(rel.size, rel.size))


def swap(rel, l, k):
    """Rewrite ``f_l (x) e_k`` as ``sum conj(u_{(i,j),(k,l)}) e_i (x) f_j``.

    Returns ``{(i, j): coefficient}`` over the nonzero coefficients.
    """
    if not (0 <= k < rel.n and 0 <= l < rel.m):
        raise IndexOutOfRange(f"swap needs 0 <= k < {rel.n} and 0 <= l < {rel.m}, got k={k}, l={l}")
    col = np.conj(rel.u[:, k * rel.m + l])
    return {rel.pair(r): complex(col[r]) for r in np.flatnonzero(col)}


def forward(rel, i, j):
    """Rewrite ``e_i (x) f_j`` as ``sum u_{(i,j),(k,l)} f_l (x) e_k``; returns ``{(k, l): coefficient}``."""
    rel.index(i, j)
    row = rel.u[i * rel.m + j]
    return {rel.pair(c): complex(row[c]) for c in np.flatnonzero(row)}


def swap_matrix(rel):
    """Matrix of the swap map F (x) E -> E (x) F.

    Input coordinates are ``f * n + e`` (f-letter first), output coordinates
    ``e * m + f``.  This is the only tensor-rewrite kernel used on Fock space.
    """
    n, m = rel.n, rel.m
    s = np.zeros((n * m, m * n), dtype=complex)
    for k in range(n):
        for l in range(m):
            for (i, j), c in swap(rel, l, k).items():
                s[i * m + j, l * n + k] = c
    return s


def forward_matrix(rel):
    """Matrix of E (x) F -> F (x) E from the forward relation (input ``e * m + f``, output ``f * n + e``)."""
    n, m = rel.n, rel.m
    s = np.zeros((m * n, n * m), dtype=complex)
    for i in range(n):
        for j in range(m):
            for (k, l), c in forward(rel, i, j).items():
                s[l * n + k, i * m + j] = c
    return s


def kron_product(a, b):
    """The ``nm x nm`` matrix with ``(i,j),(k,l)`` entry ``a[i,k] * b[j,l]``."""
    return np.kron(np.asarray(a), np.asarray(b))


def product_conjugate(rel, a, b):
    k = kron_product(a, b)
    return RelationMatrix(rel.n, rel.m, k @ rel.u @ k.conj().T)


def is_permutation_matrix(u, tol=1e-12):
    u = np.asarray(u)
    if np.any((np.abs(u) > tol) & (np.abs(u - 1) > tol)):
        return False
    ones = np.abs(u - 1) <= tol
    return bool(np.all(ones.sum(axis=0) == 1) and np.all(ones.sum(axis=1) == 1))


# --- JSON interchange: {"n": int, "m": int, "u": [[[re, im], ...], ...]} ---

def _entry(x):
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return complex(x)
    if isinstance(x, (list, tuple)) and len(x) == 2:
        return complex(float(x[0]), float(x[1]))
    raise ParseError(f"matrix entry must be a number or [re, im], got {x!r}")


def parse_json_text(text, tol=UNITARY_TOL):
    """Parse the JSON matrix format.

    Returns ``(rel, perm)`` where ``perm`` is the permutation tuple when the
    document carries a ``"perm"`` key in cycle notation instead of ``"u"``,
    and None otherwise.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno, exc.colno) from None
    if not isinstance(doc, dict) or "n" not in doc or "m" not in doc:
        raise ParseError('expected an object with keys "n", "m" and "u" (or "perm")')
    n, m = doc["n"], doc["m"]
    if not (isinstance(n, int) and isinstance(m, int)):
        raise ParseError('"n" and "m" must be integers')
    if "perm" in doc:
        from .perms import parse_cycles, perm_matrix
        perm = parse_cycles(doc["perm"], n, m)
        return validate(n, m, perm_matrix(perm, n, m), tol), perm
    if "u" not in doc:
        raise ParseError('missing key "u"')
    rows = doc["u"]
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise ParseError('"u" must be a list of rows')
    u = np.array([[_entry(x) for x in row] for row in rows], dtype=complex)
    return validate(n, m, u, tol), None


def load_json(path, tol=UNITARY_TOL):
    with open(path) as fh:
        rel, _ = parse_json_text(fh.read(), tol)
    return rel


def to_json_dict(rel):
    return {
        "n": rel.n,
        "m": rel.m,
        "u": [[[float(x.real), float(x.imag)] for x in row] for row in rel.u],
    }


def dump_json(rel, path):
    with open(path, "w") as fh:
        json.dump(to_json_dict(rel), fh)
