"""Permutations of the index set {1..n} x {1..m} and their product-conjugacy classes.

A permutation is stored as a tuple ``images`` with ``images[x] = theta(x)``
on 0-based flat indices ``x = i * m + j``.  The associated relation matrix
has ``u[x, theta(x)] = 1``, so ``u_theta @ u_tau = u_{tau o theta}``.
"""
from __future__ import annotations

import itertools
import re

import numpy as np

from .errors import BudgetExceeded, ParseError

MAX_SEARCH_SIZE = 8


def identity_perm(n, m):
    return tuple(range(n * m))


def compose(p, q):
    """(p o q)(x) = p(q(x))."""
    return tuple(p[q[x]] for x in range(len(q)))


def inverse(p):
    inv = [0] * len(p)
    for x, y in enumerate(p):
        inv[y] = x
    return tuple(inv)


def perm_matrix(perm, n, m):
    size = n * m
    u = np.zeros((size, size))
    u[np.arange(size), list(perm)] = 1.0
    return u


def perm_from_matrix(u, tol=1e-12):
    """Inverse of :func:`perm_matrix`; returns None when ``u`` is not a permutation matrix."""
    u = np.asarray(u)
    ones = np.abs(u - 1) <= tol
    if np.any((np.abs(u) > tol) & ~ones):
        return None
    if not (np.all(ones.sum(axis=0) == 1) and np.all(ones.sum(axis=1) == 1)):
        return None
    return tuple(int(np.flatnonzero(row)[0]) for row in ones)


def _flip(n, m):
    """The bijection (i, j) -> (j, i) from n x m pairs to m x n pairs, as flat indices."""
    return tuple(j * n + i for i in range(n) for j in range(m))


def tilde_perm(perm, n, m):
    """Permutation of the conjugate-flipped matrix; it acts on m x n pairs.

    ``u~`` has a one at ((i,j),(k,l)) iff ``theta(l,k) = (j,i)``, which gives
    ``theta~ = flip o theta^{-1} o flip``.
    """
    f = _flip(n, m)
    f_back = inverse(f)
    inv = inverse(perm)
    return tuple(f[inv[f_back[x]]] for x in range(n * m))


def product_perm(s1, s2, m):
    """The permutation (i, j) -> (s1(i), s2(j)) of flat indices."""
    return tuple(s1[i] * m + s2[j] for i in range(len(s1)) for j in range(m))


def product_group(n, m):
    for s1 in itertools.permutations(range(n)):
        for s2 in itertools.permutations(range(m)):
            yield (s1, s2), product_perm(s1, s2, m)


def conjugate(theta, sigma):
    """sigma^{-1} o theta o sigma: the permutation of u_sigma u_theta u_sigma^{-1}."""
    return compose(inverse(sigma), compose(theta, sigma))


def find_conjugator(theta_u, theta_v, n, m):
    """Return ((s1, s2), sigma) with ``theta_u = sigma^{-1} theta_v sigma``, or None."""
    theta_u, theta_v = tuple(theta_u), tuple(theta_v)
    for pair, sigma in product_group(n, m):
        if conjugate(theta_v, sigma) == theta_u:
            return pair, sigma
    return None


def _check_budget(n, m):
    if n * m > MAX_SEARCH_SIZE:
        raise BudgetExceeded(f"nm = {n * m} exceeds the factorial search bound {MAX_SEARCH_SIZE}")


def permutation_classes(n, m, with_tilde=None):
    """Partition S_{nm} into product-conjugacy classes.

    When ``n == m`` (default ``with_tilde``) each class is also closed under
    the tilde map.  Classes are lists sorted lexicographically; the list of
    classes is sorted by first element.
    """
    _check_budget(n, m)
    if with_tilde is None:
        with_tilde = n == m
    if with_tilde and n != m:
        raise ValueError("tilde closure only stays inside S_{nm} when n == m")
    group = [sigma for _, sigma in product_group(n, m)]
    seen = set()
    classes = []
    for theta in itertools.permutations(range(n * m)):
        if theta in seen:
            continue
        orbit = {conjugate(theta, s) for s in group}
        if with_tilde:
            t = tilde_perm(theta, n, m)
            orbit |= {conjugate(t, s) for s in group}
        seen |= orbit
        classes.append(sorted(orbit))
    classes.sort(key=lambda c: c[0])
    return classes


# --- cycle notation over 1-based two-digit pairs, e.g. "(11,22,12)" ---

_TOKEN = re.compile(r"\s*(\(|\)|,|\d\d|id)")


def _tokenize(text):
    pos = 0
    out = []
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        match = _TOKEN.match(text, pos)
        if match is None:
            raise ParseError(f"unexpected character {text[pos]!r} in cycle notation", 1, pos + 1)
        out.append((match.group(1), match.start(1) + 1))
        pos = match.end()
    return out


def parse_cycles(text, n, m):
    """Parse "id", "(11,22,12)", "((11,12),(21,22))" or "(11,12)(21,22)" into a permutation tuple."""
    if not isinstance(text, str):
        raise ParseError("permutation must be a string in cycle notation")
    tokens = _tokenize(text)
    if [t for t, _ in tokens] == ["id"]:
        return identity_perm(n, m)
    perm = list(range(n * m))
    cycles = []
    stack = []
    for tok, col in tokens:
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if not stack:
                raise ParseError("unbalanced ')'", 1, col)
            group = stack.pop()
            if group and isinstance(group[0], int):
                cycles.append(group)
            if stack:
                stack[-1].append(None)
        elif tok == ",":
            continue
        elif tok == "id":
            raise ParseError("'id' must stand alone", 1, col)
        else:
            i, j = int(tok[0]) - 1, int(tok[1]) - 1
            if not (0 <= i < n and 0 <= j < m):
                raise ParseError(f"pair {tok} outside {n} x {m}", 1, col)
            if not stack:
                raise ParseError("pair outside parentheses", 1, col)
            stack[-1].append(i * m + j)
    if stack:
        raise ParseError("unbalanced '('", 1, len(text))
    used = set()
    for cyc in cycles:
        if len(set(cyc)) != len(cyc) or used & set(cyc):
            raise ParseError(f"cycles are not disjoint: {text!r}")
        used |= set(cyc)
        for a, b in zip(cyc, cyc[1:] + cyc[:1]):
            perm[a] = b
    return tuple(perm)


def format_cycles(perm, n, m):
    """Cycle notation with 1-based pairs; a single cycle prints as "(11,22,12)"."""
    seen = set()
    cycles = []
    for start in range(len(perm)):
        if start in seen or perm[start] == start:
            continue
        cyc = [start]
        seen.add(start)
        x = perm[start]
        while x != start:
            cyc.append(x)
            seen.add(x)
            x = perm[x]
        cycles.append(cyc)
    if not cycles:
        return "id"

    def label(x):
        i, j = divmod(x, m)
        return f"{i + 1}{j + 1}"

    parts = ["(" + ",".join(label(x) for x in c) + ")" for c in cycles]
    return parts[0] if len(parts) == 1 else "(" + ",".join(parts) + ")"


# the representatives listed for n = m = 2
REPRESENTATIVES_2x2 = {
    "theta1": "id",
    "theta2": "(11,12)",
    "theta3": "(11,22)",
    "theta4a": "(11,22,12)",
    "theta4b": "(11,12,22)",
    "theta5": "((11,12),(21,22))",
    "theta6": "((11,22),(12,21))",
    "theta7": "(11,12,22,21)",
    "theta8": "(11,12,21,22)",
}
