import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from unirel.errors import BudgetExceeded, ParseError
from unirel.perms import (REPRESENTATIVES_2x2, compose, conjugate, find_conjugator, format_cycles,
                          inverse, parse_cycles, perm_from_matrix, perm_matrix, permutation_classes,
                          product_perm, tilde_perm)
from unirel.relations import exchange_tilde, validate

perms4 = st.permutations(list(range(4))).map(tuple)


def _partitions(k):
    # number of integer partitions of k, by the standard recurrence
    p = [1] + [0] * k
    for part in range(1, k + 1):
        for total in range(part, k + 1):
            p[total] += p[total - part]
    return p[k]


def _orbit_count_bruteforce(n, m, with_tilde):
    """Union-find over S_{nm} with generators of S_n x S_m (and tilde) -- independent of the library."""
    elems = list(itertools.permutations(range(n * m)))
    parent = {x: x for x in elems}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    gens = []
    for s1 in itertools.permutations(range(n)):
        for s2 in itertools.permutations(range(m)):
            gens.append(tuple(s1[x // m] * m + s2[x % m] for x in range(n * m)))
    for theta in elems:
        for g in gens:
            ginv = [0] * len(g)
            for a, b in enumerate(g):
                ginv[b] = a
            other = tuple(ginv[theta[g[x]]] for x in range(n * m))
            parent[find(theta)] = find(other)
        if with_tilde:
            # u~ has a one at ((i,j),(k,l)) iff theta(l,k) = (j,i)
            u = np.zeros((n * m, n * m))
            u[np.arange(n * m), list(theta)] = 1
            t = exchange_tilde(validate(n, m, u)).u
            parent[find(theta)] = find(tuple(int(np.argmax(r)) for r in np.real(t)))
    return len({find(x) for x in elems})


def test_two_by_two_has_nine_classes():
    assert len(permutation_classes(2, 2)) == 9
    assert _orbit_count_bruteforce(2, 2, True) == 9


def test_listed_representatives_are_pairwise_inequivalent():
    classes = permutation_classes(2, 2)
    hit = {name: next(k for k, c in enumerate(classes) if parse_cycles(text, 2, 2) in c)
           for name, text in REPRESENTATIVES_2x2.items()}
    assert len(set(hit.values())) == 9
    assert hit["theta4a"] != hit["theta4b"]
    assert hit["theta7"] != hit["theta8"]


@pytest.mark.parametrize("k", [1, 2, 3, 4, 5, 6])
def test_one_by_k_classes_are_conjugacy_classes(k):
    assert len(permutation_classes(1, k)) == _partitions(k)
    if k <= 4:
        assert _orbit_count_bruteforce(1, k, False) == _partitions(k)


def test_one_by_one():
    assert len(permutation_classes(1, 1)) == 1


@pytest.mark.parametrize("n,m", [(2, 3), (3, 2)])
def test_rectangular_counts_match_bruteforce(n, m):
    assert len(permutation_classes(n, m)) == _orbit_count_bruteforce(n, m, False)


def test_budget():
    with pytest.raises(BudgetExceeded):
        permutation_classes(3, 3)


def test_classes_partition_the_group():
    classes = permutation_classes(2, 3)
    flat = [p for c in classes for p in c]
    assert len(flat) == len(set(flat)) == math.factorial(6)


@given(perms4, perms4)
def test_matrix_homomorphism(p, q):
    # u_theta u_tau = u_{tau o theta}
    assert np.array_equal(perm_matrix(p, 2, 2) @ perm_matrix(q, 2, 2), perm_matrix(compose(q, p), 2, 2))
    assert perm_from_matrix(perm_matrix(p, 2, 2)) == p


@given(perms4)
def test_tilde_perm_matches_matrix_tilde(p):
    t = exchange_tilde(validate(2, 2, perm_matrix(p, 2, 2)))
    assert np.array_equal(t.u, perm_matrix(tilde_perm(p, 2, 2), 2, 2))
    assert tilde_perm(tilde_perm(p, 2, 2), 2, 2) == p


@given(perms4, st.permutations([0, 1]), st.permutations([0, 1]))
def test_conjugation_matches_matrices(theta, s1, s2):
    sigma = product_perm(tuple(s1), tuple(s2), 2)
    k = np.kron(perm_matrix(s1, 2, 1), perm_matrix(s2, 2, 1))
    assert np.array_equal(perm_matrix(sigma, 2, 2), k)
    lhs = perm_matrix(conjugate(theta, sigma), 2, 2)
    assert np.array_equal(lhs, k @ perm_matrix(theta, 2, 2) @ k.T)
    hit = find_conjugator(conjugate(theta, sigma), theta, 2, 2)
    assert hit is not None


def test_cycle_notation():
    assert parse_cycles("id", 2, 2) == (0, 1, 2, 3)
    assert parse_cycles("(11,22,12)", 2, 2) == (3, 0, 2, 1)
    assert parse_cycles("((11,12),(21,22))", 2, 2) == parse_cycles("(11,12)(21,22)", 2, 2) == (1, 0, 3, 2)
    for text in REPRESENTATIVES_2x2.values():
        p = parse_cycles(text, 2, 2)
        assert parse_cycles(format_cycles(p, 2, 2), 2, 2) == p
    assert inverse(parse_cycles("(11,22,12)", 2, 2)) == parse_cycles("(11,12,22)", 2, 2)


@pytest.mark.parametrize("text,col", [("(11,3x)", 5), ("(11,31)", 5), ("11", 1), ("(11,12", None)])
def test_cycle_parse_errors(text, col):
    with pytest.raises(ParseError) as err:
        parse_cycles(text, 2, 2)
    if col is not None:
        assert err.value.col == col


def test_non_disjoint_cycles_rejected():
    with pytest.raises(ParseError):
        parse_cycles("(11,12)(12,21)", 2, 2)
