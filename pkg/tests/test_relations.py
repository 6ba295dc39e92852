import json

import numpy as np
import pytest
from hypothesis import given

from conftest import relations, seeds
from unirel import families as fam
from unirel.errors import DimensionMismatch, IndexOutOfRange, NotUnitary, ParseError
from unirel.relations import (RelationMatrix, blocks, exchange_tilde, forward, forward_matrix,
                              parse_json_text, swap, swap_matrix, to_json_dict, validate)


def test_validate_accepts_identity_and_diagonal_sign_matrix():
    assert validate(2, 2, np.eye(4)).size == 4
    rel = validate(2, 2, np.diag([1, -1, -1, 1]))
    assert rel.n == rel.m == 2


def test_validate_rejects_non_unitary_with_residual():
    with pytest.raises(NotUnitary) as err:
        validate(2, 2, np.diag([1, -1, -1, 2]))
    assert err.value.residual == pytest.approx(3.0)


def test_validate_rejects_wrong_shape():
    with pytest.raises(DimensionMismatch):
        validate(2, 3, np.eye(4))


def test_lexicographic_index():
    rel = fam.identity(2, 3)
    assert rel.index(0, 1) == 1  # second row is the pair (1,2) in 1-based labels
    assert rel.pair(3) == (1, 0)
    with pytest.raises(IndexOutOfRange):
        rel.index(2, 0)


def test_identity_blocks_have_zero_c():
    b = blocks(fam.identity())
    assert np.array_equal(b.c, np.zeros_like(b.c))
    assert np.array_equal(b.blocks[0, 0], np.array([[1, 0], [0, 0]]))


def test_c_matrix_of_u2():
    b = blocks(fam.u2())
    expected = np.zeros((2, 2))
    expected[0, 1] = -2.0
    assert np.array_equal(b.c[0, 1], expected)


@pytest.mark.parametrize("a", [0.0, 0.2, 0.5])
def test_u_a_lambda_has_zero_off_diagonal_c(a):
    c = blocks(fam.u_a_lambda(a, np.exp(0.7j))).c
    assert np.abs(c[0, 1]).max() < 1e-15 and np.abs(c[1, 0]).max() < 1e-15


@given(relations())
def test_blocks_round_trip_bit_exact(rel):
    b = blocks(rel)
    assert np.array_equal(b.reassemble(), rel.u)
    n, m = rel.n, rel.m
    for i in range(n):
        for j in range(m):
            e = np.zeros((n, m))
            e[i, j] = 1
            assert np.abs(b.c[i, j] + e - b.blocks[i, j]).max() <= 1e-15


def test_swap_examples():
    assert swap(fam.identity(), 1, 0) == {(0, 1): 1}
    # f_1 e_2 = - e_2 f_1 for diag(1,-1,-1,1) (1-based labels)
    assert swap(fam.u1(), 0, 1) == {(1, 0): -1}
    with pytest.raises(IndexOutOfRange):
        swap(fam.u1(), 2, 0)


@given(relations())
def test_forward_and_swap_are_mutually_inverse(rel):
    fwd, sw = forward_matrix(rel), swap_matrix(rel)
    assert np.abs(sw @ fwd - np.eye(rel.size)).max() < 1e-12
    assert np.abs(sw - fwd.conj().T).max() < 1e-15


@given(relations())
def test_swap_matches_entry_formula(rel):
    # oracle: read conj(u_{(i,j),(k,l)}) straight from the matrix
    u = rel.u
    for k in range(rel.n):
        for l in range(rel.m):
            got = swap(rel, l, k)
            for i in range(rel.n):
                for j in range(rel.m):
                    assert got.get((i, j), 0) == np.conj(u[i * rel.m + j, k * rel.m + l])
    assert forward(rel, 0, 0) == {rel.pair(c): x for c, x in enumerate(u[0]) if x != 0}


@given(relations())
def test_tilde_is_unitary_involution(rel):
    t = exchange_tilde(rel)
    assert (t.n, t.m) == (rel.m, rel.n)
    assert t.unitarity_residual() < 1e-12
    assert np.array_equal(exchange_tilde(t).u, rel.u)


def test_tilde_entry_formula():
    rel = fam.random_relation(2, 3, np.random.default_rng(1))
    t = exchange_tilde(rel)
    v = rel.u
    # v~_{(i,j),(k,l)} = conj(v_{(l,k),(j,i)}), (i,j) ranging over 3 x 2
    for i in range(3):
        for j in range(2):
            for k in range(3):
                for l in range(2):
                    assert t.u[i * 2 + j, k * 2 + l] == np.conj(v[l * 3 + k, j * 3 + i])


def test_tilde_of_identity():
    assert np.array_equal(exchange_tilde(fam.identity()).u, np.eye(4))


@pytest.mark.parametrize("a", [0.0, 0.25, 0.5, 1 / np.sqrt(2)])
@pytest.mark.parametrize("phase", [0.3, 1.0, 2.5, -2.0])
def test_tilde_conjugates_lambda(a, phase):
    lam = np.exp(1j * phase)
    assert np.abs(exchange_tilde(fam.u_a_lambda(a, lam)).u - fam.u_a_lambda(a, np.conj(lam)).u).max() <= 1e-15


def test_json_round_trip():
    rel = fam.u_a_lambda(0.3, 1j)
    back, perm = parse_json_text(json.dumps(to_json_dict(rel)))
    assert perm is None and np.array_equal(back.u, rel.u)


def test_json_permutation_form():
    rel, perm = parse_json_text('{"n": 2, "m": 2, "perm": "(11,12)"}')
    assert perm == (1, 0, 2, 3)
    assert rel.u[0, 1] == 1 and rel.u[1, 0] == 1


def test_json_parse_error_position():
    with pytest.raises(ParseError) as err:
        parse_json_text('{"n": 2,\n "m": 2, "u": [1, }')
    assert err.value.line == 2 and err.value.col is not None


def test_json_real_entries_and_bad_entries():
    rel, _ = parse_json_text('{"n": 1, "m": 1, "u": [[-1]]}')
    assert rel.u[0, 0] == -1
    with pytest.raises(ParseError):
        parse_json_text('{"n": 1, "m": 1, "u": [["x"]]}')
    with pytest.raises(NotUnitary):
        parse_json_text('{"n": 1, "m": 1, "u": [[2]]}')


def test_relation_matrix_is_read_only_and_hashable():
    rel = fam.identity()
    with pytest.raises(ValueError):
        rel.u[0, 0] = 2
    assert hash(rel) == hash(fam.identity()) and rel == fam.identity()
