from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st
from sympy import Matrix
from sympy.matrices.normalforms import smith_normal_form as sympy_snf
from sympy.polys.domains import ZZ as SZZ

from metabar.exactlinalg import (
    GF, QQ, ZZ, SparseMatrix, diagonalize, elementary_divisors, kernel_basis, matrix_from_json,
    matrix_to_json, quotient_invariants, rank, ring_from_name, smith_normal_form, solve_exact,
    RingMismatchError,
)


def dense(rows, ring=ZZ):
    return SparseMatrix.from_dense(rows, ring)


small_matrices = st.integers(1, 6).flatmap(
    lambda r: st.integers(1, 6).flatmap(
        lambda c: st.lists(st.lists(st.integers(-30, 30), min_size=c, max_size=c), min_size=r, max_size=r)))


def _sympy_divisors(rows):
    S = sympy_snf(Matrix(rows), domain=SZZ)
    return sorted(abs(S[i, i]) for i in range(min(S.shape)) if S[i, i] != 0)


@settings(max_examples=80, deadline=None)
@given(small_matrices)
def test_smith_form_against_sympy(rows):
    M = dense(rows)
    D = diagonalize(M)
    assert sorted(D.diagonal) == _sympy_divisors(rows)
    assert elementary_divisors(M) == sorted(D.diagonal)


@settings(max_examples=80, deadline=None)
@given(small_matrices)
def test_smith_transforms_are_unimodular(rows):
    M = dense(rows)
    U, S, V = smith_normal_form(M)
    assert U @ M @ V == S
    D = diagonalize(M)
    m, n = M.shape
    assert dense(D.U) @ dense(D.Uinv) == SparseMatrix.identity(m, ZZ)
    assert dense(D.V) @ dense(D.Vinv) == SparseMatrix.identity(n, ZZ)
    diag = D.diagonal
    assert all(diag[i + 1] % diag[i] == 0 for i in range(len(diag) - 1))


@pytest.mark.parametrize("ring", [QQ, GF(5), GF(2)])
@settings(max_examples=40, deadline=None)
@given(rows=small_matrices)
def test_field_rank_normal_form(ring, rows):
    M = dense(rows, ring)
    D = diagonalize(M)
    assert all(x == 1 for x in D.diagonal)
    assert dense(D.U, ring) @ M @ dense(D.V, ring) == dense(D.S, ring)
    assert rank(M) == D.rank
    K = kernel_basis(M)
    assert K.cols == M.cols - D.rank
    assert (M @ K).is_zero()


def test_known_divisors():
    assert diagonalize(dense([[2, 0], [0, 3]])).diagonal == [1, 6]
    assert diagonalize(dense([[2, 4, 4], [-6, 6, 12], [10, -4, -16]])).diagonal == [2, 6, 12]
    assert elementary_divisors(dense([[0, 0], [0, 0]])) == []


def test_rational_rank_ignores_integer_torsion():
    M = dense([[2, 0], [0, 3]])
    assert rank(SparseMatrix.from_dense(M.to_dense(), QQ)) == 2
    assert rank(SparseMatrix.from_dense(M.to_dense(), GF(3))) == 1


def test_solve_exact():
    M = dense([[2, 0], [0, 3]])
    assert solve_exact(M, [4, 9]) == {0: 2, 1: 3}
    assert solve_exact(M, [1, 0]) is None
    Mq = SparseMatrix.from_dense(M.to_dense(), QQ)
    assert solve_exact(Mq, [1, 0]) == {0: Fraction(1, 2)}


def test_quotient_invariants():
    Z = SparseMatrix.identity(2, ZZ)
    B = dense([[2, 0], [0, 0]])
    q = quotient_invariants(Z, B)
    assert q.rank == 1 and q.torsion == (2,)
    assert str(q) == "Z + Z/2"


def test_prime_field_arithmetic():
    F = GF(7)
    assert F.div(3, 5) == 2
    assert F.is_unit(3) and not F.is_unit(0)
    with pytest.raises(ValueError):
        GF(8)


def test_ring_names():
    for name in ["Z", "Q", "Fp:5"]:
        assert ring_from_name(name).name == name
    with pytest.raises(ValueError):
        ring_from_name("R")


def test_ring_mismatch():
    with pytest.raises(RingMismatchError):
        SparseMatrix.identity(2, ZZ) + SparseMatrix.identity(2, QQ)


def test_sparse_operations():
    A = dense([[1, 2], [0, 1]])
    assert A.T.to_dense() == [[1, 0], [2, 1]]
    assert (A - A).is_zero()
    assert A.apply({0: 1, 1: 1}) == {0: 3, 1: 1}
    assert A.hstack(A).shape == (2, 4)
    assert A.select_rows([1]).to_dense() == [[0, 1]]
    assert matrix_from_json(matrix_to_json(A)) == A


def test_empty_shapes():
    E = SparseMatrix.zero(0, 3, ZZ)
    assert diagonalize(E).rank == 0
    assert kernel_basis(E).cols == 3
    F = SparseMatrix.zero(3, 0, ZZ)
    assert kernel_basis(F).cols == 0
    assert elementary_divisors(F) == []


def test_sparse_elimination_on_large_unit_matrix():
    # bidiagonal matrix with unit pivots: full rank, all divisors 1
    n = 400
    trip = [(i, i, 1) for i in range(n)] + [(i + 1, i, -3) for i in range(n - 1)]
    M = SparseMatrix.from_triplets(n, n, ZZ, trip)
    assert elementary_divisors(M) == [1] * n
