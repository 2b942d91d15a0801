import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from germstab.linalg import (
    LinearSolver,
    Matrix,
    Subspace,
    annihilator,
    cokernel_basis,
    column_space_basis,
    nullspace,
    rank,
    rref,
    solve,
    subspace_intersection,
    subspace_sum,
)
from _gen import minor_rank, rand_matrix, rand_q, rand_subspace, sym_matrix


def test_rref_identity():
    R, r, piv = rref(Matrix.identity(3))
    assert R == Matrix.identity(3) and r == 3 and piv == (0, 1, 2)


def test_rref_proportional_rows():
    R, r, piv = rref(Matrix.from_rows([[1, 2], [2, 4]]))
    assert R == Matrix.from_rows([[1, 2], [0, 0]]) and r == 1 and piv == (0,)


def test_rank_matches_minor_oracle():
    rng = random.Random(1)
    for _ in range(15):
        M = rand_matrix(rng, 6, 6, zero_prob=rng.choice([0.2, 0.5, 0.8]))
        assert rank(M) == minor_rank(M.to_rows())


def test_rank_of_planted_low_rank_products():
    rng = random.Random(2)
    for _ in range(20):
        r = rng.randint(0, 4)
        A = rand_matrix(rng, 6, r, zero_prob=0) if r else Matrix.zeros(6, 0)
        B = rand_matrix(rng, r, 5, zero_prob=0) if r else Matrix.zeros(0, 5)
        M = A @ B if r else Matrix.zeros(6, 5)
        assert rank(M) == sym_matrix(M.to_rows()).rank()


def test_rref_matches_sympy():
    rng = random.Random(3)
    for _ in range(20):
        M = rand_matrix(rng, rng.randint(1, 5), rng.randint(1, 5))
        R, r, piv = rref(M)
        SR, spiv = sym_matrix(M.to_rows()).rref()
        assert piv == tuple(spiv) and r == len(spiv)
        for i in range(M.rows):
            for j in range(M.cols):
                assert R[i, j] == Fraction(int(SR[i, j].p), int(SR[i, j].q))


def test_solve_identity():
    b = [Fraction(1, 2), -3, 7]
    assert solve(Matrix.identity(3), b) == [Fraction(1, 2), -3, 7]


def test_solve_unreachable_and_cokernel():
    A = Matrix.from_rows([[1], [0]])
    assert solve(A, [0, 1]) is None
    coker = cokernel_basis(A)
    assert [0, 1] in [[int(x) for x in c] for c in coker]


def test_solve_planted_solution():
    rng = random.Random(4)
    for _ in range(50):
        A = rand_matrix(rng, rng.randint(1, 7), rng.randint(1, 7))
        x0 = [rand_q(rng) for _ in range(A.cols)]
        b = A @ x0
        x = solve(A, b)
        assert x is not None and A @ x == b
        y = LinearSolver(A).solve(b)
        assert y is not None and A @ y == b


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_solve_or_certificate(seed):
    rng = random.Random(seed)
    A = rand_matrix(rng, rng.randint(1, 6), rng.randint(1, 6), zero_prob=0.5)
    b = [rand_q(rng) for _ in range(A.rows)]
    x = solve(A, b)
    if x is not None:
        assert A @ x == b
    else:
        coker = cokernel_basis(A)
        certs = [c for c in coker if sum(ci * bi for ci, bi in zip(c, b)) != 0]
        assert certs
        c = certs[0]
        assert all(x == 0 for x in A.T @ c)
    assert (LinearSolver(A).solve(b) is None) == (x is None)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_rref_idempotent_and_nullspace(seed):
    rng = random.Random(seed)
    M = rand_matrix(rng, rng.randint(1, 6), rng.randint(1, 6), zero_prob=0.5)
    R, r, _ = rref(M)
    assert rref(R)[0] == R
    ns = nullspace(M)
    assert len(ns) == M.cols - r
    for v in ns:
        assert all(x == 0 for x in M @ v)
    assert len(cokernel_basis(M)) == M.rows - r
    assert len(column_space_basis(M)) == r


def test_subspace_examples():
    x_axis = Subspace.coordinate(2, [0])
    y_axis = Subspace.coordinate(2, [1])
    assert subspace_sum(x_axis, y_axis) == Subspace.full(2)
    xy = Subspace.coordinate(3, [0, 1])
    yz = Subspace.coordinate(3, [1, 2])
    assert subspace_intersection([xy, yz]) == Subspace.coordinate(3, [1])


def test_ambient_mismatch():
    with pytest.raises(ValueError):
        subspace_sum(Subspace.full(2), Subspace.full(3))
    with pytest.raises(ValueError):
        subspace_intersection([Subspace.full(2), Subspace.full(3)])
    with pytest.raises(ValueError):
        Subspace(2, [[1, 2, 3]])


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_dimension_formula_and_lattice(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 6)
    P, Q = rand_subspace(rng, n), rand_subspace(rng, n)
    S = subspace_sum(P, Q)
    I = subspace_intersection([P, Q])
    assert P.dim + Q.dim == S.dim + I.dim
    assert subspace_intersection([P, subspace_sum(P, Q)]) == P
    assert subspace_sum(P, subspace_intersection([P, Q])) == P
    for v in I.vectors():
        assert P.contains(v) and Q.contains(v)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_canonical_representative(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 5)
    P = rand_subspace(rng, n)
    # another basis of the same space: add random combinations of the others
    vecs = P.vectors()
    mixed = []
    for i, v in enumerate(vecs):
        coeffs = [rand_q(rng) if j != i else 1 for j in range(len(vecs))]
        mixed.append([sum((c * u[t] for c, u in zip(coeffs, vecs)), Fraction(0)) for t in range(n)])
    Q = Subspace(n, mixed + [[0] * n])
    if Q.dim == P.dim:
        assert Q == P and hash(Q) == hash(P)
    A = annihilator(P)
    assert A.dim == P.codim
    for a in A.vectors():
        for v in P.vectors():
            assert sum(x * y for x, y in zip(a, v)) == 0


def test_matrix_basics():
    A = Matrix.from_rows([[1, 2], [3, 4]])
    assert A.T == Matrix.from_rows([[1, 3], [2, 4]])
    assert A @ Matrix.identity(2) == A
    assert A @ [1, 1] == [3, 7]
    with pytest.raises(ValueError):
        Matrix(2, 2, [1, 2, 3])
