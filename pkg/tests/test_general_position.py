import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from germstab.general_position import (
    METHODS,
    PreconditionError,
    SubspaceFamily,
    adapt_coordinates,
    find_common_translate,
    gp_check,
)
from germstab.linalg import Matrix, Subspace
from _gen import rand_family, rand_invertible_int, rand_q

X = Subspace.coordinate(2, [0])
Y = Subspace.coordinate(2, [1])


def line(*v):
    return Subspace(len(v), [list(v)])


@pytest.mark.parametrize("method", METHODS)
def test_axes_in_general_position(method):
    assert gp_check(SubspaceFamily([X, Y]), method)


@pytest.mark.parametrize("method", METHODS)
def test_three_lines_in_plane(method):
    assert not gp_check(SubspaceFamily([X, Y, line(1, 1)]), method)


@pytest.mark.parametrize("method", METHODS)
def test_coordinate_planes(method):
    planes = [Subspace.coordinate(3, ax) for ax in ([0, 1], [1, 2], [0, 2])]
    assert gp_check(SubspaceFamily(planes), method)


@pytest.mark.parametrize("method", METHODS)
def test_repeated_member(method):
    assert not gp_check(SubspaceFamily([X, X]), method)
    assert gp_check(SubspaceFamily([Subspace.full(2), Subspace.full(2)]), method)


def test_check_errors():
    with pytest.raises(ValueError):
        gp_check(SubspaceFamily([X]))
    with pytest.raises(ValueError):
        gp_check(SubspaceFamily([X, Y]), "bogus")
    with pytest.raises(ValueError):
        SubspaceFamily([X, Subspace.full(3)])


def test_translate_examples():
    fam = SubspaceFamily([X, Y])
    assert find_common_translate(fam, [[1, 2], [3, 4]]) == [3, 2]
    z = find_common_translate(fam, [[0, 0], [0, 0]])
    assert z == [0, 0]
    assert find_common_translate(SubspaceFamily([X, X]), [[0, 0], [0, 1]]) is None


def test_translate_special_vectors_outside_general_position():
    # not in general position, yet these particular vectors have a translate
    fam = SubspaceFamily([X, X])
    z = find_common_translate(fam, [[5, 1], [-2, 1]])
    assert z is not None and z[1] == 1


def test_adapt_already_coordinate():
    ad = adapt_coordinates(SubspaceFamily([Y, X]))
    assert ad.change_of_basis == Matrix.identity(2)
    assert ad.index_sets == ((0,), (1,))
    assert ad.complements == ((1,), (0,))


def test_adapt_diagonal_lines():
    fam = SubspaceFamily([line(1, 1), line(1, -1)])
    ad = adapt_coordinates(fam)
    assert ad.index_sets == ((0,), (1,))
    assert ad.verify(fam)
    L = ad.change_of_basis
    assert (L @ [1, 1])[0] == 0 and (L @ [1, -1])[1] == 0


def test_adapt_single_member():
    P = Subspace(3, [[1, 2, 3]])
    ad = adapt_coordinates(SubspaceFamily([P]))
    assert ad.index_sets == ((0, 1),)
    assert ad.verify(SubspaceFamily([P]))


def test_adapt_rejects_non_general_position():
    with pytest.raises(PreconditionError):
        adapt_coordinates(SubspaceFamily([X, Y, line(1, 1)]))


def test_adapt_inverse():
    fam = SubspaceFamily([line(1, 2, 4), Subspace(3, [[1, 0, 1], [0, 1, 1]])])
    ad = adapt_coordinates(fam)
    assert ad.change_of_basis @ ad.inverse() == Matrix.identity(3)


# --- properties ----------------------------------------------------------------

seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=150, deadline=None)
@given(seeds)
def test_methods_agree(seed):
    fam = rand_family(random.Random(seed))
    verdicts = {m: gp_check(fam, m) for m in METHODS}
    assert len(set(verdicts.values())) == 1, verdicts


@settings(max_examples=80, deadline=None)
@given(seeds)
def test_subcollections(seed):
    fam = rand_family(random.Random(seed))
    if gp_check(fam):
        for r in range(2, len(fam)):
            for idx in itertools.combinations(range(len(fam)), r):
                assert gp_check(fam.subfamily(idx))


@settings(max_examples=80, deadline=None)
@given(seeds)
def test_permutation_invariance(seed):
    rng = random.Random(seed)
    fam = rand_family(rng)
    perm = list(range(len(fam)))
    rng.shuffle(perm)
    assert gp_check(fam) == gp_check(fam.subfamily(perm))


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_change_of_basis_invariance(seed):
    rng = random.Random(seed)
    fam = rand_family(rng)
    T = rand_invertible_int(rng, fam.ambient_dim)
    for m in METHODS:
        assert gp_check(fam, m) == gp_check(fam.transform(T), m)


@settings(max_examples=80, deadline=None)
@given(seeds)
def test_constructive_soundness(seed):
    rng = random.Random(seed)
    fam = rand_family(rng)
    n = fam.ambient_dim
    vecs = [[rand_q(rng) for _ in range(n)] for _ in fam]
    z = find_common_translate(fam, vecs)
    if gp_check(fam):
        assert z is not None
        ad = adapt_coordinates(fam)
        assert ad.verify(fam)
        assert sorted(i for I in ad.index_sets for i in I) == list(range(ad.used))
    else:
        with pytest.raises(PreconditionError):
            adapt_coordinates(fam)
    if z is not None:
        for P, v in zip(fam, vecs):
            assert P.contains([a - b for a, b in zip(v, z)])
