import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from germstab.catalog import config_get, config_list
from germstab.general_position import PreconditionError
from germstab.jets import Jet, MapGermJet, jet_compose
from germstab.linalg import Subspace
from germstab.polyparse import parse_polynomial
from germstab.reduction import (
    adapt_multigerm,
    invert_germ,
    reduce_system,
    solve_reduced,
    solve_via_reduction,
)
from germstab.stability import (
    MultigermConfig,
    SourceVectorField,
    TargetVectorField,
    VectorFieldAlongGerm,
    tf_apply,
    wf_apply,
)
from _gen import rand_germ, rand_jet

XY = ["x", "y"]


def germ(text, m, k):
    return MapGermJet(parse_polynomial(t, XY[:m], k) for t in text.split(","))


def fields(rng, m, n, k, s, density=0.5):
    return [VectorFieldAlongGerm([rand_jet(rng, m, k, density) for _ in range(n)]) for _ in range(s)]


def stable_configs(k_extra=1):
    out = []
    for name in config_list():
        c = config_get(name)
        if c.expected_stable:
            n = c.target_dim
            out.append((name, config_get(name, n + k_extra).config))
    return out


# --- jet inversion ---------------------------------------------------------------

def test_invert_germ():
    psi = germ("x + x^2, y - x*y + y^3", 2, 4)
    phi = invert_germ(psi)
    ident = MapGermJet.identity(2, 4)
    assert MapGermJet(jet_compose(c, phi) for c in psi) == ident
    assert MapGermJet(jet_compose(c, psi) for c in phi) == ident


def test_invert_singular():
    with pytest.raises(PreconditionError):
        invert_germ(germ("x^2, y", 2, 3))


# --- adaptation examples --------------------------------------------------------------

def test_adapt_fold():
    c = MultigermConfig((germ("x, y^2", 2, 3),), (Subspace.coordinate(2, [0]),))
    ad = adapt_multigerm(c)
    assert ad.verify()
    # the first target coordinate is the form vanishing on P = x-axis
    (I,), (Ibar,) = ad.index_sets, ad.complements
    assert I == (0,) and Ibar == (1,)
    assert ad.sigma == ({1: 0},) and ad.free_indices == ((1,),)
    assert ad.base.germs[0] == germ("y^2, x", 2, 3)


def test_adapt_nonlinear_source_change():
    c = MultigermConfig((germ("x + x^2, y^2", 2, 3),), (Subspace.coordinate(2, [0]),))
    ad = adapt_multigerm(c)
    assert ad.verify()
    psi, phi = ad.source_changes[0]
    assert psi[0] == parse_polynomial("x + x^2", XY, 3)
    f = ad.base.germs[0]
    assert f[1] == Jet.variable(0, 2, 3)
    assert f[0] == parse_polynomial("y^2", XY, 3)


def test_adapt_cusp_vacuous():
    c = MultigermConfig((germ("x, y^3 + x*y", 2, 3),), (Subspace.zero(2),))
    ad = adapt_multigerm(c)
    assert ad.sigma == ({},) and ad.free_indices == ((0, 1),)
    assert ad.index_sets == ((0, 1),)
    assert ad.base.germs[0] == c.germs[0]


def test_adapt_errors_are_distinct():
    fold = germ("x^2", 1, 2)
    z = Subspace.zero(1)
    with pytest.raises(PreconditionError, match="general position"):
        adapt_multigerm(MultigermConfig((fold, fold), (z, z)))
    # stratum says the whole line, but the germ is singular
    with pytest.raises(PreconditionError, match="inconsistent"):
        adapt_multigerm(MultigermConfig((fold,), (Subspace.full(1),)))
    with pytest.raises(ValueError, match="no stratum"):
        adapt_multigerm(MultigermConfig((fold,)))


# --- reduced system examples ---------------------------------------------------------

def test_fold_reduced_equations():
    c = MultigermConfig((germ("x, y^2", 2, 3),), (Subspace.coordinate(2, [0]),))
    red = reduce_system(adapt_multigerm(c))
    # adapted germ is (y^2, x): I = {first}, sigma(second) = x
    eqs = red.equations(XY, ["y1", "y2"])
    assert eqs == ["p1: (2*y)*ut[y] + vt[y1] o f = wt[y1]", "p1: ut[x] + vt[y2] o f = wt[y2]"]


def test_zero_rhs_zero_shift():
    name, c = stable_configs()[0]
    red = reduce_system(adapt_multigerm(c))
    m, n, k = c.germs[0].source_dim, c.target_dim, c.order
    w = [VectorFieldAlongGerm.zero(n, m, k) for _ in c.germs]
    assert all(x.is_zero() for x in red.transform_rhs(w, [0] * n))


@pytest.mark.parametrize("name,c", stable_configs(), ids=lambda x: x if isinstance(x, str) else "")
def test_planted_forward_backward(name, c):
    """Random (u, v) -> w by forward evaluation; the transformed pair solves the reduced system."""
    rng = random.Random(len(name))
    ad = adapt_multigerm(c)
    red = reduce_system(ad)
    cfg = ad.base
    m, n, k = cfg.germs[0].source_dim, cfg.target_dim, cfg.order
    for _ in range(5):
        u = [SourceVectorField([rand_jet(rng, m, k) for _ in range(m)]) for _ in cfg.germs]
        v = TargetVectorField([rand_jet(rng, n, k) for _ in range(n)])
        w = [tf_apply(f, ul) + wf_apply(f, v) for f, ul in zip(cfg.germs, u)]
        c0 = [v[j].constant_term() for j in range(n)]
        wt = red.transform_rhs(w, c0)
        vt = TargetVectorField([v[j] - c0[j] for j in range(n)])
        ut = []
        for l, ul in enumerate(u):
            comps = list(ul)
            for kk, i in ad.sigma[l].items():
                comps[i] = comps[i] + c0[kk]
            ut.append(SourceVectorField(comps))
        # the reduced residual is exactly the negative of the dropped ideal term
        res = red.reduced_residual(ut, vt, wt)
        assert res == tuple(-d for d in red.dropped_term(vt))
        back_u, back_v = red.back_substitute(ut, vt, c0)
        assert list(back_v) == list(v) and [list(x) for x in back_u] == [list(x) for x in u]


@pytest.mark.parametrize("name,c", stable_configs(), ids=lambda x: x if isinstance(x, str) else "")
def test_pipeline_random_rhs(name, c):
    rng = random.Random(100 + len(name))
    red = reduce_system(adapt_multigerm(c))
    m, n, k = c.germs[0].source_dim, c.target_dim, c.order
    for _ in range(10):
        res = solve_via_reduction(red, fields(rng, m, n, k, len(c)))
        assert res.verify() and res.dropped_in_ideal
        for r, d in zip(res.residual, res.dropped):
            assert r == d


@pytest.mark.parametrize("name", ["fold_regular_1_1", "two_regular_1_1", "transverse_folds_2_2",
                                  "three_folds_2_2", "cusp_fold_2_2", "two_folds_1_1", "lips_2_2"])
def test_reduction_soundness(name):
    """Solvability modulo the ideal agrees between the full and reduced systems."""
    c = config_get(name)
    n = c.target_dim
    cfg = config_get(name, n + 1).config
    try:
        red = reduce_system(adapt_multigerm(cfg))
    except PreconditionError:
        assert not c.expected_stable
        return
    rng = random.Random(7)
    m, k = cfg.germs[0].source_dim, cfg.order
    for _ in range(15):
        w = fields(rng, m, n, k, len(cfg), density=rng.choice([0.1, 0.5]))
        assert red.unreduced_solvable(w) == red.reduced_solvable(w)


def test_solve_reduced_single_germ_passthrough():
    c = config_get("fold_2_2", 3).config
    red = reduce_system(adapt_multigerm(c))
    rng = random.Random(2)
    w = fields(rng, 2, 2, 3, 1)
    wt = red.transform_rhs(w, [0, 0])
    a, b = red.solve_germ(0, wt[0])
    ut, vt = solve_reduced(red, [(a, b)], wt)
    I = red.adapted.index_sets[0]
    for kk in range(2):
        if kk in I:
            assert vt[kk] == b[kk]
        else:
            assert vt[kk].is_zero()
    for i in red.adapted.free_indices[0]:
        assert ut[0][i] == a[i]


def test_solve_reduced_rejects_bad_input():
    c = config_get("transverse_folds_2_2", 3).config
    red = reduce_system(adapt_multigerm(c))
    rng = random.Random(4)
    w = fields(rng, 2, 2, 3, 2)
    wt = red.transform_rhs(w, [0, 0])
    sols = [red.solve_germ(l, wt[l]) for l in range(2)]
    a, b = sols[1]
    bad = SourceVectorField([a[0], a[1] + Jet.constant(1, 2, 3)])
    with pytest.raises(PreconditionError, match="fold_2_2_vertical"):
        solve_reduced(red, [sols[0], (bad, b)], wt)


def test_solve_germ_fails_for_unstable_germ():
    c = config_get("lips_2_2", 3).config
    red = reduce_system(adapt_multigerm(c))
    rng = random.Random(5)
    failures = 0
    for _ in range(10):
        w = fields(rng, 2, 2, 3, 1)
        try:
            red.solve_germ(0, red.transform_rhs(w, [0, 0])[0])
        except PreconditionError:
            failures += 1
    assert failures > 0


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_adapted_configs(seed):
    """Random stable-looking fibres: fold and regular germs moved by random coordinates."""
    rng = random.Random(seed)
    base = config_get(rng.choice(["fold_regular_2_2", "transverse_folds_2_2", "fold_2_2"]), 3).config
    from _gen import rand_invertible_int
    T = rand_invertible_int(rng, 2)
    S = [rand_invertible_int(rng, 2) for _ in base.germs]
    cfg = base.linear_change(T, S)
    # add a random quadratic tail to the source change of each germ
    red = reduce_system(adapt_multigerm(cfg))
    for _ in range(3):
        w = fields(rng, 2, 2, 3, len(cfg))
        assert red.unreduced_solvable(w) == red.reduced_solvable(w)
        assert solve_via_reduction(red, w).verify()
