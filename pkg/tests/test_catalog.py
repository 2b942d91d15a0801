import pytest
import sympy

from germstab.catalog import catalog_get, catalog_list, catalog_lookup, config_get, config_list
from germstab.linalg import Subspace
from germstab.stability import (
    check_infinitesimal_stability,
    check_normal_crossing,
    default_order,
    theorem1_local_equivalence,
)
from _gen import to_sympy


def stratum_oracle(exprs, xs):
    """Tangent image of the singularity stratum through 0, computed symbolically.

    Iterates the Boardman construction: starting from the whole source, add
    the minors cutting out the locus where df restricted to the current
    stratum keeps its rank at 0, until df is injective on the tangent space
    of the stratum.  Returns the image of that tangent space under df(0).
    """
    m = len(xs)
    origin = {x: 0 for x in xs}
    J = sympy.Matrix([[sympy.diff(f, x) for x in xs] for f in exprs])
    E = []
    for _ in range(m + 1):
        grads = sympy.Matrix([[sympy.diff(e, x) for x in xs] for e in E]) if E else sympy.zeros(0, m)
        stacked = J.col_join(grads)
        rho = stacked.subs(origin).rank()
        if rho == m:
            tangent = grads.subs(origin).nullspace() if E else [sympy.eye(m)[:, i] for i in range(m)]
            J0 = J.subs(origin)
            image = [list(J0 * t) for t in tangent]
            return Subspace(len(exprs), [[sympy.Rational(a) for a in v] for v in image] if image else [])
        minors = []
        rows, cols = stacked.shape
        from itertools import combinations
        for ri in combinations(range(rows), rho + 1):
            for ci in combinations(range(cols), rho + 1):
                d = sympy.expand(stacked.extract(list(ri), list(ci)).det())
                if d != 0:
                    minors.append(d)
        E = E + minors
    raise AssertionError("stratum iteration did not terminate")


MORIN_LIKE = [e for e in catalog_list() if catalog_get(e).expected_stable]


@pytest.mark.parametrize("name", MORIN_LIKE)
def test_stratum_tangent_matches_oracle(name):
    e = catalog_get(name)
    xs = sympy.symbols(f"x0:{e.source_dim}")
    exprs = [to_sympy(c, xs) for c in e.germ]
    P = stratum_oracle(exprs, xs)
    P = Subspace(e.target_dim, [[int(a) if a == int(a) else a for a in v] for v in P.vectors()])
    assert P == e.stratum_tangent


@pytest.mark.parametrize("name", catalog_list())
def test_entry_verdicts_are_order_robust(name):
    e = catalog_get(name)
    n = e.target_dim
    for k in (default_order(n), default_order(n) + 1):
        assert check_infinitesimal_stability(e.config(), k).stable == e.expected_stable


@pytest.mark.parametrize("name", config_list())
def test_config_verdicts(name):
    c = config_get(name)
    n = c.target_dim
    for k in (n + 1, n + 2):
        rep = theorem1_local_equivalence(c.config, k)
        assert rep.infinitesimal.stable == c.expected_stable
        assert rep.agree


def test_catalog_examples():
    fold = catalog_get("fold_1_1")
    assert fold.stratum_tangent == Subspace.zero(1) and fold.expected_stable
    reg = catalog_get("regular_1_1")
    assert reg.stratum_tangent == Subspace.full(1)
    assert catalog_get("fold_2_2").stratum_tangent == Subspace.coordinate(2, [0])
    assert catalog_get("cusp_2_2").stratum_tangent.dim == 0
    assert catalog_get("crosscap_2_3").stratum_tangent.dim == 0
    assert not catalog_get("cubic_1_1").expected_stable


def test_catalog_order_handling():
    assert catalog_get("cusp_2_2", 5).germ.order == 5
    assert catalog_get("cusp_2_2").germ.order == 4
    with pytest.raises(ValueError):
        catalog_get("swallowtail_3_3", 3)
    with pytest.raises(KeyError):
        catalog_get("nope")
    with pytest.raises(KeyError):
        config_get("nope")


def test_config_coverage():
    names = config_list()
    assert len(names) >= 12
    dims = {(config_get(c).source_dim, config_get(c).target_dim) for c in names}
    assert {(1, 1), (2, 2), (2, 3)} <= dims
    verdicts = {config_get(c).expected_stable for c in names}
    assert verdicts == {True, False}


def test_lookup_prefers_configs():
    assert catalog_lookup("fold_2_2").__class__.__name__ == "CatalogConfig"
    assert catalog_lookup("cubic_1_1").__class__.__name__ == "CatalogEntry"


def test_normal_crossing_needs_every_germ_stable():
    assert not check_normal_crossing(config_get("lips_2_2").config)
