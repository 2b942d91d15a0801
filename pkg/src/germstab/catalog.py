"""Classical germs and fibers with known stability verdicts.

Single germs are normal forms (regular, fold, cusp, swallowtail, cross-cap,
immersions) plus a few unstable controls.  Fibers combine them over a common
target point.  Stratum data is the tangent image df(T Sigma_p) at the base
point, worked out by hand for each normal form.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .jets import MapGermJet, default_names
from .linalg import Subspace
from .polyparse import parse_polynomial
from .stability import MultigermConfig, default_order

__all__ = [
    "CatalogEntry",
    "CatalogConfig",
    "catalog_get",
    "catalog_list",
    "config_get",
    "config_list",
    "catalog_lookup",
]

_PARSE_ORDER = 16


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    source_dim: int
    target_dim: int
    germ: MapGermJet
    stratum_tangent: Subspace
    expected_stable: bool
    notes: str = ""

    @property
    def order(self) -> int:
        return self.germ.order

    def config(self) -> MultigermConfig:
        return MultigermConfig((self.germ,), (self.stratum_tangent,), (self.name,))


@dataclass(frozen=True)
class CatalogConfig:
    """A fiber assembled from catalog germs, with its expected verdict."""

    name: str
    members: tuple
    expected_stable: bool
    notes: str
    config: MultigermConfig

    @property
    def target_dim(self) -> int:
        return self.config.target_dim

    @property
    def source_dim(self) -> int:
        return self.config.germs[0].source_dim


# name: (m, n, components, stratum spanning vectors, expected_stable, notes)
_GERMS = {
    "regular_1_1": (1, 1, "x", [[1]], True, "submersion; every nearby point has the same germ"),
    "fold_1_1": (1, 1, "x^2", [], True, "A1 critical point, isolated"),
    "cubic_1_1": (1, 1, "x^3", [], False,
                  "degenerate critical point; the locus of equivalent germs is the point itself"),
    "regular_2_2": (2, 2, "x, y", [[1, 0], [0, 1]], True, "local diffeomorphism"),
    "fold_2_2": (2, 2, "x, y^2", [[1, 0]], True, "fold curve y = 0 maps onto the first axis"),
    "fold_2_2_mirror": (2, 2, "x, -y^2", [[1, 0]], True, "fold opening the other way, same image line"),
    "fold_2_2_vertical": (2, 2, "y^2, x", [[0, 1]], True, "fold curve y = 0 maps onto the second axis"),
    "fold_2_2_diagonal": (2, 2, "x + y^2, x", [[1, 1]], True, "fold curve y = 0 maps onto the diagonal"),
    "cusp_2_2": (2, 2, "x, y^3 + x*y", [], True, "Whitney cusp; cusp points are isolated"),
    "lips_2_2": (2, 2, "x, y^3 + x^2*y", [], False, "lips: not stable, a codimension-one transition"),
    "swallowtail_3_3": (3, 3, "x, y, z^4 + x*z^2 + y*z", [], True, "A3 Morin germ; isolated"),
    "immersion_1_2": (1, 2, "x, 0", [[1, 0]], True, "embedded curve along the first axis"),
    "immersion_1_2_vertical": (1, 2, "0, x", [[0, 1]], True, "embedded curve along the second axis"),
    "immersion_1_2_parabola": (1, 2, "x, x^2", [[1, 0]], True, "curve tangent to the first axis"),
    "crosscap_2_3": (2, 3, "x, y^2, x*y", [], True, "Whitney umbrella; cross-cap points are isolated"),
    "sheet_xy_2_3": (2, 3, "x, y, 0", [[1, 0, 0], [0, 1, 0]], True, "immersed sheet z = 0"),
    "sheet_xz_2_3": (2, 3, "x, 0, y", [[1, 0, 0], [0, 0, 1]], True, "immersed sheet y = 0"),
    "sheet_yz_2_3": (2, 3, "0, x, y", [[0, 1, 0], [0, 0, 1]], True, "immersed sheet x = 0"),
    "sheet_diag_2_3": (2, 3, "x, y, -x - y", [[1, 0, -1], [0, 1, -1]], True, "immersed sheet x + y + z = 0"),
}

# name: (member germs, expected_stable, notes)
_CONFIGS = {
    "fold_1_1": (("fold_1_1",), True, "single fold"),
    "two_folds_1_1": (("fold_1_1", "fold_1_1"), False, "two critical points with the same critical value"),
    "fold_regular_1_1": (("fold_1_1", "regular_1_1"), True, "fold plus a regular preimage"),
    "two_regular_1_1": (("regular_1_1", "regular_1_1"), True, "two regular preimages"),
    "fold_2_2": (("fold_2_2",), True, "single fold"),
    "cusp_2_2": (("cusp_2_2",), True, "single cusp"),
    "lips_2_2": (("lips_2_2",), False, "lips transition"),
    "transverse_folds_2_2": (("fold_2_2", "fold_2_2_vertical"), True, "fold curves crossing transversally"),
    "tangent_folds_2_2": (("fold_2_2", "fold_2_2_mirror"), False, "fold images tangent at the point"),
    "three_folds_2_2": (("fold_2_2", "fold_2_2_vertical", "fold_2_2_diagonal"), False,
                        "three fold curves through one point"),
    "cusp_fold_2_2": (("cusp_2_2", "fold_2_2"), False, "fold image passing through a cusp value"),
    "fold_regular_2_2": (("fold_2_2", "regular_2_2"), True, "fold plus a regular sheet"),
    "swallowtail_3_3": (("swallowtail_3_3",), True, "single swallowtail"),
    "node_1_2": (("immersion_1_2", "immersion_1_2_vertical"), True, "transverse double point of a curve"),
    "tangent_curves_1_2": (("immersion_1_2", "immersion_1_2_parabola"), False, "tacnode"),
    "crosscap_2_3": (("crosscap_2_3",), True, "single cross-cap"),
    "two_sheets_2_3": (("sheet_xy_2_3", "sheet_xz_2_3"), True, "transverse double curve of a surface"),
    "three_sheets_2_3": (("sheet_xy_2_3", "sheet_xz_2_3", "sheet_yz_2_3"), True, "triple point"),
    "four_sheets_2_3": (("sheet_xy_2_3", "sheet_xz_2_3", "sheet_yz_2_3", "sheet_diag_2_3"), False,
                        "four sheets through one point"),
    "crosscap_sheet_2_3": (("crosscap_2_3", "sheet_xy_2_3"), False, "sheet through a cross-cap point"),
}


def catalog_list() -> list:
    """Names of the single-germ entries."""
    return sorted(_GERMS)


def config_list() -> list:
    """Names of the fiber configurations."""
    return sorted(_CONFIGS)


def _degree(comps) -> int:
    return max(c.degree() for c in comps)


def catalog_get(name: str, k: int | None = None) -> CatalogEntry:
    """Entry `name` with its germ truncated to order k (default: n + 2)."""
    try:
        m, n, text, span, stable, notes = _GERMS[name]
    except KeyError:
        raise KeyError(f"unknown catalog entry {name!r}") from None
    k = default_order(n) + 1 if k is None else k
    names = default_names(m)
    comps = [parse_polynomial(t, names, _PARSE_ORDER) for t in text.split(",")]
    deg = _degree(comps)
    if k < deg:
        raise ValueError(f"order {k} is below the degree {deg} of {name!r}")
    germ = MapGermJet(c.truncate(k) for c in comps)
    stratum = Subspace(n, [[Fraction(x) for x in v] for v in span])
    return CatalogEntry(name, m, n, germ, stratum, stable, notes)


def config_get(name: str, k: int | None = None) -> CatalogConfig:
    try:
        members, stable, notes = _CONFIGS[name]
    except KeyError:
        raise KeyError(f"unknown catalog configuration {name!r}") from None
    entries = [catalog_get(e, k) for e in members]
    labels = [f"{e}_{i + 1}" if members.count(e) > 1 else e for i, e in enumerate(members)]
    cfg = MultigermConfig(
        tuple(e.germ for e in entries), tuple(e.stratum_tangent for e in entries), tuple(labels)
    )
    return CatalogConfig(name, tuple(members), stable, notes, cfg)


def catalog_lookup(name: str, k: int | None = None):
    """A configuration if `name` names one, else the single-germ entry."""
    if name in _CONFIGS:
        return config_get(name, k)
    return catalog_get(name, k)
