"""Exact finite-jet stability checks for map germs and multigerms."""

from .catalog import CatalogConfig, CatalogEntry, catalog_get, catalog_list, config_get, config_list
from .general_position import (
    CoordinateAdaptation,
    PreconditionError,
    SubspaceFamily,
    adapt_coordinates,
    find_common_translate,
    gp_check,
)
from .jets import Jet, MapGermJet, jet_compose, jet_mul, jet_partial, monomial_basis
from .linalg import Matrix, Subspace, cokernel_basis, rref, solve, subspace_intersection, subspace_sum
from .problem import ProblemFile, Report, parse_problem, run_query, serialize
from .reduction import AdaptedMultigerm, ReducedSystem, adapt_multigerm, reduce_system, solve_reduced
from .stability import (
    MultigermConfig,
    SourceVectorField,
    StabilityVerdict,
    TargetVectorField,
    VectorFieldAlongGerm,
    assemble_operator,
    check_infinitesimal_stability,
    check_normal_crossing,
    theorem1_local_equivalence,
    tf_apply,
    wf_apply,
)

__version__ = "0.1.0"

__all__ = [
    "CatalogConfig",
    "CatalogEntry",
    "catalog_get",
    "catalog_list",
    "config_get",
    "config_list",
    "CoordinateAdaptation",
    "PreconditionError",
    "SubspaceFamily",
    "adapt_coordinates",
    "find_common_translate",
    "gp_check",
    "Jet",
    "MapGermJet",
    "jet_compose",
    "jet_mul",
    "jet_partial",
    "monomial_basis",
    "Matrix",
    "Subspace",
    "cokernel_basis",
    "rref",
    "solve",
    "subspace_intersection",
    "subspace_sum",
    "ProblemFile",
    "Report",
    "parse_problem",
    "run_query",
    "serialize",
    "AdaptedMultigerm",
    "ReducedSystem",
    "adapt_multigerm",
    "reduce_system",
    "solve_reduced",
    "MultigermConfig",
    "SourceVectorField",
    "StabilityVerdict",
    "TargetVectorField",
    "VectorFieldAlongGerm",
    "assemble_operator",
    "check_infinitesimal_stability",
    "check_normal_crossing",
    "theorem1_local_equivalence",
    "tf_apply",
    "wf_apply",
]
