"""Mutual transversality of linear subspaces and adapted target coordinates.

A family P_1, ..., P_s of subspaces of Q = Q^n is in general position when
every member is transverse to the intersection of the others.  Four
independent decision routes are provided; they must always agree.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .linalg import (
    Matrix,
    Subspace,
    annihilator,
    rank,
    solve,
    subspace_intersection,
    subspace_sum,
)

__all__ = [
    "SubspaceFamily",
    "CoordinateAdaptation",
    "PreconditionError",
    "METHODS",
    "gp_check",
    "find_common_translate",
    "adapt_coordinates",
]

METHODS = ("direct", "quotient", "diagonal", "translate")


class PreconditionError(ValueError):
    """An operation's mathematical precondition does not hold."""


@dataclass(frozen=True)
class SubspaceFamily:
    ambient_dim: int
    members: tuple

    def __init__(self, members: Sequence[Subspace], ambient_dim: int | None = None):
        members = tuple(members)
        if not members:
            raise ValueError("a subspace family needs at least one member")
        n = members[0].ambient_dim if ambient_dim is None else ambient_dim
        for i, P in enumerate(members):
            if P.ambient_dim != n:
                raise ValueError(f"member {i} lives in Q^{P.ambient_dim}, expected Q^{n}")
        object.__setattr__(self, "ambient_dim", n)
        object.__setattr__(self, "members", members)

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __getitem__(self, i):
        return self.members[i]

    def transform(self, T: Matrix) -> "SubspaceFamily":
        return SubspaceFamily([P.transform(T) for P in self.members])

    def subfamily(self, indices: Sequence[int]) -> "SubspaceFamily":
        return SubspaceFamily([self.members[i] for i in indices])


def _as_family(family) -> SubspaceFamily:
    return family if isinstance(family, SubspaceFamily) else SubspaceFamily(family)


def gp_check(family, method: str = "direct") -> bool:
    """Decide whether the family is in general position.

    Parameters
    ----------
    family : SubspaceFamily or sequence of Subspace
    method : {"direct", "quotient", "diagonal", "translate"}
        ``direct``: Q = P_i + (intersection of the others) for every i.
        ``quotient``: the diagonal map Q -> sum_i Q/P_i is onto.
        ``diagonal``: the diagonal of sum_i Q together with sum_i P_i spans sum_i Q.
        ``translate``: every tuple (v_1, ..., v_s) from a spanning set admits z
        with v_i - z in P_i.
    """
    family = _as_family(family)
    if len(family) < 2:
        raise ValueError("general position is defined for families of at least two subspaces")
    try:
        check = _CHECKS[method]
    except KeyError:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}") from None
    return check(family)


def _gp_direct(family: SubspaceFamily) -> bool:
    n = family.ambient_dim
    for i, P in enumerate(family):
        others = [Q for j, Q in enumerate(family) if j != i]
        if subspace_sum(P, subspace_intersection(others)).dim != n:
            return False
    return True


def _gp_quotient(family: SubspaceFamily) -> bool:
    # Q/P_i is coordinatised by a basis of linear forms vanishing on P_i
    n = family.ambient_dim
    forms = []
    for P in family:
        forms.extend(annihilator(P).vectors())
    if not forms:
        return True
    return rank(Matrix.from_rows(forms, n)) == len(forms)


def _gp_diagonal(family: SubspaceFamily) -> bool:
    n, s = family.ambient_dim, len(family)
    cols = []
    for a in range(n):
        cols.append([int(r % n == a) for r in range(s * n)])
    for i, P in enumerate(family):
        for v in P.vectors():
            col = [Fraction(0)] * (s * n)
            col[i * n:(i + 1) * n] = v
            cols.append(col)
    return rank(Matrix.from_columns(cols, s * n)) == s * n


def _gp_translate(family: SubspaceFamily) -> bool:
    n, s = family.ambient_dim, len(family)
    zero = [0] * n
    for i in range(s):
        for a in range(n):
            vs = [zero] * s
            vs[i] = [int(b == a) for b in range(n)]
            if find_common_translate(family, vs, _constructive_only=True) is None:
                return False
    return True


_CHECKS = {
    "direct": _gp_direct,
    "quotient": _gp_quotient,
    "diagonal": _gp_diagonal,
    "translate": _gp_translate,
}


def _is_translate(family, vectors, z) -> bool:
    return all(P.contains([a - b for a, b in zip(v, z)]) for P, v in zip(family, vectors))


def _split(P: Subspace, R: Subspace, v):
    """Write v = p + r with p in P, r in R; return r or None."""
    n = P.ambient_dim
    pv, rv = P.vectors(), R.vectors()
    if not pv and not rv:
        return [Fraction(0)] * n if not any(v) else None
    A = Matrix.from_columns(pv + rv, n)
    x = solve(A, v)
    if x is None:
        return None
    r = [Fraction(0)] * n
    for c, w in zip(x[len(pv):], rv):
        if c:
            r = [a + c * b for a, b in zip(r, w)]
    return r


def find_common_translate(family, vectors: Sequence[Sequence], _constructive_only: bool = False):
    """Find z with v_i - z in P_i for every i, or return None.

    The general-position construction is tried first: write each v_i as an
    element of P_i plus some y_i lying in all the other members, then take
    z = sum of the y_i.  When that fails a direct linear solve is attempted,
    which can still succeed for special vectors.
    """
    family = _as_family(family)
    n, s = family.ambient_dim, len(family)
    vectors = [[Fraction(x) for x in v] for v in vectors]
    if len(vectors) != s or any(len(v) != n for v in vectors):
        raise ValueError("need one vector of the ambient dimension per member")
    if s == 1:
        return vectors[0]

    z = [Fraction(0)] * n
    ok = True
    for i, P in enumerate(family):
        rest = subspace_intersection([Q for j, Q in enumerate(family) if j != i])
        y = _split(P, rest, vectors[i])
        if y is None:
            ok = False
            break
        z = [a + b for a, b in zip(z, y)]
    if ok and _is_translate(family, vectors, z):
        return z
    if _constructive_only:
        return None

    # A_i z = A_i v_i for the forms A_i cutting out P_i
    rows, rhs = [], []
    for P, v in zip(family, vectors):
        for form in annihilator(P).vectors():
            rows.append(form)
            rhs.append(sum((a * b for a, b in zip(form, v)), Fraction(0)))
    if not rows:
        return [Fraction(0)] * n
    z = solve(Matrix.from_rows(rows, n), rhs)
    if z is None or not _is_translate(family, vectors, z):
        return None
    return z


@dataclass(frozen=True)
class CoordinateAdaptation:
    """Linear target coordinates y' = L y adapted to a family.

    In the new coordinates each member P_l is exactly {y'_i = 0 : i in I_l}.
    Index sets are 0-based.
    """

    change_of_basis: Matrix
    index_sets: tuple
    complements: tuple

    @property
    def used(self) -> int:
        """Number of coordinates claimed by the index sets (i_1 + ... + i_s)."""
        return sum(len(I) for I in self.index_sets)

    def inverse(self) -> Matrix:
        n = self.change_of_basis.rows
        cols = [solve(self.change_of_basis, [int(i == j) for i in range(n)]) for j in range(n)]
        return Matrix.from_columns(cols, n)

    def verify(self, family) -> bool:
        family = _as_family(family)
        L = self.change_of_basis
        n = family.ambient_dim
        if rank(L) != n:
            return False
        seen = set()
        for P, I, Ibar in zip(family, self.index_sets, self.complements):
            if len(I) != P.codim or seen & set(I) or set(I) | set(Ibar) != set(range(n)) or set(I) & set(Ibar):
                return False
            seen |= set(I)
            if Subspace(n, [L @ v for v in P.vectors()]) != Subspace.coordinate(n, Ibar):
                return False
        return seen == set(range(self.used))


def adapt_coordinates(family) -> CoordinateAdaptation:
    """Build coordinates in which every P_l is a coordinate subspace.

    Step l appends a basis of the forms vanishing on P_l to the forms already
    chosen; transversality of P_l with the intersection of the earlier members
    keeps them independent.  The remaining rows complete a basis with standard
    forms.  A single-member family is accepted.
    """
    family = _as_family(family)
    n = family.ambient_dim
    forms = []
    index_sets = []
    for idx, P in enumerate(family):
        new = annihilator(P).vectors()
        if new and rank(Matrix.from_rows(forms + new, n)) != len(forms) + len(new):
            raise PreconditionError(
                f"member {idx} is not transverse to the intersection of the preceding members; "
                "the family is not in general position"
            )
        index_sets.append(tuple(range(len(forms), len(forms) + len(new))))
        forms.extend(new)
    for a in range(n):
        if len(forms) == n:
            break
        e = [int(b == a) for b in range(n)]
        if rank(Matrix.from_rows(forms + [e], n)) == len(forms) + 1:
            forms.append(e)
    L = Matrix.from_rows(forms, n)
    complements = tuple(tuple(i for i in range(n) if i not in I) for I in index_sets)
    out = CoordinateAdaptation(L, tuple(index_sets), complements)
    if not out.verify(family):
        raise AssertionError("adapted coordinates failed their postcondition")
    return out
