"""Truncated multivariate polynomials with exact rational coefficients.

A :class:`Jet` is the k-jet of a function germ at the origin.  Multi-indices
are plain tuples of non-negative ints; the global monomial order is graded
lexicographic (degree first, then lexicographic with ``x1`` largest).
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement
from math import comb
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

__all__ = [
    "Jet",
    "MapGermJet",
    "monomial_basis",
    "monomial_index",
    "glex_key",
    "jet_mul",
    "jet_compose",
    "jet_partial",
    "composed_monomials",
]


def glex_key(exps: tuple) -> tuple:
    return (sum(exps), tuple(-e for e in exps))


@lru_cache(maxsize=None)
def monomial_basis(num_vars: int, order: int) -> tuple:
    """All exponent tuples of degree <= `order` in graded-lex order.

    >>> monomial_basis(2, 2)
    ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2))
    """
    if num_vars < 1 or order < 0:
        raise ValueError("monomial_basis needs num_vars >= 1 and order >= 0")
    out = []
    for d in range(order + 1):
        block = []
        for combo in combinations_with_replacement(range(num_vars), d):
            e = [0] * num_vars
            for v in combo:
                e[v] += 1
            block.append(tuple(e))
        block.sort(key=glex_key)
        out.extend(block)
    assert len(out) == comb(num_vars + order, order)
    return tuple(out)


@lru_cache(maxsize=None)
def monomial_index(num_vars: int, order: int) -> Mapping:
    """Exponent tuple -> position in :func:`monomial_basis`."""
    return MappingProxyType({e: i for i, e in enumerate(monomial_basis(num_vars, order))})


def _as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    if isinstance(c, str):
        return Fraction(c)
    raise TypeError(f"non-rational coefficient {c!r}")


class Jet:
    """k-jet of a function germ in `num_vars` variables.

    Coefficients are Fractions keyed by exponent tuples.  Zero coefficients and
    terms of degree above `order` are never stored, so equality is structural.
    """

    __slots__ = ("num_vars", "order", "_terms", "_hash")

    def __init__(self, num_vars: int, order: int, terms: Mapping | None = None):
        if num_vars < 1:
            raise ValueError("a jet needs at least one variable")
        if order < 0:
            raise ValueError("jet order must be non-negative")
        clean = {}
        for e, c in (terms or {}).items():
            e = tuple(int(a) for a in e)
            if len(e) != num_vars or any(a < 0 for a in e):
                raise ValueError(f"bad multi-index {e} for {num_vars} variables")
            if sum(e) > order:
                continue
            c = _as_fraction(c)
            if c:
                clean[e] = clean.get(e, 0) + c
        self.num_vars = num_vars
        self.order = order
        self._terms = {e: c for e, c in clean.items() if c}
        self._hash = None

    @classmethod
    def _raw(cls, num_vars, order, terms):
        # trusted constructor: terms already clean
        j = cls.__new__(cls)
        j.num_vars = num_vars
        j.order = order
        j._terms = terms
        j._hash = None
        return j

    # constructors
    @classmethod
    def zero(cls, num_vars: int, order: int) -> "Jet":
        return cls._raw(num_vars, order, {})

    @classmethod
    def constant(cls, c, num_vars: int, order: int) -> "Jet":
        return cls(num_vars, order, {(0,) * num_vars: c})

    @classmethod
    def variable(cls, i: int, num_vars: int, order: int) -> "Jet":
        """The coordinate function x_i (0-based)."""
        e = [0] * num_vars
        e[i] = 1
        return cls(num_vars, order, {tuple(e): 1})

    @classmethod
    def monomial(cls, exps: Sequence[int], order: int, coeff=1) -> "Jet":
        return cls(len(exps), order, {tuple(exps): coeff})

    @classmethod
    def from_coefficients(cls, coeffs: Sequence, num_vars: int, order: int) -> "Jet":
        basis = monomial_basis(num_vars, order)
        if len(coeffs) != len(basis):
            raise ValueError("coefficient vector has the wrong length")
        return cls(num_vars, order, dict(zip(basis, coeffs)))

    # access
    @property
    def terms(self) -> Mapping:
        return MappingProxyType(self._terms)

    def coeff(self, exps) -> Fraction:
        return self._terms.get(tuple(exps), Fraction(0))

    def coefficients(self) -> list:
        """Coefficient vector in graded-lex order over monomials of degree <= order."""
        zero = Fraction(0)
        return [self._terms.get(e, zero) for e in monomial_basis(self.num_vars, self.order)]

    def constant_term(self) -> Fraction:
        return self.coeff((0,) * self.num_vars)

    def is_zero(self) -> bool:
        return not self._terms

    def degree(self) -> int:
        return max((sum(e) for e in self._terms), default=-1)

    def low_degree(self) -> int:
        """Smallest degree of a stored term (-1 for the zero jet)."""
        return min((sum(e) for e in self._terms), default=-1)

    def __len__(self):
        return len(self._terms)

    def sorted_terms(self) -> list:
        return sorted(self._terms.items(), key=lambda t: glex_key(t[0]))

    def truncate(self, order: int) -> "Jet":
        return Jet(self.num_vars, order, self._terms)

    # arithmetic
    def _check(self, other: "Jet"):
        if not isinstance(other, Jet):
            raise TypeError(f"expected Jet, got {type(other).__name__}")
        if other.num_vars != self.num_vars or other.order != self.order:
            raise ValueError(
                f"jet mismatch: ({self.num_vars} vars, order {self.order}) vs "
                f"({other.num_vars} vars, order {other.order})"
            )

    def _coerce(self, other):
        if isinstance(other, Jet):
            self._check(other)
            return other
        return Jet.constant(_as_fraction(other), self.num_vars, self.order)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self._terms)
        for e, c in other._terms.items():
            s = out.get(e, 0) + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return Jet._raw(self.num_vars, self.order, out)

    __radd__ = __add__

    def __neg__(self):
        return Jet._raw(self.num_vars, self.order, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, Jet):
            return jet_mul(self, other)
        c = _as_fraction(other)
        if not c:
            return Jet.zero(self.num_vars, self.order)
        return Jet._raw(self.num_vars, self.order, {e: c * v for e, v in self._terms.items()})

    def __rmul__(self, other):
        return self * other

    def __pow__(self, p: int):
        if not isinstance(p, int) or p < 0:
            raise ValueError("jets only support non-negative integer powers")
        out = Jet.constant(1, self.num_vars, self.order)
        base = self
        while p:
            if p & 1:
                out = out * base
            p >>= 1
            if p:
                base = base * base
        return out

    def __eq__(self, other):
        if not isinstance(other, Jet):
            return NotImplemented
        return (
            self.num_vars == other.num_vars
            and self.order == other.order
            and self._terms == other._terms
        )

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.num_vars, self.order, frozenset(self._terms.items())))
        return self._hash

    def partial(self, i: int) -> "Jet":
        return jet_partial(self, i)

    def evaluate(self, point: Sequence) -> Fraction:
        total = Fraction(0)
        for e, c in self._terms.items():
            t = c
            for x, a in zip(point, e):
                if a:
                    t *= Fraction(x) ** a
            total += t
        return total

    def to_str(self, names: Sequence[str] | None = None) -> str:
        """Human-readable form, parseable by :mod:`germstab.problem`."""
        names = list(names) if names else default_names(self.num_vars)
        if not self._terms:
            return "0"
        parts = []
        for e, c in self.sorted_terms():
            mono = "*".join(n if a == 1 else f"{n}^{a}" for n, a in zip(names, e) if a)
            mag = abs(c)
            if not mono:
                body = str(mag)
            elif mag == 1:
                body = mono
            else:
                body = f"{mag}*{mono}"
            sign = "-" if c < 0 else "+"
            parts.append((sign, body))
        first_sign, first = parts[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    def __str__(self):
        return self.to_str()

    def __repr__(self):
        return f"Jet({self.to_str()!r}, vars={self.num_vars}, order={self.order})"


def default_names(m: int) -> list:
    if m == 1:
        return ["x"]
    if m == 2:
        return ["x", "y"]
    if m == 3:
        return ["x", "y", "z"]
    return [f"x{i + 1}" for i in range(m)]


def jet_mul(a: Jet, b: Jet) -> Jet:
    """Product of two jets truncated at their common order."""
    a._check(b)
    k = a.order
    out: dict = {}
    bt = [(e, c, sum(e)) for e, c in b._terms.items()]
    for ea, ca in a._terms.items():
        da = sum(ea)
        room = k - da
        if room < 0:
            continue
        for eb, cb, db in bt:
            if db > room:
                continue
            e = tuple(x + y for x, y in zip(ea, eb))
            out[e] = out.get(e, 0) + ca * cb
    return Jet._raw(a.num_vars, k, {e: c for e, c in out.items() if c})


def jet_partial(a: Jet, i: int) -> Jet:
    """Formal partial derivative in variable `i` (0-based); declared order is kept."""
    if not 0 <= i < a.num_vars:
        raise ValueError(f"variable index {i} out of range for {a.num_vars} variables")
    out = {}
    for e, c in a._terms.items():
        p = e[i]
        if p:
            d = list(e)
            d[i] = p - 1
            out[tuple(d)] = c * p
    return Jet._raw(a.num_vars, a.order, out)


class MapGermJet:
    """k-jet of a based map germ (Q^m, 0) -> (Q^n, 0).

    `components` holds n jets in m variables, all of the same order and all
    with zero constant term.
    """

    __slots__ = ("components", "_powers")

    def __init__(self, components: Iterable[Jet]):
        comps = tuple(components)
        if not comps:
            raise ValueError("a map germ needs at least one component")
        m, k = comps[0].num_vars, comps[0].order
        for idx, c in enumerate(comps):
            if not isinstance(c, Jet):
                raise TypeError("components must be Jets")
            if c.num_vars != m or c.order != k:
                raise ValueError(f"component {idx} has inconsistent variables/order")
            if c.constant_term():
                raise ValueError(f"component {idx} has nonzero constant term; germs must be based at 0")
        self.components = comps
        self._powers = None

    @classmethod
    def from_terms(cls, source_dim: int, order: int, comps: Sequence[Mapping]) -> "MapGermJet":
        return cls(Jet(source_dim, order, t) for t in comps)

    @classmethod
    def identity(cls, m: int, order: int) -> "MapGermJet":
        return cls(Jet.variable(i, m, order) for i in range(m))

    @property
    def source_dim(self) -> int:
        return self.components[0].num_vars

    @property
    def target_dim(self) -> int:
        return len(self.components)

    @property
    def order(self) -> int:
        return self.components[0].order

    def __getitem__(self, i) -> Jet:
        return self.components[i]

    def __iter__(self):
        return iter(self.components)

    def __len__(self):
        return len(self.components)

    def truncate(self, order: int) -> "MapGermJet":
        return MapGermJet(c.truncate(order) for c in self.components)

    def jacobian_at_zero(self) -> list:
        """n x m matrix of linear coefficients (Fractions)."""
        m = self.source_dim
        rows = []
        for c in self.components:
            row = []
            for j in range(m):
                e = [0] * m
                e[j] = 1
                row.append(c.coeff(e))
            rows.append(row)
        return rows

    def linear_change(self, target=None, source=None) -> "MapGermJet":
        """Return T . f(S x) for a target matrix T (n x n) and source matrix S (m x m)."""
        m, k = self.source_dim, self.order
        comps = list(self.components)
        if source is not None:
            lin = MapGermJet(_linear_form(row, m, k) for row in source)
            comps = [jet_compose(c, lin) for c in comps]
        if target is not None:
            comps = [
                sum((comps[j] * row[j] for j in range(len(comps)) if row[j]), Jet.zero(m, k))
                for row in target
            ]
        return MapGermJet(comps)

    def powers(self) -> dict:
        """Cache of truncated products f^gamma for every target monomial of degree <= order."""
        if self._powers is None:
            self._powers = composed_monomials(self, self.order)
        return self._powers

    def __eq__(self, other):
        return isinstance(other, MapGermJet) and self.components == other.components

    def __hash__(self):
        return hash(self.components)

    def to_str(self, names=None) -> str:
        return "(" + ", ".join(c.to_str(names) for c in self.components) + ")"

    def __repr__(self):
        return f"MapGermJet{self.to_str()}"


def composed_monomials(f: MapGermJet, order: int) -> dict:
    """Map each target exponent gamma (degree <= order) to the jet f^gamma."""
    n, m, k = f.target_dim, f.source_dim, f.order
    if order > k:
        raise ValueError("cannot compose beyond the germ's order")
    out = {}
    for gamma in monomial_basis(n, order):
        if not any(gamma):
            out[gamma] = Jet.constant(1, m, k)
            continue
        j = next(i for i, g in enumerate(gamma) if g)
        prev = list(gamma)
        prev[j] -= 1
        out[gamma] = jet_mul(out[tuple(prev)], f.components[j])
    return out


def jet_compose(outer: Jet, inner: MapGermJet) -> Jet:
    """outer(inner_1, ..., inner_n) truncated at the common order."""
    if not isinstance(inner, MapGermJet):
        raise TypeError("inner must be a MapGermJet")
    if outer.num_vars != inner.target_dim:
        raise ValueError(
            f"outer jet has {outer.num_vars} variables but inner germ has {inner.target_dim} components"
        )
    if outer.order != inner.order:
        raise ValueError("outer and inner orders differ")
    # MapGermJet already rejects nonzero constant terms
    powers = inner.powers()
    m, k = inner.source_dim, inner.order
    out: dict = {}
    for gamma, c in outer._terms.items():
        for e, v in powers[gamma]._terms.items():
            out[e] = out.get(e, 0) + c * v
    return Jet._raw(m, k, {e: c for e, c in out.items() if c})


def _linear_form(row, m, k) -> Jet:
    return Jet(m, k, {tuple(int(i == j) for i in range(m)): c for j, c in enumerate(row)})
