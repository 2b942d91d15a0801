"""Random generators and independent oracles shared by the tests."""
from __future__ import annotations

import itertools
import random
from fractions import Fraction

import sympy

from germstab.jets import Jet, MapGermJet, monomial_basis
from germstab.linalg import Matrix, Subspace


def rand_q(rng: random.Random, bound: int = 10) -> Fraction:
    return Fraction(rng.randint(-bound, bound), rng.randint(1, bound))


def rand_jet(rng, m, k, density=0.5, deg=None, bound=5, const=True) -> Jet:
    top = k if deg is None else min(deg, k)
    terms = {}
    for e in monomial_basis(m, top):
        if not const and not any(e):
            continue
        if rng.random() < density:
            terms[e] = rand_q(rng, bound)
    return Jet(m, k, terms)


def rand_germ(rng, m, n, k, density=0.5, deg=None) -> MapGermJet:
    return MapGermJet(rand_jet(rng, m, k, density, deg, const=False) for _ in range(n))


def rand_matrix(rng, r, c, bound=10, zero_prob=0.3) -> Matrix:
    return Matrix.from_rows(
        [[0 if rng.random() < zero_prob else rand_q(rng, bound) for _ in range(c)] for _ in range(r)], c
    )


def rand_invertible_int(rng, n, bound=3) -> Matrix:
    while True:
        M = Matrix.from_rows([[rng.randint(-bound, bound) for _ in range(n)] for _ in range(n)], n)
        if sym_matrix(M.to_rows()).det() != 0:
            return M


def rand_subspace(rng, n, dim=None, bound=10) -> Subspace:
    d = rng.randint(0, n) if dim is None else dim
    return Subspace(n, [[rand_q(rng, bound) for _ in range(n)] for _ in range(d)])


# --- naive oracles ---------------------------------------------------------

def to_sympy(j: Jet, syms):
    expr = sympy.Integer(0)
    for e, c in j.terms.items():
        t = sympy.Rational(c.numerator, c.denominator)
        for s, a in zip(syms, e):
            t *= s ** a
        expr += t
    return expr


def from_sympy(expr, syms, k) -> Jet:
    poly = sympy.Poly(sympy.expand(expr), *syms)
    terms = {}
    for e, c in poly.terms():
        if sum(e) <= k:
            terms[tuple(e)] = Fraction(int(c.p), int(c.q))
    return Jet(len(syms), k, terms)


def naive_mul(a: Jet, b: Jet) -> Jet:
    """Schoolbook expansion of the full product, then truncation."""
    out = {}
    for e1, c1 in a.terms.items():
        for e2, c2 in b.terms.items():
            e = tuple(x + y for x, y in zip(e1, e2))
            out[e] = out.get(e, 0) + c1 * c2
    return Jet(a.num_vars, a.order, out)


def naive_partial(a: Jet, i: int) -> Jet:
    out = {}
    for e, c in a.terms.items():
        if e[i]:
            f = list(e)
            f[i] -= 1
            out[tuple(f)] = c * e[i]
    return Jet(a.num_vars, a.order, out)


def sym(x):
    x = Fraction(x)
    return sympy.Rational(x.numerator, x.denominator)


def sym_matrix(rows):
    return sympy.Matrix([[sym(x) for x in r] for r in rows])


def minor_rank(rows) -> int:
    """Largest r with a nonzero r x r minor (brute force)."""
    r_, c_ = len(rows), len(rows[0]) if rows else 0
    for r in range(min(r_, c_), 0, -1):
        for ri in itertools.combinations(range(r_), r):
            for ci in itertools.combinations(range(c_), r):
                sub = sym_matrix([[rows[i][j] for j in ci] for i in ri])
                if sub.det() != 0:
                    return r
    return 0


def rand_family(rng, n=None, s=None, bound=10):
    """Random subspace family, biased so both verdicts occur often.

    Members are drawn either with generic rational entries or as spans of
    vectors taken from a small shared pool (which produces special
    positions: repeated lines, nested planes, coplanar triples).
    """
    from germstab.general_position import SubspaceFamily

    n = n or rng.randint(1, 6)
    s = s or rng.randint(2, 5)
    pool = [[rand_q(rng, bound) if rng.random() < 0.6 else 0 for _ in range(n)] for _ in range(rng.randint(1, n + 2))]
    members = []
    for _ in range(s):
        d = rng.choice([rng.randint(0, n), n - 1, n - 1, max(n - 2, 0)])
        if rng.random() < 0.5:
            vecs = [[rand_q(rng, bound) for _ in range(n)] for _ in range(d)]
        else:
            vecs = [rng.choice(pool) for _ in range(d)]
        members.append(Subspace(n, vecs))
    return SubspaceFamily(members)


def sympy_operator_rank(germ_exprs, m, n, k) -> tuple:
    """(rank, rows) of the stability operator built independently with sympy.

    germ_exprs: list of n-tuples of sympy expressions in x0..x{m-1}.
    """
    xs = sympy.symbols(f"x0:{m}")
    monos = [e for e in itertools.product(range(k + 1), repeat=m) if sum(e) <= k]
    tmonos = [e for e in itertools.product(range(k + 1), repeat=n) if sum(e) <= k]
    s = len(germ_exprs)

    def coeffs(expr):
        poly = sympy.Poly(sympy.expand(expr), *xs) if expr != 0 else None
        d = {}
        if poly is not None:
            for e, c in poly.terms():
                if sum(e) <= k:
                    d[tuple(e)] = c
        return [d.get(e, 0) for e in monos]

    def column(per_germ):
        # per_germ: {l: [n expressions]}
        col = []
        for l in range(s):
            comps = per_germ.get(l, [0] * n)
            for i in range(n):
                col.extend(coeffs(comps[i]))
        return col

    cols = []
    for l, f in enumerate(germ_exprs):
        for j in range(m):
            for b in monos:
                mono = sympy.Mul(*[x ** a for x, a in zip(xs, b)])
                cols.append(column({l: [sympy.diff(fi, xs[j]) * mono for fi in f]}))
    for i in range(n):
        for g in tmonos:
            per = {}
            for l, f in enumerate(germ_exprs):
                val = sympy.Mul(*[fi ** a for fi, a in zip(f, g)])
                per[l] = [val if t == i else 0 for t in range(n)]
            cols.append(column(per))
    for l, f in enumerate(germ_exprs):
        for i in range(n):
            for j in range(n):
                for b in monos:
                    mono = sympy.Mul(*[x ** a for x, a in zip(xs, b)])
                    per = {l: [mono * f[j] if t == i else 0 for t in range(n)]}
                    cols.append(column(per))
    M = sympy.Matrix(cols).T
    return M.rank(), M.rows
