"""Constructive solution of the stability equations on a fiber.

The pipeline is

    adapt_multigerm -> reduce_system -> ReducedSystem.solve_germ (per germ)
    -> solve_reduced -> ReducedSystem.back_substitute

After adaptation every germ f^l has the components indexed by the complement
of I_l equal to source coordinates x_{sigma_l(k)}.  Substituting those
equations into the others and shifting v by its value c at the target point
gives an equivalent system; dropping the terms that lie in f*(m_q)C leaves the
reduced system, which decouples germ by germ because the I_l are disjoint.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .general_position import (
    CoordinateAdaptation,
    PreconditionError,
    SubspaceFamily,
    adapt_coordinates,
    find_common_translate,
    gp_check,
)
from .jets import Jet, MapGermJet, jet_compose, jet_mul, jet_partial, monomial_basis
from .linalg import LinearSolver, Matrix, Subspace, rref, solve
from .stability import (
    MultigermConfig,
    SourceVectorField,
    TargetVectorField,
    VectorFieldAlongGerm,
    build_operator,
    tf_apply,
    wf_apply,
)

__all__ = [
    "AdaptedMultigerm",
    "ReducedSystem",
    "PipelineResult",
    "adapt_multigerm",
    "reduce_system",
    "solve_reduced",
    "solve_via_reduction",
    "invert_germ",
]


def invert_germ(psi: MapGermJet) -> MapGermJet:
    """Jet inverse of a diffeomorphism germ (Q^m, 0) -> (Q^m, 0).

    Writes psi = A x + N(x) and iterates phi <- A^{-1}(x - N(phi)); each pass
    fixes one more degree.
    """
    m, k = psi.source_dim, psi.order
    if psi.target_dim != m:
        raise ValueError("only square germs can be inverted")
    A = Matrix.from_rows(psi.jacobian_at_zero(), m)
    cols = [solve(A, [int(i == j) for i in range(m)]) for j in range(m)]
    if any(c is None for c in cols):
        raise PreconditionError("germ is not a local diffeomorphism (singular linear part)")
    Ainv = Matrix.from_columns(cols, m).to_rows()
    lin = [sum((Jet.variable(j, m, k) * A[i, j] for j in range(m) if A[i, j]), Jet.zero(m, k))
           for i in range(m)]
    nonlin = [c - l for c, l in zip(psi, lin)]
    xs = [Jet.variable(i, m, k) for i in range(m)]

    def apply_ainv(vec):
        return [sum((vec[j] * Ainv[i][j] for j in range(m) if Ainv[i][j]), Jet.zero(m, k))
                for i in range(m)]

    phi = MapGermJet(apply_ainv(xs))
    for _ in range(k):
        nphi = [jet_compose(nl, phi) for nl in nonlin]
        phi = MapGermJet(apply_ainv([x - t for x, t in zip(xs, nphi)]))
    return phi


def _compose_map(outer: MapGermJet, inner: MapGermJet) -> MapGermJet:
    return MapGermJet(jet_compose(c, inner) for c in outer)


@dataclass(frozen=True)
class AdaptedMultigerm:
    """A fiber in coordinates where each germ has the normal form.

    ``base`` is the fiber in adapted coordinates: target y' = L y and, for germ
    l, source coordinates x' = psi_l(x) with inverse phi_l.  For every k in the
    complement of I_l the component k of germ l is exactly x'_{sigma_l(k)}.
    All index sets are 0-based.
    """

    base: MultigermConfig
    adaptation: CoordinateAdaptation
    sigma: tuple
    free_indices: tuple
    original: MultigermConfig
    source_changes: tuple = field(repr=False)

    @property
    def order(self) -> int:
        return self.base.order

    @property
    def index_sets(self) -> tuple:
        return self.adaptation.index_sets

    @property
    def complements(self) -> tuple:
        return self.adaptation.complements

    def verify(self) -> bool:
        k = self.order
        m = self.base.germs[0].source_dim
        n = self.base.target_dim
        L = self.adaptation.change_of_basis.to_rows()
        for l, f in enumerate(self.base.germs):
            sig, free = self.sigma[l], self.free_indices[l]
            Ibar = self.complements[l]
            if set(sig) != set(Ibar) or len(set(sig.values())) != len(sig):
                return False
            image = set(sig.values())
            if image & set(free) or image | set(free) != set(range(m)):
                return False
            for c in Ibar:
                if f[c] != Jet.variable(sig[c], m, k):
                    return False
            psi, phi = self.source_changes[l]
            if _compose_map(psi, phi) != MapGermJet.identity(m, k):
                return False
            moved = self.original.germs[l].linear_change(L, None)
            if _compose_map(moved, phi) != f:
                return False
            P = self.base.strata[l]
            if P is not None and P != Subspace.coordinate(n, Ibar):
                return False
        return True


def adapt_multigerm(config: MultigermConfig) -> AdaptedMultigerm:
    """Change coordinates so every germ takes the normal form.

    The target gets linear coordinates adapted to the strata; each source gets
    the coordinates x'_{sigma(k)} = f_k(x) (k outside I_l), x'_i = x_i (i in L_l),
    inverted order by order.
    """
    for lab, P in zip(config.labels, config.strata):
        if P is None:
            raise ValueError(f"germ {lab!r} has no stratum tangent data")
    if len(config) >= 2 and not gp_check(SubspaceFamily(config.strata), "direct"):
        raise PreconditionError("strata are not in general position")
    adaptation = adapt_coordinates(SubspaceFamily(config.strata))
    L = adaptation.change_of_basis
    Lrows = L.to_rows()
    k = config.order
    germs, strata, sigmas, frees, changes = [], [], [], [], []
    for l, f in enumerate(config.germs):
        lab = config.labels[l]
        g = f.linear_change(Lrows, None)
        m = g.source_dim
        Ibar = adaptation.complements[l]
        jac = g.jacobian_at_zero()
        sub = [jac[c] for c in Ibar]
        if Ibar:
            _, r, piv = rref(Matrix.from_rows(sub, m))
            if r != len(Ibar):
                raise PreconditionError(
                    f"germ {lab!r}: the components outside I are not independent at 0; "
                    "germ and stratum data are inconsistent"
                )
        else:
            piv = ()
        sigma = dict(zip(Ibar, piv))
        free = tuple(i for i in range(m) if i not in piv)
        owner = {i: c for c, i in sigma.items()}
        psi = MapGermJet(g[owner[i]] if i in owner else Jet.variable(i, m, k) for i in range(m))
        phi = invert_germ(psi)
        germs.append(_compose_map(g, phi))
        strata.append(config.strata[l].transform(L))
        sigmas.append(sigma)
        frees.append(free)
        changes.append((psi, phi))
    base = MultigermConfig(tuple(germs), tuple(strata), config.labels)
    out = AdaptedMultigerm(base, adaptation, tuple(sigmas), tuple(frees), config, tuple(changes))
    if not out.verify():
        raise AssertionError("adapted multigerm failed its normal-form postcondition")
    return out


def _along(comps) -> VectorFieldAlongGerm:
    return VectorFieldAlongGerm(comps)


def _fit(w: VectorFieldAlongGerm, k: int) -> VectorFieldAlongGerm:
    return w if w.order == k else VectorFieldAlongGerm([c.truncate(k) for c in w])


@dataclass
class ReducedSystem:
    """The reduced stability equations of an adapted fiber.

    For germ l and k in I_l::

        sum_{i in L_l} (d f_k / d x_i) u~_i + v~_k o f = w~_k

    and for k outside I_l::

        u~_{sigma(k)} + v~_k o f = w~_k

    with w~ obtained from w by `transform_rhs` and (u, v) recovered from
    (u~, v~) by `back_substitute`.  The term dropped on the way, which lies in
    f*(m_q)C whenever v~ vanishes at the target point, is `dropped_term`.
    """

    adapted: AdaptedMultigerm
    shifts: tuple
    partials: tuple = field(repr=False)
    _germ_solvers: dict = field(default_factory=dict, repr=False)
    _ops: dict = field(default_factory=dict, repr=False)

    @property
    def order(self) -> int:
        return self.adapted.order

    @property
    def config(self) -> MultigermConfig:
        return self.adapted.base

    def _dims(self):
        g = self.config.germs[0]
        return g.source_dim, g.target_dim, self.order

    def _shifts(self, shifts):
        n = self.config.target_dim
        c = self.shifts if shifts is None else tuple(Fraction(x) for x in shifts)
        if len(c) != n:
            raise ValueError(f"need {n} shifts")
        return c

    # --- the w -> w~ transformation and its inverse on solutions -----------
    def transform_rhs(self, w: Sequence[VectorFieldAlongGerm], shifts=None) -> tuple:
        c = self._shifts(shifts)
        m, n, k = self._dims()
        out = []
        for l, wl in enumerate(w):
            wl = _fit(wl, k)
            sig = self.adapted.sigma[l]
            Ibar = self.adapted.complements[l]
            comps = list(wl)
            for kk in self.adapted.index_sets[l]:
                acc = comps[kk] - c[kk]
                for j in Ibar:
                    d = self.partials[l][kk][sig[j]]
                    if d.is_zero():
                        continue
                    acc = acc - jet_mul(d, wl[j]) + d * c[j]
                comps[kk] = acc
            out.append(_along(comps))
        return tuple(out)

    def back_substitute(self, ut: Sequence[SourceVectorField], vt: TargetVectorField, shifts=None):
        """(u~, v~) -> (u, v) with u_{sigma(k)} = u~_{sigma(k)} - c_k and v = v~ + c."""
        c = self._shifts(shifts)
        us = []
        for l, ul in enumerate(ut):
            comps = list(ul)
            for kk, i in self.adapted.sigma[l].items():
                comps[i] = comps[i] - c[kk]
            us.append(SourceVectorField(comps))
        v = TargetVectorField([vk + ck for vk, ck in zip(vt, c)])
        return tuple(us), v

    def dropped_term(self, vt: TargetVectorField) -> tuple:
        """Per germ: sum_{j outside I} (d f_k / d x_sigma(j)) (v~_j o f) in components k in I.

        This is the term discarded when passing to the reduced system: a
        back-substituted solution leaves exactly this residual in the full
        equations.
        """
        m, n, k = self._dims()
        out = []
        for l, f in enumerate(self.config.germs):
            sig = self.adapted.sigma[l]
            comps = [Jet.zero(m, k)] * n
            comp_v = {j: jet_compose(vt[j], f) for j in sig}
            for kk in self.adapted.index_sets[l]:
                acc = Jet.zero(m, k)
                for j, i in sig.items():
                    d = self.partials[l][kk][i]
                    if not d.is_zero():
                        acc = acc + jet_mul(d, comp_v[j])
                comps[kk] = acc
            out.append(_along(comps))
        return tuple(out)

    # --- applying the systems ---------------------------------------------
    def germ_apply(self, l: int, a: SourceVectorField, b: TargetVectorField) -> VectorFieldAlongGerm:
        """Left side of the reduced equations of germ l alone."""
        m, n, k = self._dims()
        f = self.config.germs[l]
        sig = self.adapted.sigma[l]
        comps = []
        for kk in range(n):
            acc = jet_compose(b[kk], f)
            if kk in sig:
                acc = acc + a[sig[kk]]
            else:
                for i in self.adapted.free_indices[l]:
                    d = self.partials[l][kk][i]
                    if not d.is_zero() and not a[i].is_zero():
                        acc = acc + jet_mul(d, a[i])
            comps.append(acc)
        return _along(comps)

    def reduced_apply(self, ut: Sequence[SourceVectorField], vt: TargetVectorField) -> tuple:
        return tuple(self.germ_apply(l, ut[l], vt) for l in range(len(self.config)))

    def reduced_residual(self, ut, vt, wt) -> tuple:
        return tuple(w - g for w, g in zip(wt, self.reduced_apply(ut, vt)))

    def full_residual(self, u, v, w) -> tuple:
        """w - (df(u) + v o f) per germ: the residual of the unreduced system."""
        k = self.order
        return tuple(
            _fit(wl, k) - (tf_apply(f, ul) + wf_apply(f, v))
            for f, ul, wl in zip(self.config.germs, u, w)
        )

    # --- per-germ solving ---------------------------------------------------
    def _germ_solver(self, l: int, with_constants: bool):
        key = (l, with_constants)
        if key in self._germ_solvers:
            return self._germ_solvers[key]
        m, n, k = self._dims()
        f = self.config.germs[l]
        I = self.adapted.index_sets[l]
        free = self.adapted.free_indices[l]
        src = monomial_basis(m, k)
        nb = len(src)
        index = {e: i for i, e in enumerate(src)}
        rows = len(I) * nb
        cols, labels = [], []
        for i in free:
            for beta in src:
                mono = Jet.monomial(beta, k)
                col = {}
                for r, kk in enumerate(I):
                    for e, c in jet_mul(self.partials[l][kk][i], mono).terms.items():
                        col[r * nb + index[e]] = c
                cols.append(col)
                labels.append(("a", i, beta))
        powers = f.powers()
        for r, kk in enumerate(I):
            for gamma in monomial_basis(n, k):
                if not any(gamma) and not with_constants:
                    continue
                col = {r * nb + index[e]: c for e, c in powers[gamma].terms.items()}
                cols.append(col)
                labels.append(("b", kk, gamma))
        entries = [Fraction(0)] * (rows * len(cols))
        for j, col in enumerate(cols):
            for r, v in col.items():
                entries[r * len(cols) + j] = v
        solver = LinearSolver(Matrix(rows, len(cols), entries)) if rows else None
        self._germ_solvers[key] = (solver, labels)
        return self._germ_solvers[key]

    def solve_germ(self, l: int, wt: VectorFieldAlongGerm):
        """Solve germ l's reduced equations for w~; prefers b vanishing at 0.

        Returns ``(a, b)`` or raises PreconditionError when no solution exists
        at this jet order (the germ is not stable).
        """
        m, n, k = self._dims()
        wt = _fit(wt, k)
        I = self.adapted.index_sets[l]
        a = [{} for _ in range(m)]
        b = [{} for _ in range(n)]
        if I:
            rhs = []
            for kk in I:
                rhs.extend(wt[kk].coefficients())
            for with_constants in (False, True):
                solver, labels = self._germ_solver(l, with_constants)
                x = solver.solve(rhs)
                if x is not None:
                    break
            else:
                raise PreconditionError(
                    f"germ {self.config.labels[l]!r}: reduced equations have no solution at order {k}"
                )
            for coef, lab in zip(x, labels):
                if coef:
                    if lab[0] == "a":
                        a[lab[1]][lab[2]] = coef
                    else:
                        b[lab[1]][lab[2]] = coef
        a = [Jet(m, k, t) for t in a]
        for kk, i in self.adapted.sigma[l].items():
            a[i] = wt[kk]
        return SourceVectorField(a), TargetVectorField([Jet(n, k, t) for t in b])

    # --- solvability modulo the ideal (Mather's-Lemma comparison) ----------
    def _unreduced_solver(self):
        if "m1" not in self._ops:
            self._ops["m1"] = LinearSolver(build_operator(self.config, self.order).matrix)
        return self._ops["m1"]

    def _reduced_solver(self):
        if "m7" not in self._ops:
            self._ops["m7"] = LinearSolver(self.reduced_operator())
        return self._ops["m7"]

    def reduced_operator(self) -> Matrix:
        """Columns: u~ fields, v~ fields vanishing at 0, the shifts c, and f*(m_q)C generators."""
        m, n, k = self._dims()
        op = build_operator(self.config, k)
        src = monomial_basis(m, k)
        nb = len(src)
        block = n * nb
        index = {e: i for i, e in enumerate(src)}
        cols = []

        def place(col, l, kk, jet):
            for e, c in jet.terms.items():
                col[l * block + kk * nb + index[e]] = c

        for l in range(len(self.config)):
            sig = self.adapted.sigma[l]
            owner = {i: kk for kk, i in sig.items()}
            for i in range(m):
                for beta in src:
                    mono = Jet.monomial(beta, k)
                    col = {}
                    if i in owner:
                        place(col, l, owner[i], mono)
                    else:
                        for kk in self.adapted.index_sets[l]:
                            place(col, l, kk, jet_mul(self.partials[l][kk][i], mono))
                    cols.append(col)
        for kk in range(n):
            for gamma in monomial_basis(n, k):
                if not any(gamma):
                    continue
                col = {}
                for l, f in enumerate(self.config.germs):
                    place(col, l, kk, f.powers()[gamma])
                cols.append(col)
        one = Jet.constant(1, m, k)
        for a in range(n):
            col = {}
            for l in range(len(self.config)):
                sig = self.adapted.sigma[l]
                for kk in self.adapted.index_sets[l]:
                    acc = one if kk == a else Jet.zero(m, k)
                    if a in sig:
                        acc = acc - self.partials[l][kk][sig[a]]
                    place(col, l, kk, acc)
            cols.append(col)
        M = op.matrix
        for j in op.columns_of(("ideal",)):
            cols.append({i: M[i, j] for i in range(M.rows) if M[i, j]})
        R = M.rows
        entries = [Fraction(0)] * (R * len(cols))
        for j, col in enumerate(cols):
            for r, v in col.items():
                entries[r * len(cols) + j] = v
        return Matrix(R, len(cols), entries)

    def unreduced_solvable(self, w) -> bool:
        """Is df(u) + v o f = w solvable modulo f*(m_q)C at this order?"""
        op = build_operator(self.config, self.order)
        return self._unreduced_solver().solve(op.vector([_fit(x, self.order) for x in w])) is not None

    def reduced_solvable(self, w) -> bool:
        """Is the reduced system (shifts unknown) solvable for w~ modulo f*(m_q)C?"""
        wt = self.transform_rhs(w, [0] * self.config.target_dim)
        op = build_operator(self.config, self.order)
        return self._reduced_solver().solve(op.vector(wt)) is not None

    # --- presentation -------------------------------------------------------
    def equations(self, names_src=None, names_tgt=None) -> list:
        """Human-readable reduced equations, one string per (germ, component)."""
        from .jets import default_names
        m, n, _ = self._dims()
        xs = names_src or default_names(m)
        ys = names_tgt or [f"y{i + 1}" for i in range(n)]
        lines = []
        for l, f in enumerate(self.config.germs):
            lab = self.config.labels[l]
            sig = self.adapted.sigma[l]
            for kk in range(n):
                if kk in sig:
                    lhs = f"ut[{xs[sig[kk]]}]"
                else:
                    terms = []
                    for i in self.adapted.free_indices[l]:
                        d = self.partials[l][kk][i]
                        if not d.is_zero():
                            terms.append(f"({d.to_str(xs)})*ut[{xs[i]}]")
                    lhs = " + ".join(terms) if terms else "0"
                lines.append(f"{lab}: {lhs} + vt[{ys[kk]}] o f = wt[{ys[kk]}]")
        return lines


def reduce_system(adapted: AdaptedMultigerm, shifts: Sequence | None = None) -> ReducedSystem:
    if not adapted.verify():
        raise PreconditionError("adapted multigerm does not satisfy the normal form")
    n = adapted.base.target_dim
    c = tuple(Fraction(x) for x in (shifts if shifts is not None else [0] * n))
    partials = tuple(
        tuple(tuple(jet_partial(fk, i) for i in range(f.source_dim)) for fk in f)
        for f in adapted.base.germs
    )
    return ReducedSystem(adapted, c, partials)


def solve_reduced(reduced: ReducedSystem, per_germ_solutions: Sequence, rhs: Sequence) -> tuple:
    """Glue per-germ reduced solutions into one solution of the fiber's reduced system.

    v~_k is taken from the germ whose I contains k (zero past i_1 + ... + i_s);
    u~ is a_i on L_l and w~_j - v~_j o f on sigma_l(j).
    """
    cfg = reduced.config
    ad = reduced.adapted
    m, n, k = reduced._dims()
    if len(per_germ_solutions) != len(cfg) or len(rhs) != len(cfg):
        raise ValueError("need one solution and one right-hand side per germ")
    rhs = [_fit(w, k) for w in rhs]
    for l, (a, b) in enumerate(per_germ_solutions):
        res = rhs[l] - reduced.germ_apply(l, a, b)
        for kk, r in enumerate(res):
            if not r.is_zero():
                raise PreconditionError(
                    f"germ {cfg.labels[l]!r}: per-germ solution fails reduced equation {kk}"
                )
    v = [Jet.zero(n, k)] * n
    for l, (_, b) in enumerate(per_germ_solutions):
        for kk in ad.index_sets[l]:
            v[kk] = b[kk]
    vt = TargetVectorField(v)
    ut = []
    for l, (a, _) in enumerate(per_germ_solutions):
        f = cfg.germs[l]
        comps = list(a)
        for j, i in ad.sigma[l].items():
            comps[i] = rhs[l][j] - jet_compose(vt[j], f)
        for i in ad.free_indices[l]:
            comps[i] = a[i]
        ut.append(SourceVectorField(comps))
    ut = tuple(ut)
    if any(not r.is_zero() for r in reduced.reduced_residual(ut, vt, rhs)):
        raise AssertionError("assembled solution does not satisfy the reduced system")
    return ut, vt


def _choose_shifts(reduced: ReducedSystem, w) -> tuple:
    # v(0) must be a common translate of the w^l(0) modulo the images of df^l(0)
    n = reduced.config.target_dim
    images = []
    for f in reduced.config.germs:
        jac = f.jacobian_at_zero()
        images.append(Subspace(n, [[jac[i][j] for i in range(n)] for j in range(f.source_dim)]))
    values = [[c.constant_term() for c in wl] for wl in w]
    z = find_common_translate(SubspaceFamily(images), values)
    return tuple(z) if z is not None else (Fraction(0),) * n


@dataclass
class PipelineResult:
    reduced: ReducedSystem = field(repr=False)
    shifts: tuple
    rhs: tuple
    reduced_rhs: tuple
    germ_solutions: tuple
    ut: tuple
    vt: TargetVectorField
    u: tuple
    v: TargetVectorField
    residual: tuple
    dropped: tuple

    @property
    def dropped_in_ideal(self) -> bool:
        """The dropped term lies in f*(m_q)C.

        Only v~_j with j outside some I_l enter it, so it suffices that those
        vanish at the target point.
        """
        used = set().union(*(set(s) for s in self.reduced.adapted.sigma))
        return all(self.vt[j].constant_term() == 0 for j in used)

    def verify(self) -> bool:
        return all(r == d for r, d in zip(self.residual, self.dropped))


def solve_via_reduction(reduced: ReducedSystem, w: Sequence[VectorFieldAlongGerm], shifts=None) -> PipelineResult:
    """Run the full constructive pipeline for one right-hand side."""
    k = reduced.order
    w = tuple(_fit(x, k) for x in w)
    c = _choose_shifts(reduced, w) if shifts is None else tuple(Fraction(x) for x in shifts)
    wt = reduced.transform_rhs(w, c)
    sols = tuple(reduced.solve_germ(l, wt[l]) for l in range(len(reduced.config)))
    ut, vt = solve_reduced(reduced, sols, wt)
    u, v = reduced.back_substitute(ut, vt, c)
    residual = reduced.full_residual(u, v, w)
    dropped = reduced.dropped_term(vt)
    out = PipelineResult(reduced, c, w, wt, sols, ut, vt, u, v, residual, dropped)
    if not out.verify():
        raise AssertionError("back-substituted solution leaves a residual other than the dropped term")
    return out
