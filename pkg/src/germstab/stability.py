"""Infinitesimal stability of map germs and multigerms at a finite fiber.

Everything is computed on k-jets.  For a multigerm f = (f^1, ..., f^s), all
sending their base points to the same target point, the module C of vector
fields along f is the direct sum of the per-germ modules.  The operator whose
surjectivity decides stability has three column groups:

* ``tf``: images df^l(x^beta d/dx_j) of source monomial fields, one germ at a time;
* ``wf``: target monomial fields y^gamma d/dy_i composed with *every* germ at
  once (the same target field acts on the whole fiber);
* ``ideal``: g * f^l_j * d/dy_i, the generators of f*(m_q) C.

Rows are jet coefficients ordered by (germ, target component, graded-lex
source monomial).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .general_position import SubspaceFamily, gp_check
from .jets import Jet, MapGermJet, jet_compose, jet_mul, jet_partial, monomial_basis
from .linalg import LinearSolver, Matrix, Subspace, cokernel_basis, rank

__all__ = [
    "SourceVectorField",
    "TargetVectorField",
    "VectorFieldAlongGerm",
    "MultigermConfig",
    "StabilityOperator",
    "StabilityVerdict",
    "StabilitySolution",
    "UnstableWitness",
    "EquivalenceReport",
    "tf_apply",
    "wf_apply",
    "assemble_operator",
    "build_operator",
    "check_infinitesimal_stability",
    "check_normal_crossing",
    "theorem1_local_equivalence",
    "default_order",
]


class _Field:
    """Tuple of jets with componentwise linear structure."""

    __slots__ = ("components",)

    def __init__(self, components: Sequence[Jet]):
        comps = tuple(components)
        if not comps:
            raise ValueError("a vector field needs at least one component")
        m, k = comps[0].num_vars, comps[0].order
        if any(c.num_vars != m or c.order != k for c in comps):
            raise ValueError("vector field components disagree on variables or order")
        self.components = comps

    @property
    def num_vars(self):
        return self.components[0].num_vars

    @property
    def order(self):
        return self.components[0].order

    @classmethod
    def zero(cls, dim: int, num_vars: int, order: int):
        return cls([Jet.zero(num_vars, order)] * dim)

    @classmethod
    def basis_field(cls, dim: int, i: int, jet: Jet):
        z = Jet.zero(jet.num_vars, jet.order)
        return cls([jet if a == i else z for a in range(dim)])

    def __len__(self):
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    def __getitem__(self, i):
        return self.components[i]

    def _same(self, other):
        if type(other) is not type(self) or len(other) != len(self):
            raise TypeError(f"cannot combine {type(self).__name__} with {type(other).__name__}")

    def __add__(self, other):
        self._same(other)
        return type(self)([a + b for a, b in zip(self, other)])

    def __sub__(self, other):
        self._same(other)
        return type(self)([a - b for a, b in zip(self, other)])

    def __neg__(self):
        return type(self)([-a for a in self])

    def scale(self, g):
        """Multiply every component by a jet or a rational."""
        return type(self)([c * g for c in self])

    def is_zero(self):
        return all(c.is_zero() for c in self)

    def __eq__(self, other):
        return type(other) is type(self) and self.components == other.components

    def __hash__(self):
        return hash((type(self).__name__, self.components))

    def to_str(self, names=None):
        return "(" + ", ".join(c.to_str(names) for c in self) + ")"

    def __repr__(self):
        return f"{type(self).__name__}{self.to_str()}"


class SourceVectorField(_Field):
    """u = sum u_i d/dx_i: m jets in the m source variables."""


class TargetVectorField(_Field):
    """v = sum v_i d/dy_i: n jets in the n target variables."""


class VectorFieldAlongGerm(_Field):
    """w = sum w_i d/dy_i with coefficients in the source variables."""


def default_order(target_dim: int) -> int:
    return target_dim + 1


def tf_apply(f: MapGermJet, u: SourceVectorField) -> VectorFieldAlongGerm:
    """df(u): component i is sum_j (d f_i / d x_j) u_j."""
    if len(u) != f.source_dim:
        raise ValueError(f"source field has {len(u)} components, germ has {f.source_dim} variables")
    if u.num_vars != f.source_dim or u.order != f.order:
        raise ValueError("source field and germ disagree on variables or order")
    comps = []
    for fi in f:
        acc = Jet.zero(f.source_dim, f.order)
        for j, uj in enumerate(u):
            if not uj.is_zero():
                acc = acc + jet_mul(jet_partial(fi, j), uj)
        comps.append(acc)
    return VectorFieldAlongGerm(comps)


def wf_apply(f: MapGermJet, v: TargetVectorField) -> VectorFieldAlongGerm:
    """v o f, componentwise."""
    if len(v) != f.target_dim:
        raise ValueError(f"target field has {len(v)} components, germ has {f.target_dim}")
    if v.num_vars != f.target_dim or v.order != f.order:
        raise ValueError("target field and germ disagree on variables or order")
    return VectorFieldAlongGerm([jet_compose(vi, f) for vi in v])


@dataclass(frozen=True)
class MultigermConfig:
    """A finite fiber S = {p_1, ..., p_s} over one target point.

    Each germ is written in coordinates centred at its base point and at the
    common target point.  `strata` optionally gives, per germ, the tangent
    image P_l = df(T Sigma_{p_l}) as a subspace of Q^n.
    """

    germs: tuple
    strata: tuple = None
    labels: tuple = None

    def __post_init__(self):
        germs = tuple(self.germs)
        if not germs:
            raise ValueError("a multigerm needs at least one germ")
        n, k = germs[0].target_dim, germs[0].order
        for i, g in enumerate(germs):
            if not isinstance(g, MapGermJet):
                raise TypeError("germs must be MapGermJet instances")
            if g.target_dim != n:
                raise ValueError(f"germ {i} has target dimension {g.target_dim}, expected {n}")
            if g.order != k:
                raise ValueError(f"germ {i} has order {g.order}, expected {k}")
            if g.source_dim != germs[0].source_dim:
                raise ValueError("all germs of a fiber share the source dimension")
        strata = self.strata
        if strata is None:
            strata = (None,) * len(germs)
        strata = tuple(strata)
        if len(strata) != len(germs):
            raise ValueError("need one stratum entry per germ")
        for i, P in enumerate(strata):
            if P is not None and P.ambient_dim != n:
                raise ValueError(f"stratum of germ {i} lives in Q^{P.ambient_dim}, expected Q^{n}")
        labels = self.labels
        if labels is None:
            labels = tuple(f"p{i + 1}" for i in range(len(germs)))
        labels = tuple(labels)
        if len(labels) != len(germs):
            raise ValueError("need one label per germ")
        object.__setattr__(self, "germs", germs)
        object.__setattr__(self, "strata", strata)
        object.__setattr__(self, "labels", labels)

    @property
    def target_dim(self) -> int:
        return self.germs[0].target_dim

    @property
    def order(self) -> int:
        return self.germs[0].order

    def __len__(self):
        return len(self.germs)

    @property
    def has_strata(self) -> bool:
        return all(P is not None for P in self.strata)

    def truncate(self, k: int) -> "MultigermConfig":
        return MultigermConfig(tuple(g.truncate(k) for g in self.germs), self.strata, self.labels)

    def with_germ(self, germ: MapGermJet, stratum: Subspace | None = None, label: str | None = None):
        label = label or f"p{len(self.germs) + 1}"
        return MultigermConfig(self.germs + (germ,), self.strata + (stratum,), self.labels + (label,))

    def linear_change(self, target: Matrix, sources: Sequence[Matrix]) -> "MultigermConfig":
        """Apply y -> T y on the target (shared) and x -> S_l x on each source."""
        if len(sources) != len(self.germs):
            raise ValueError("need one source change per germ")
        T = target.to_rows()
        germs = tuple(g.linear_change(T, S.to_rows()) for g, S in zip(self.germs, sources))
        strata = tuple(None if P is None else P.transform(target) for P in self.strata)
        return MultigermConfig(germs, strata, self.labels)


@dataclass
class StabilityOperator:
    """The assembled operator together with its row/column bookkeeping."""

    config: MultigermConfig
    order: int
    matrix: Matrix
    row_labels: list
    col_labels: list
    source: MultigermConfig | None = field(default=None, repr=False)

    def tf(self, l: int, u: SourceVectorField) -> VectorFieldAlongGerm:
        """df(u) at germ l, using the germ's higher-order terms when known."""
        f = (self.source or self.config).germs[l]
        k = self.order
        if f.order > k:
            u = SourceVectorField([c.truncate(f.order) for c in u])
            return VectorFieldAlongGerm([c.truncate(k) for c in tf_apply(f, u)])
        return tf_apply(f, u)

    @property
    def block_size(self) -> int:
        g = self.config.germs[0]
        return g.target_dim * len(monomial_basis(g.source_dim, self.order))

    def vector(self, fields: Sequence[VectorFieldAlongGerm]) -> list:
        """Coefficient vector of one field per germ."""
        if len(fields) != len(self.config):
            raise ValueError("need one vector field per germ")
        out = []
        for w in fields:
            if w.order != self.order:
                w = VectorFieldAlongGerm([c.truncate(self.order) for c in w])
            for c in w:
                out.extend(c.coefficients())
        return out

    def fields(self, vec: Sequence) -> tuple:
        m, k, n = self.config.germs[0].source_dim, self.order, self.config.target_dim
        nb = len(monomial_basis(m, k))
        out = []
        pos = 0
        for _ in self.config.germs:
            comps = []
            for _ in range(n):
                comps.append(Jet.from_coefficients(vec[pos:pos + nb], m, k))
                pos += nb
            out.append(VectorFieldAlongGerm(comps))
        return tuple(out)

    def columns_of(self, kinds: Sequence[str]) -> list:
        return [j for j, lab in enumerate(self.col_labels) if lab[0] in kinds]

    def submatrix(self, kinds: Sequence[str]) -> Matrix:
        cols = self.columns_of(kinds)
        M = self.matrix
        return Matrix(M.rows, len(cols), [M[i, j] for i in range(M.rows) for j in cols])


def build_operator(config: MultigermConfig, k: int | None = None) -> StabilityOperator:
    """Assemble the operator (tf | wf | ideal) at jet order k."""
    n = config.target_dim
    k = default_order(n) if k is None else k
    if k < 1:
        raise ValueError("jet order must be at least 1")
    if config.order < k:
        raise ValueError(f"germs are only known to order {config.order} < {k}")
    cfg = config.truncate(k) if config.order != k else config
    m = cfg.germs[0].source_dim
    src = monomial_basis(m, k)
    tgt = monomial_basis(n, k)
    nb = len(src)
    block = n * nb
    s = len(cfg.germs)
    R = s * block
    index = {e: i for i, e in enumerate(src)}

    row_labels = [(l, i, e) for l in range(s) for i in range(n) for e in src]
    cols = []
    labels = []

    def place(col, l, i, jet):
        base = l * block + i * nb
        for e, c in jet.terms.items():
            col[base + index[e]] = c

    # tf: d f^l (x^beta d/dx_j); partials come from the untruncated germ so
    # that degree-k coefficients are exact when the (k+1)-jet is known
    for l, f in enumerate(config.germs):
        partials = [[jet_partial(fi, j).truncate(k) for j in range(m)] for fi in f]
        for j in range(m):
            for beta in src:
                mono = Jet.monomial(beta, k)
                col = {}
                for i in range(n):
                    place(col, l, i, jet_mul(partials[i][j], mono))
                cols.append(col)
                labels.append(("tf", l, j, beta))
    # wf: y^gamma d/dy_i composed with every germ simultaneously
    powers = [f.powers() for f in cfg.germs]
    for i in range(n):
        for gamma in tgt:
            col = {}
            for l in range(s):
                place(col, l, i, powers[l][gamma])
            cols.append(col)
            labels.append(("wf", i, gamma))
    # ideal: g f^l_j d/dy_i
    for l, f in enumerate(cfg.germs):
        for i in range(n):
            for j in range(n):
                if f[j].is_zero():
                    continue
                for g in src:
                    col = {}
                    place(col, l, i, jet_mul(Jet.monomial(g, k), f[j]))
                    if col:
                        cols.append(col)
                        labels.append(("ideal", l, i, j, g))

    N = len(cols)
    zero = Fraction(0)
    entries = [zero] * (R * N)
    for jc, col in enumerate(cols):
        for r, v in col.items():
            entries[r * N + jc] = v
    return StabilityOperator(cfg, k, Matrix(R, N, entries), row_labels, labels, config)


def assemble_operator(config: MultigermConfig, k: int | None = None) -> Matrix:
    return build_operator(config, k).matrix


@dataclass
class StabilitySolution:
    """(u, v) with sum_l [df^l(u^l) + v o f^l + residual^l] = w."""

    u: tuple
    v: TargetVectorField
    residual: tuple

    @property
    def exact(self) -> bool:
        return all(r.is_zero() for r in self.residual)


@dataclass
class UnstableWitness:
    """A field w along the fiber and a functional killing every operator column but not w."""

    functional: list
    w: tuple
    row: tuple

    def verify(self, op: StabilityOperator) -> bool:
        M = op.matrix
        c = self.functional
        nz = [(i, a) for i, a in enumerate(c) if a]
        for j in range(M.cols):
            if sum((a * M[i, j] for i, a in nz), Fraction(0)):
                return False
        wv = op.vector(self.w)
        return sum((a * wv[i] for i, a in nz), Fraction(0)) != 0


class StabilitySolver:
    """Certificate of stability: solves df(u) + v o f = w on the fiber."""

    def __init__(self, op: StabilityOperator):
        self.op = op
        self._full = None
        self._pure = None

    @property
    def full(self) -> LinearSolver:
        if self._full is None:
            self._full = LinearSolver(self.op.matrix)
        return self._full

    @property
    def pure(self) -> LinearSolver:
        if self._pure is None:
            self._pure = LinearSolver(self.op.submatrix(("tf", "wf")))
        return self._pure

    def solve(self, w: Sequence[VectorFieldAlongGerm]) -> StabilitySolution:
        """Exact solution without ideal terms when one exists, else with them."""
        op = self.op
        b = op.vector(w)
        x = self.pure.solve(b)
        labels = [op.col_labels[j] for j in op.columns_of(("tf", "wf"))]
        if x is None:
            x = self.full.solve(b)
            labels = op.col_labels
            if x is None:
                raise ValueError("right-hand side is outside the operator's image")
        return self._unpack(x, labels, w)

    def _unpack(self, x, labels, w) -> StabilitySolution:
        cfg, k = self.op.config, self.op.order
        m, n, s = cfg.germs[0].source_dim, cfg.target_dim, len(cfg)
        u = [[{} for _ in range(m)] for _ in range(s)]
        v = [{} for _ in range(n)]
        for coef, lab in zip(x, labels):
            if not coef:
                continue
            if lab[0] == "tf":
                _, l, j, beta = lab
                u[l][j][beta] = coef
            elif lab[0] == "wf":
                _, i, gamma = lab
                v[i][gamma] = coef
        u = tuple(SourceVectorField([Jet(m, k, t) for t in ul]) for ul in u)
        v = TargetVectorField([Jet(n, k, t) for t in v])
        residual = []
        for l, f in enumerate(cfg.germs):
            got = self.op.tf(l, u[l]) + wf_apply(f, v)
            wl = w[l] if w[l].order == k else VectorFieldAlongGerm([c.truncate(k) for c in w[l]])
            residual.append(wl - got)
        return StabilitySolution(u, v, tuple(residual))

    def residual_in_ideal(self, sol: StabilitySolution) -> bool:
        """Check that a solution's residual lies in the span of the ideal columns."""
        if sol.exact:
            return True
        op = self.op
        ideal = LinearSolver(op.submatrix(("ideal",)))
        return ideal.solve(op.vector(sol.residual)) is not None


@dataclass
class StabilityVerdict:
    stable: bool
    order: int
    rank: int
    dimension: int
    operator: StabilityOperator = field(repr=False)
    solver: StabilitySolver | None = field(default=None, repr=False)
    witness: UnstableWitness | None = None

    def __bool__(self):
        return self.stable

    def verify(self) -> bool:
        """Re-check the certificate exactly."""
        if self.stable:
            op = self.operator
            n = op.config.target_dim
            m = op.config.germs[0].source_dim
            k = op.order
            for l in range(len(op.config)):
                for i in range(n):
                    w = [VectorFieldAlongGerm.zero(n, m, k) for _ in op.config.germs]
                    w[l] = VectorFieldAlongGerm.basis_field(n, i, Jet.constant(1, m, k))
                    sol = self.solver.solve(w)
                    if not self.solver.residual_in_ideal(sol):
                        return False
            return self.solver.full.surjective
        return self.witness is not None and self.witness.verify(self.operator)


def _minimal_witness(op: StabilityOperator) -> UnstableWitness:
    basis = cokernel_basis(op.matrix)
    best = min(basis, key=lambda c: (sum(1 for a in c if a), [i for i, a in enumerate(c) if a]))
    first = next(i for i, a in enumerate(best) if a)
    e = [0] * op.matrix.rows
    e[first] = 1
    return UnstableWitness(best, op.fields(e), op.row_labels[first])


def check_infinitesimal_stability(config: MultigermConfig, k: int | None = None) -> StabilityVerdict:
    """Decide stability of the (multi)germ at jet order k (default n + 1).

    Stable means the operator (tf | wf | ideal) is onto the k-jets of fields
    along the fiber.  An unstable verdict carries a witness field and a
    cokernel functional; a stable one carries a solver.
    """
    op = build_operator(config, k)
    solver = StabilitySolver(op)  # factorizes lazily, on the first solve
    r = rank(op.matrix)
    R = op.matrix.rows
    if r == R:
        return StabilityVerdict(True, op.order, r, R, op, solver=solver)
    return StabilityVerdict(False, op.order, r, R, op, witness=_minimal_witness(op))


def _require_strata(config: MultigermConfig):
    for label, P in zip(config.labels, config.strata):
        if P is None:
            raise ValueError(f"germ {label!r} has no stratum tangent data")


def check_normal_crossing(config: MultigermConfig, k: int | None = None) -> bool:
    """Every germ stable on its own, and (for s >= 2) the strata in general position."""
    return _normal_crossing_parts(config, k)[0]


def _normal_crossing_parts(config, k):
    _require_strata(config)
    per_germ = []
    for g, P, lab in zip(config.germs, config.strata, config.labels):
        single = MultigermConfig((g,), (P,), (lab,))
        per_germ.append(check_infinitesimal_stability(single, k))
    gp = True
    if len(config) >= 2:
        gp = gp_check(SubspaceFamily(config.strata), "direct")
    return all(v.stable for v in per_germ) and gp, per_germ, gp


@dataclass
class EquivalenceReport:
    """Both sides of the local stability theorem evaluated on one fiber."""

    infinitesimal: StabilityVerdict
    normal_crossing: bool
    germ_verdicts: list
    general_position: bool

    @property
    def agree(self) -> bool:
        return self.infinitesimal.stable == self.normal_crossing


def theorem1_local_equivalence(config: MultigermConfig, k: int | None = None) -> EquivalenceReport:
    nc, per_germ, gp = _normal_crossing_parts(config, k)
    inf = check_infinitesimal_stability(config, k)
    return EquivalenceReport(inf, nc, per_germ, gp)
