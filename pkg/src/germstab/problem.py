"""Problem files: parsing, canonical serialization and query dispatch.

A problem file is line oriented::

    # two folds over one critical value
    target_dim 1
    order 2
    germ f1(x) = (x^2)
    germ f2(x) = (x^2)
    stratum f1 = zero
    stratum f2 = zero
    query check-multigerm

Blank lines and text after ``#`` are ignored.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .catalog import CatalogConfig, catalog_lookup
from .general_position import (
    METHODS,
    PreconditionError,
    SubspaceFamily,
    adapt_coordinates,
    find_common_translate,
    gp_check,
)
from .jets import Jet, MapGermJet
from .linalg import Subspace, subspace_intersection, subspace_sum
from .polyparse import NonRationalLiteral, ProblemSyntaxError, _Parser, tokenize
from .reduction import adapt_multigerm, reduce_system, solve_via_reduction
from .stability import (
    MultigermConfig,
    VectorFieldAlongGerm,
    check_infinitesimal_stability,
    default_order,
    theorem1_local_equivalence,
)

__all__ = [
    "QUERIES",
    "GermDecl",
    "ProblemFile",
    "ProblemSemanticError",
    "ProblemSyntaxError",
    "Report",
    "parse_problem",
    "serialize",
    "problem_from_catalog",
    "run_query",
]

QUERIES = (
    "check-germ",
    "check-multigerm",
    "check-normal-crossing",
    "equivalence",
    "general-position",
    "reduce",
    "adapt",
)

# polynomials are read at this order first; the germ order is then the
# larger of the query order and the actual degree
_READ_ORDER = 1000


class ProblemSemanticError(ValueError):
    """Well-formed input that does not describe a valid problem."""

    def __init__(self, message: str, germ: str | None = None, line: int = 0):
        self.message = message
        self.germ = germ
        self.line = line
        where = f"line {line}: " if line else ""
        who = f"germ {germ!r}: " if germ else ""
        super().__init__(where + who + message)


@dataclass(frozen=True)
class GermDecl:
    name: str
    variables: tuple
    components: tuple  # Jets at a generous order; see ProblemFile.config
    line: int = field(default=0, compare=False)

    def __post_init__(self):
        # one canonical order so that equality only sees the polynomials
        object.__setattr__(self, "components", tuple(c.truncate(_READ_ORDER) for c in self.components))
        object.__setattr__(self, "variables", tuple(self.variables))

    @property
    def source_dim(self) -> int:
        return len(self.variables)

    @property
    def degree(self) -> int:
        return max(c.degree() for c in self.components)


@dataclass(frozen=True)
class ProblemFile:
    target_dim: int
    germs: tuple
    strata: tuple = ()  # (germ name, Subspace) pairs in file order
    order: int | None = None
    query: str | None = None

    @property
    def jet_order(self) -> int:
        return default_order(self.target_dim) if self.order is None else self.order

    def stratum(self, name: str):
        for g, P in self.strata:
            if g == name:
                return P
        return None

    def config(self, require_strata: bool = False) -> MultigermConfig:
        """The fiber as a MultigermConfig, germs kept at max(order, degree)."""
        k = max([self.jet_order] + [g.degree for g in self.germs])
        germs, strata = [], []
        for g in self.germs:
            germs.append(MapGermJet(c.truncate(k) for c in g.components))
            P = self.stratum(g.name)
            if P is None and require_strata:
                raise ProblemSemanticError("no stratum declared", g.name, g.line)
            strata.append(P)
        return MultigermConfig(tuple(germs), tuple(strata), tuple(g.name for g in self.germs))


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

def _strip_comment(raw: str) -> str:
    i = raw.find("#")
    return raw if i < 0 else raw[:i]


def _int_arg(toks, what, line):
    if toks[0].kind != "int" or toks[1].kind != "end":
        bad = toks[0] if toks[0].kind != "int" else toks[1]
        raise ProblemSyntaxError(f"expected a single integer after {what!r}", line, bad.column)
    return int(toks[0].text)


def _rational(p: _Parser) -> Fraction:
    sign = 1
    if p.cur.text in ("+", "-"):
        sign = -1 if p.eat().text == "-" else 1
    if p.cur.kind == "float":
        raise NonRationalLiteral(f"non-rational entry {p.cur.text!r}; write it as p/q", p.cur.line, p.cur.column)
    num = int(p.eat(kind="int").text)
    den = 1
    if p.cur.text == "/":
        p.eat()
        d = p.eat(kind="int")
        den = int(d.text)
        if den == 0:
            p.fail("division by zero", d)
    return sign * Fraction(num, den)


def _parse_germ(rest: str, line: int, col: int) -> tuple:
    toks = tokenize(rest, line, col)
    p = _Parser(toks, [], _READ_ORDER)
    name = p.eat(kind="name")
    p.eat("(")
    variables = []
    while True:
        v = p.eat(kind="name")
        if v.text in variables:
            p.fail(f"variable {v.text!r} listed twice", v)
        variables.append(v.text)
        if p.cur.text == ",":
            p.eat()
            continue
        p.eat(")")
        break
    p.eat("=")
    p.vars = {v: j for j, v in enumerate(variables)}
    p.m = len(variables)
    p.eat("(")
    comps = []
    try:
        while True:
            if p.cur.text in (",", ")"):
                p.fail("empty component")
            comps.append(p.expr())
            if p.cur.text == ",":
                p.eat()
                continue
            p.eat(")")
            break
    except NonRationalLiteral as exc:
        raise ProblemSemanticError(exc.message, name.text, line) from None
    if p.cur.kind != "end":
        p.fail(f"unexpected {p.cur.text!r} after the component list")
    return name, tuple(variables), tuple(comps)


def _parse_stratum(rest: str, line: int, col: int, lookup) -> tuple:
    toks = tokenize(rest, line, col)
    p = _Parser(toks, [], 0)
    name = p.eat(kind="name")
    p.eat("=")
    kw = p.eat(kind="name")
    germ = lookup(name)
    if kw.text == "zero":
        vectors = []
    elif kw.text == "span":
        p.eat("[")
        vectors = []
        while p.cur.text != "]":
            p.eat("(")
            vec = []
            try:
                while True:
                    vec.append(_rational(p))
                    if p.cur.text == ",":
                        p.eat()
                        continue
                    p.eat(")")
                    break
            except NonRationalLiteral as exc:
                raise ProblemSemanticError(exc.message, name.text, line) from None
            vectors.append((vec, line))
            if p.cur.text == ",":
                p.eat()
                if p.cur.text == "]":
                    p.fail("trailing comma in span list")
        p.eat("]")
    else:
        p.fail(f"expected 'span' or 'zero', found {kw.text!r}", kw)
    if p.cur.kind != "end":
        p.fail(f"unexpected {p.cur.text!r}")
    return name, germ, [v for v, _ in vectors]


def parse_problem(text: str) -> ProblemFile:
    """Parse a problem file.

    Syntax errors raise ProblemSyntaxError with line and column; well-formed
    but meaningless input raises ProblemSemanticError naming the germ.
    """
    target_dim = order = query = None
    decls: dict = {}
    strata_raw = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = _strip_comment(raw)
        if not body.strip():
            continue
        indent = len(body) - len(body.lstrip())
        stripped = body.strip()
        kw, _, rest = stripped.partition(" ")
        rest_col = indent + len(kw) + 2 + (len(rest) - len(rest.lstrip()))
        rest = rest.strip()
        if kw == "target_dim":
            if target_dim is not None:
                raise ProblemSyntaxError("target_dim given twice", lineno, indent + 1)
            target_dim = _int_arg(tokenize(rest, lineno, rest_col), kw, lineno)
            if target_dim < 1:
                raise ProblemSemanticError("target_dim must be positive", line=lineno)
        elif kw == "order":
            if order is not None:
                raise ProblemSyntaxError("order given twice", lineno, indent + 1)
            order = _int_arg(tokenize(rest, lineno, rest_col), kw, lineno)
            if order < 1:
                raise ProblemSemanticError("order must be at least 1", line=lineno)
        elif kw == "germ":
            name, variables, comps = _parse_germ(rest, lineno, rest_col)
            if name.text in decls:
                raise ProblemSemanticError("declared twice", name.text, lineno)
            decls[name.text] = (variables, comps, lineno)
        elif kw == "stratum":
            strata_raw.append((rest, lineno, rest_col))
        elif kw == "query":
            toks = tokenize(rest, lineno, rest_col)
            text_q = rest
            if not rest or text_q not in QUERIES:
                col = toks[0].column
                raise ProblemSyntaxError(
                    f"unknown query {rest!r}; expected one of {', '.join(QUERIES)}", lineno, col
                )
            if query is not None:
                raise ProblemSyntaxError("query given twice", lineno, indent + 1)
            query = text_q
        else:
            raise ProblemSyntaxError(f"unknown statement {kw!r}", lineno, indent + 1)
    if target_dim is None:
        raise ProblemSemanticError("missing 'target_dim' statement")
    if not decls:
        raise ProblemSemanticError("no germs declared")

    germs = []
    m0 = None
    for name, (variables, comps, lineno) in decls.items():
        if len(comps) != target_dim:
            raise ProblemSemanticError(
                f"has {len(comps)} components but target_dim is {target_dim}", name, lineno
            )
        if m0 is None:
            m0 = len(variables)
        elif len(variables) != m0:
            raise ProblemSemanticError(
                f"has {len(variables)} source variables, other germs have {m0}", name, lineno
            )
        for idx, c in enumerate(comps):
            if c.constant_term():
                raise ProblemSemanticError(
                    f"component {idx + 1} has nonzero constant term {c.constant_term()}; "
                    "germs must send 0 to 0",
                    name,
                    lineno,
                )
        germs.append(GermDecl(name, variables, comps, lineno))

    def lookup(tok):
        if tok.text not in decls:
            raise ProblemSemanticError("stratum refers to an undeclared germ", tok.text, tok.line)
        return tok.text

    strata = {}
    for rest, lineno, col in strata_raw:
        name, germ, vectors = _parse_stratum(rest, lineno, col, lookup)
        if germ in strata:
            raise ProblemSemanticError("stratum declared twice", germ, lineno)
        for v in vectors:
            if len(v) != target_dim:
                raise ProblemSemanticError(
                    f"stratum vector has {len(v)} entries, expected {target_dim}", germ, lineno
                )
        strata[germ] = Subspace(target_dim, vectors)
    ordered = tuple((g.name, strata[g.name]) for g in germs if g.name in strata)
    return ProblemFile(target_dim, tuple(germs), ordered, order, query)


def _fmt_q(x: Fraction) -> str:
    return str(x)


def serialize(problem: ProblemFile) -> str:
    """Canonical text form; parse_problem(serialize(p)) == p."""
    lines = [f"target_dim {problem.target_dim}"]
    if problem.order is not None:
        lines.append(f"order {problem.order}")
    for g in problem.germs:
        comps = ", ".join(c.to_str(g.variables) for c in g.components)
        lines.append(f"germ {g.name}({', '.join(g.variables)}) = ({comps})")
    for name, P in problem.strata:
        if P.dim == 0:
            lines.append(f"stratum {name} = zero")
        else:
            vecs = ", ".join("(" + ", ".join(_fmt_q(x) for x in v) + ")" for v in P.vectors())
            lines.append(f"stratum {name} = span[{vecs}]")
    if problem.query is not None:
        lines.append(f"query {problem.query}")
    return "\n".join(lines) + "\n"


def problem_from_catalog(name: str, query: str | None = None, order: int | None = None) -> ProblemFile:
    """A catalog entry or configuration as a problem file."""
    item = catalog_lookup(name)
    if isinstance(item, CatalogConfig):
        cfg = item.config
    else:
        cfg = item.config()
    from .jets import default_names

    m = cfg.germs[0].source_dim
    names = tuple(default_names(m))
    germs = tuple(GermDecl(lab, names, tuple(cfg.germs[i].components)) for i, lab in enumerate(cfg.labels))
    strata = tuple((lab, P) for lab, P in zip(cfg.labels, cfg.strata) if P is not None)
    return ProblemFile(cfg.target_dim, germs, strata, order, query)


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

@dataclass
class Report:
    """Outcome of one query: verdict, certificates and the parsed problem."""

    query: str
    verdict: bool | None
    order: int | None
    exit_code: int
    summary: list = field(default_factory=list)
    certificate: list = field(default_factory=list)
    witness: list = field(default_factory=list)
    echo: str = ""
    verified: bool | None = None
    error: str | None = None
    elapsed: float = 0.0

    def body(self) -> dict:
        """Everything except timing; identical inputs give identical bodies."""
        return {
            "query": self.query,
            "verdict": self.verdict,
            "order": self.order,
            "exit_code": self.exit_code,
            "summary": self.summary,
            "certificate": self.certificate,
            "witness": self.witness,
            "certificates_verified": self.verified,
            "error": self.error,
            "problem": self.echo,
        }

    def to_json(self) -> str:
        doc = self.body()
        doc["elapsed_seconds"] = round(self.elapsed, 6)
        return json.dumps(doc, indent=2)

    def to_text(self, timing: bool = True) -> str:
        out = ["=== VERDICT ==="]
        out.append(f"query: {self.query}")
        if self.error is not None:
            out.append("verdict: error")
            out.append(f"error: {self.error}")
        else:
            out.append(f"verdict: {_word(self.query, self.verdict)}")
        if self.order is not None:
            out.append(f"jet order: {self.order}")
        out.extend(self.summary)
        if self.verified is not None:
            out.append(f"certificates verified: {'yes' if self.verified else 'NO'}")
        out.append("=== CERTIFICATE ===")
        out.extend(self.certificate or ["(none)"])
        out.append("=== WITNESS ===")
        out.extend(self.witness or ["(none)"])
        out.append("=== PROBLEM-ECHO ===")
        out.append(self.echo.rstrip("\n"))
        if timing:
            out.append("=== TIMING ===")
            out.append(f"elapsed: {self.elapsed:.6f} s")
        out.append("=== END ===")
        return "\n".join(out) + "\n"


def _word(query, verdict) -> str:
    if verdict is None:
        return "n/a"
    words = {
        "check-germ": ("stable", "unstable"),
        "check-multigerm": ("stable", "unstable"),
        "check-normal-crossing": ("normal crossing", "not normal crossing"),
        "equivalence": ("agree", "DISAGREE"),
        "general-position": ("general position", "not in general position"),
        "reduce": ("reduced", "not reduced"),
        "adapt": ("adapted", "not adapted"),
    }
    pos, neg = words.get(query, ("true", "false"))
    return pos if verdict else neg


def _vec(v) -> str:
    return "(" + ", ".join(str(Fraction(x)) for x in v) + ")"


def _field_lines(prefix, fld, names) -> list:
    return [f"{prefix}[{i + 1}] = {c.to_str(names)}" for i, c in enumerate(fld)]


def _names(problem: ProblemFile, l: int):
    return list(problem.germs[l].variables)


def _target_names(n: int) -> list:
    return [f"y{i + 1}" for i in range(n)]


def _verdict_certificate(verdict, problem: ProblemFile, cfg: MultigermConfig, labels=None) -> tuple:
    """(certificate lines, witness lines) for a StabilityVerdict."""
    op = verdict.operator
    n = cfg.target_dim
    labels = labels or cfg.labels
    ys = _target_names(n)
    cert, wit = [], []
    if verdict.stable:
        cert.append(
            f"operator rank {verdict.rank} = {verdict.dimension} (onto all {op.order}-jets of fields along the fiber)"
        )
        m, k = cfg.germs[0].source_dim, op.order
        for l in range(len(cfg)):
            for i in range(n):
                w = [VectorFieldAlongGerm.zero(n, m, k) for _ in cfg.germs]
                w[l] = VectorFieldAlongGerm.basis_field(n, i, Jet.constant(1, m, k))
                sol = verdict.solver.solve(w)
                cert.append(f"solve w = d/d{ys[i]} at {labels[l]}:")
                for ll in range(len(cfg)):
                    names = _names(problem, ll) if problem else None
                    for line in _field_lines(f"  u@{labels[ll]}", sol.u[ll], names):
                        cert.append(line)
                cert.extend(_field_lines("  v", sol.v, ys))
                if not sol.exact:
                    cert.append("  residual lies in the span of f*(m_q) terms")
    else:
        wv = verdict.witness
        cert.append(f"operator rank {verdict.rank} < {verdict.dimension}")
        (l, comp, mono) = wv.row
        names = _names(problem, l) if problem else None
        mono_s = Jet.monomial(mono, op.order).to_str(names)
        wit.append(f"unreachable field: w = ({mono_s}) d/d{ys[comp]} at {labels[l]}, zero elsewhere")
        wit.append("annihilating functional (nonzero entries):")
        for idx, a in enumerate(wv.functional):
            if a:
                ll, cc, e = op.row_labels[idx]
                nm = _names(problem, ll) if problem else None
                wit.append(
                    f"  {a} * coeff[{Jet.monomial(e, op.order).to_str(nm)}] of component {cc + 1} at {labels[ll]}"
                )
    return cert, wit


def _gp_details(family: SubspaceFamily, labels) -> tuple:
    """Per-member sums P_i + (intersection of the others) and the method verdicts."""
    lines = []
    bad = []
    s = len(family)
    for i in range(s):
        others = [family[j] for j in range(s) if j != i]
        Q = subspace_sum(family[i], subspace_intersection(others))
        lines.append(f"dim(P[{labels[i]}] + cap of others) = {Q.dim} of {family.ambient_dim}")
        if Q.dim != family.ambient_dim:
            bad.append(i)
    verdicts = {meth: gp_check(family, meth) for meth in METHODS}
    return lines, bad, verdicts


def _stratum_lines(cfg: MultigermConfig) -> list:
    out = []
    for lab, P in zip(cfg.labels, cfg.strata):
        if P is None:
            continue
        vecs = ", ".join(_vec(v) for v in P.vectors()) or "0"
        out.append(f"P[{lab}] = span[{vecs}] (dim {P.dim})")
    return out


def _q_check_germ(problem, k, verify):
    cfg = problem.config()
    cert, wit, ok, good = [], [], True, True
    for l, lab in enumerate(cfg.labels):
        single = MultigermConfig((cfg.germs[l],), (cfg.strata[l],), (lab,))
        v = check_infinitesimal_stability(single, k)
        ok = ok and v.stable
        c, w = _verdict_certificate(v, _sub_problem(problem, l), single)
        cert.append(f"germ {lab}: {'stable' if v.stable else 'unstable'}")
        cert.extend("  " + x for x in c)
        wit.extend(w)
        if verify:
            good = good and v.verify()
    return ok, [], cert, wit, good


def _sub_problem(problem, l):
    return ProblemFile(problem.target_dim, (problem.germs[l],), (), problem.order, problem.query)


def _q_check_multigerm(problem, k, verify):
    cfg = problem.config()
    v = check_infinitesimal_stability(cfg, k)
    cert, wit = _verdict_certificate(v, problem, cfg)
    summary = [f"germs in fiber: {len(cfg)}"]
    return v.stable, summary, cert, wit, (v.verify() if verify else True)


def _q_normal_crossing(problem, k, verify):
    cfg = problem.config(require_strata=True)
    rep = theorem1_local_equivalence(cfg, k)
    cert, wit = [], []
    good = True
    for lab, gv in zip(cfg.labels, rep.germ_verdicts):
        cert.append(f"germ {lab}: {'stable' if gv.stable else 'unstable'} (rank {gv.rank}/{gv.dimension})")
        if verify:
            good = good and gv.verify()
        if not gv.stable:
            sub = MultigermConfig((cfg.germs[cfg.labels.index(lab)],), labels=(lab,))
            _, w = _verdict_certificate(gv, _sub_problem(problem, cfg.labels.index(lab)), sub)
            wit.append(f"germ {lab} is unstable:")
            wit.extend("  " + x for x in w)
    cert.extend(_stratum_lines(cfg))
    if len(cfg) >= 2:
        fam = SubspaceFamily(cfg.strata)
        lines, bad, verdicts = _gp_details(fam, cfg.labels)
        cert.extend(lines)
        cert.append("general position: " + ("yes" if rep.general_position else "no"))
        for i in bad:
            wit.append(f"P[{cfg.labels[i]}] is not transverse to the intersection of the other strata")
        if verify:
            good = good and len(set(verdicts.values())) == 1 and verdicts["direct"] == rep.general_position
    else:
        cert.append("general position: vacuous for a single germ")
    return rep.normal_crossing, [], cert, wit, good


def _q_equivalence(problem, k, verify):
    cfg = problem.config(require_strata=True)
    rep = theorem1_local_equivalence(cfg, k)
    summary = [
        f"infinitesimally stable: {'yes' if rep.infinitesimal.stable else 'no'}",
        f"normal crossing: {'yes' if rep.normal_crossing else 'no'}",
    ]
    cert, wit = _verdict_certificate(rep.infinitesimal, problem, cfg)
    for lab, gv in zip(cfg.labels, rep.germ_verdicts):
        cert.append(f"germ {lab} alone: {'stable' if gv.stable else 'unstable'}")
    cert.extend(_stratum_lines(cfg))
    if len(cfg) >= 2:
        cert.append("general position: " + ("yes" if rep.general_position else "no"))
    good = True
    if verify:
        good = rep.infinitesimal.verify() and all(gv.verify() for gv in rep.germ_verdicts)
    return rep.agree, summary, cert, wit, good


def _q_general_position(problem, k, verify):
    cfg = problem.config(require_strata=True)
    if len(cfg) < 2:
        raise PreconditionError("a general-position query needs at least two strata")
    fam = SubspaceFamily(cfg.strata)
    lines, bad, verdicts = _gp_details(fam, cfg.labels)
    ok = verdicts["direct"]
    cert = _stratum_lines(cfg) + lines
    cert.extend(f"method {meth}: {'yes' if val else 'no'}" for meth, val in verdicts.items())
    wit = []
    good = len(set(verdicts.values())) == 1
    if ok:
        ad = adapt_coordinates(fam)
        cert.append("adapted target coordinates (rows of L):")
        cert.extend("  " + _vec(r) for r in ad.change_of_basis.to_rows())
        for lab, I in zip(cfg.labels, ad.index_sets):
            cert.append(f"  I[{lab}] = {{{', '.join(str(i + 1) for i in I)}}}")
        if verify:
            good = good and ad.verify(fam)
            # a translate for the standard test vectors e_1, e_2, ...
            vecs = [[int(i == (l % fam.ambient_dim)) for i in range(fam.ambient_dim)] for l in range(len(fam))]
            good = good and find_common_translate(fam, vecs) is not None
    else:
        for i in bad:
            wit.append(f"P[{cfg.labels[i]}] + (intersection of the others) is a proper subspace")
    return ok, [], cert, wit, good


def _adaptation_lines(ad, problem) -> list:
    cfg = ad.base
    n = cfg.target_dim
    out = ["target change y' = L y, rows of L:"]
    out.extend("  " + _vec(r) for r in ad.adaptation.change_of_basis.to_rows())
    for l, lab in enumerate(cfg.labels):
        names = _names(problem, l)
        I = ad.index_sets[l]
        Ibar = ad.complements[l]
        out.append(f"germ {lab}:")
        out.append(f"  I = {{{', '.join(str(i + 1) for i in I)}}}, complement = {{{', '.join(str(i + 1) for i in Ibar)}}}")
        sig = ", ".join(f"{kk + 1} -> {names[i]}" for kk, i in sorted(ad.sigma[l].items()))
        out.append(f"  sigma: {{{sig}}}")
        out.append(f"  free source coordinates: {{{', '.join(names[i] for i in ad.free_indices[l])}}}")
        psi, _ = ad.source_changes[l]
        out.append(f"  new source coordinates: {psi.to_str(names)}")
        out.append(f"  normal form: {cfg.germs[l].to_str(names)}")
    del n
    return out


def _q_adapt(problem, k, verify):
    cfg = problem.config(require_strata=True).truncate(problem.jet_order)
    ad = adapt_multigerm(cfg)
    return True, [], _adaptation_lines(ad, problem), [], (ad.verify() if verify else True)


def _q_reduce(problem, k, verify):
    cfg = problem.config(require_strata=True).truncate(problem.jet_order)
    ad = adapt_multigerm(cfg)
    red = reduce_system(ad)
    n = cfg.target_dim
    m = cfg.germs[0].source_dim
    cert = _adaptation_lines(ad, problem)
    cert.append("reduced equations (ut = u~, vt = v~, wt = w~):")
    names = _names(problem, 0)
    cert.extend("  " + e for e in red.equations(names, _target_names(n)))
    cert.append("w~_k = w_k - c_k + sum_j (d f_k / d x_sigma(j)) (c_j - w_j) for k in I; w~_k = w_k otherwise")
    cert.append("back-substitution: u_sigma(k) = u~_sigma(k) - c_k, v = v~ + c")
    good = ad.verify()
    if verify:
        kk = problem.jet_order
        stable = check_infinitesimal_stability(cfg, kk).stable
        if stable:
            for l in range(len(cfg)):
                for i in range(n):
                    w = [VectorFieldAlongGerm.zero(n, m, kk) for _ in cfg.germs]
                    w[l] = VectorFieldAlongGerm.basis_field(n, i, Jet.variable(0, m, kk) + 1)
                    res = solve_via_reduction(red, w)
                    good = good and res.verify()
            cert.append(
                f"pipeline check: solved w = (1 + {names[0]}) d/dy_i at every germ and direction; "
                "residual equals the dropped term"
            )
    return True, [], cert, [], good


_DISPATCH = {
    "check-germ": _q_check_germ,
    "check-multigerm": _q_check_multigerm,
    "check-normal-crossing": _q_normal_crossing,
    "equivalence": _q_equivalence,
    "general-position": _q_general_position,
    "reduce": _q_reduce,
    "adapt": _q_adapt,
}


def run_query(problem: ProblemFile, query: str | None = None, order: int | None = None,
              verify: bool = False) -> Report:
    """Run a query on a parsed problem.

    `query` and `order` override the file's own statements.  Exit codes: 0 for
    a positive verdict, 1 for a negative one, 2 for input or precondition
    errors (and for certificates that fail re-verification).
    """
    start = time.perf_counter()
    query = query or problem.query
    if order is not None:
        problem = ProblemFile(problem.target_dim, problem.germs, problem.strata, order, problem.query)
    echo = serialize(problem)
    if query not in _DISPATCH:
        rep = Report(str(query), None, None, 2, echo=echo,
                     error=f"no query given; expected one of {', '.join(QUERIES)}")
        rep.elapsed = time.perf_counter() - start
        return rep
    k = problem.jet_order
    try:
        ok, summary, cert, wit, good = _DISPATCH[query](problem, k, verify)
    except (PreconditionError, ProblemSemanticError, ValueError) as exc:
        rep = Report(query, None, k, 2, echo=echo, error=str(exc))
        rep.elapsed = time.perf_counter() - start
        return rep
    code = 0 if ok else 1
    verified = None
    if verify:
        verified = bool(good)
        if not verified:
            code = 2
    rep = Report(query, bool(ok), k, code, summary, cert, wit, echo, verified)
    rep.elapsed = time.perf_counter() - start
    return rep
