"""Exact rational linear algebra: RREF, solving, cokernels, subspaces.

Matrices are small and dense in the API; elimination internally walks only the
nonzero entries of each row, which is what keeps the stability operators
(a few hundred rows, about a thousand mostly-zero columns) cheap.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

__all__ = [
    "Matrix",
    "Subspace",
    "rref",
    "rank",
    "solve",
    "nullspace",
    "cokernel_basis",
    "subspace_sum",
    "subspace_intersection",
    "annihilator",
    "column_space_basis",
    "LinearSolver",
]

_ZERO = Fraction(0)


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


class Matrix:
    """Immutable row-major matrix of Fractions."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, rows: int, cols: int, entries: Iterable):
        entries = tuple(_frac(x) for x in entries)
        if len(entries) != rows * cols:
            raise ValueError(f"expected {rows * cols} entries, got {len(entries)}")
        self.rows = rows
        self.cols = cols
        self.entries = entries

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], cols: int | None = None) -> "Matrix":
        rows = [list(r) for r in rows]
        if cols is None:
            if not rows:
                raise ValueError("cannot infer column count of an empty matrix")
            cols = len(rows[0])
        if any(len(r) != cols for r in rows):
            raise ValueError("ragged rows")
        return cls(len(rows), cols, [x for r in rows for x in r])

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence], rows: int) -> "Matrix":
        columns = list(columns)
        if any(len(c) != rows for c in columns):
            raise ValueError("column length mismatch")
        return cls(rows, len(columns), [columns[j][i] for i in range(rows) for j in range(len(columns))])

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        return cls(n, n, [int(i == j) for i in range(n) for j in range(n)])

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "Matrix":
        return cls(rows, cols, [0] * (rows * cols))

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> list:
        return list(self.entries[i * self.cols:(i + 1) * self.cols])

    def column(self, j: int) -> list:
        return [self.entries[i * self.cols + j] for i in range(self.rows)]

    def to_rows(self) -> list:
        return [self.row(i) for i in range(self.rows)]

    @property
    def T(self) -> "Matrix":
        return Matrix(self.cols, self.rows, [self[i, j] for j in range(self.cols) for i in range(self.rows)])

    def __matmul__(self, other):
        if isinstance(other, Matrix):
            if self.cols != other.rows:
                raise ValueError("shape mismatch in matrix product")
            ocols = [other.column(j) for j in range(other.cols)]
            out = []
            for i in range(self.rows):
                r = self.row(i)
                nz = [(k, a) for k, a in enumerate(r) if a]
                for col in ocols:
                    out.append(sum((a * col[k] for k, a in nz), _ZERO))
            return Matrix(self.rows, other.cols, out)
        vec = [_frac(x) for x in other]
        if len(vec) != self.cols:
            raise ValueError("shape mismatch in matrix-vector product")
        return [
            sum((a * vec[k] for k, a in enumerate(self.row(i)) if a), _ZERO)
            for i in range(self.rows)
        ]

    def __eq__(self, other):
        return (
            isinstance(other, Matrix)
            and (self.rows, self.cols) == (other.rows, other.cols)
            and self.entries == other.entries
        )

    def __hash__(self):
        return hash((self.rows, self.cols, self.entries))

    def __repr__(self):
        body = "; ".join(" ".join(str(x) for x in self.row(i)) for i in range(self.rows))
        return f"Matrix({self.rows}x{self.cols}: [{body}])"


# --- elimination on sparse rows -------------------------------------------

def _sparse_rows(M: Matrix) -> list:
    rows = []
    c = M.cols
    e = M.entries
    for i in range(M.rows):
        rows.append({j: e[i * c + j] for j in range(c) if e[i * c + j]})
    return rows


def _gauss_jordan(rows: list, ncols: int, stop: int | None = None):
    """In-place Gauss-Jordan on a list of {col: Fraction} rows.

    Pivots are searched only among columns < `stop` (default: all).  Returns
    the list of (pivot column, row) pairs in column order; remaining rows are
    returned as the second element (their pivot-range part is zero).
    """
    stop = ncols if stop is None else stop
    pending = [r for r in rows if r]
    pivots = []
    # column -> indices of pending rows touching it would be an optimisation;
    # a linear scan is fine at the sizes used here.
    for col in range(stop):
        best = None
        for idx, r in enumerate(pending):
            if col in r and (best is None or len(r) < len(pending[best])):
                best = idx
        if best is None:
            continue
        prow = pending.pop(best)
        inv = 1 / prow[col]
        if inv != 1:
            for j in prow:
                prow[j] *= inv
        items = list(prow.items())
        for r in pending:
            f = r.get(col)
            if f:
                _axpy(r, items, f)
        for _, r in pivots:
            f = r.get(col)
            if f:
                _axpy(r, items, f)
        pivots.append((col, prow))
        pending = [r for r in pending if r]
    return pivots, pending


def _axpy(r: dict, items, f):
    # r -= f * pivot_row
    for j, v in items:
        s = r.get(j, 0) - f * v
        if s:
            r[j] = s
        else:
            del r[j]


def rref(M: Matrix):
    """Reduced row-echelon form.

    Returns ``(R, rank, pivots)`` with R of the same shape as M and zero rows
    at the bottom.
    """
    pivots, _ = _gauss_jordan(_sparse_rows(M), M.cols)
    out = []
    for _, r in pivots:
        out.append([r.get(j, _ZERO) for j in range(M.cols)])
    for _ in range(M.rows - len(pivots)):
        out.append([_ZERO] * M.cols)
    R = Matrix(M.rows, M.cols, [x for row in out for x in row]) if M.rows else M
    return R, len(pivots), tuple(c for c, _ in pivots)


def _echelon_rank(rows: list, ncols: int) -> int:
    # forward elimination only; no back-substitution, so far less fill-in
    pending = [r for r in rows if r]
    r = 0
    for col in range(ncols):
        best = None
        for idx, row in enumerate(pending):
            if col in row and (best is None or len(row) < len(pending[best])):
                best = idx
        if best is None:
            continue
        prow = pending.pop(best)
        inv = 1 / prow[col]
        items = [(j, v * inv) for j, v in prow.items() if j != col]
        for row in pending:
            f = row.pop(col, None)
            if f:
                _axpy(row, items, f)
        pending = [row for row in pending if row]
        r += 1
        if not pending:
            break
    return r


def rank(M: Matrix) -> int:
    """Rank over Q."""
    if M.rows > M.cols:
        M = M.T
    return _echelon_rank(_sparse_rows(M), M.cols)


def nullspace(M: Matrix) -> list:
    """Basis of {x : M x = 0} read off the RREF (one vector per free column)."""
    pivots, _ = _gauss_jordan(_sparse_rows(M), M.cols)
    pivot_cols = {c: r for c, r in pivots}
    basis = []
    for free in range(M.cols):
        if free in pivot_cols:
            continue
        v = [_ZERO] * M.cols
        v[free] = Fraction(1)
        for c, r in pivots:
            a = r.get(free)
            if a:
                v[c] = -a
        basis.append(v)
    return basis


def cokernel_basis(A: Matrix) -> list:
    """Row vectors c with c^T A = 0 spanning the annihilator of the column space.

    Each returned vector is a certificate that A is not surjective: it pairs
    to zero with every column and to nonzero with some vector of the target.
    """
    return nullspace(A.T)


def solve(A: Matrix, b: Sequence):
    """One exact solution x of A x = b (free variables set to 0), or None."""
    b = [_frac(x) for x in b]
    if len(b) != A.rows:
        raise ValueError("right-hand side has the wrong length")
    rows = _sparse_rows(A)
    for r, bi in zip(rows, b):
        if bi:
            r[A.cols] = bi
    pivots, rest = _gauss_jordan(rows, A.cols + 1, stop=A.cols)
    if any(r for r in rest):
        return None
    x = [_ZERO] * A.cols
    for c, r in pivots:
        x[c] = r.get(A.cols, _ZERO)
    return x


def column_space_basis(A: Matrix) -> list:
    """Echelon basis of the column space of A as row vectors (RREF of A^T)."""
    pivots, _ = _gauss_jordan(_sparse_rows(A.T), A.rows)
    return [[r.get(j, _ZERO) for j in range(A.rows)] for _, r in pivots]


# --- subspaces -------------------------------------------------------------

class Subspace:
    """Linear subspace of Q^n stored by the RREF of a basis (rows).

    Equal subspaces have identical stored bases, so ``==`` is structural.
    """

    __slots__ = ("ambient_dim", "basis")

    def __init__(self, ambient_dim: int, vectors: Iterable[Sequence] = ()):
        if ambient_dim < 1:
            raise ValueError("ambient dimension must be positive")
        vecs = [list(v) for v in vectors]
        for v in vecs:
            if len(v) != ambient_dim:
                raise ValueError(f"vector of length {len(v)} in ambient dimension {ambient_dim}")
        self.ambient_dim = ambient_dim
        if vecs:
            R, r, _ = rref(Matrix.from_rows(vecs, ambient_dim))
            self.basis = Matrix(r, ambient_dim, R.entries[: r * ambient_dim])
        else:
            self.basis = Matrix(0, ambient_dim, ())

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        return cls(n)

    @classmethod
    def full(cls, n: int) -> "Subspace":
        return cls(n, Matrix.identity(n).to_rows())

    @classmethod
    def coordinate(cls, n: int, axes: Iterable[int]) -> "Subspace":
        """Span of the standard basis vectors e_i for i in `axes` (0-based)."""
        return cls(n, [[int(i == a) for i in range(n)] for a in axes])

    @property
    def dim(self) -> int:
        return self.basis.rows

    @property
    def codim(self) -> int:
        return self.ambient_dim - self.dim

    def vectors(self) -> list:
        return self.basis.to_rows()

    def contains(self, v: Sequence) -> bool:
        if len(v) != self.ambient_dim:
            raise ValueError("vector length does not match ambient dimension")
        return rank(Matrix.from_rows(self.vectors() + [list(v)], self.ambient_dim)) == self.dim

    def __contains__(self, v):
        return self.contains(v)

    def transform(self, T: Matrix) -> "Subspace":
        """Image under the linear map v -> T v."""
        if T.cols != self.ambient_dim:
            raise ValueError("transformation has the wrong number of columns")
        return Subspace(T.rows, [T @ v for v in self.vectors()])

    def __eq__(self, other):
        return isinstance(other, Subspace) and self.ambient_dim == other.ambient_dim and self.basis == other.basis

    def __hash__(self):
        return hash((self.ambient_dim, self.basis))

    def __repr__(self):
        if not self.dim:
            return f"Subspace(0 in Q^{self.ambient_dim})"
        vs = ", ".join("(" + ", ".join(str(x) for x in v) + ")" for v in self.vectors())
        return f"Subspace(span[{vs}] in Q^{self.ambient_dim})"


def _check_ambient(spaces):
    dims = {P.ambient_dim for P in spaces}
    if len(dims) > 1:
        raise ValueError(f"ambient dimension mismatch: {sorted(dims)}")


def annihilator(P: Subspace) -> Subspace:
    """Linear forms (as row vectors) vanishing on P."""
    n = P.ambient_dim
    if P.dim == 0:
        return Subspace.full(n)
    return Subspace(n, nullspace(P.basis))


def subspace_sum(P: Subspace, Q: Subspace) -> Subspace:
    _check_ambient([P, Q])
    return Subspace(P.ambient_dim, P.vectors() + Q.vectors())


def subspace_intersection(family: Sequence[Subspace]) -> Subspace:
    """Intersection computed as the annihilator of the sum of annihilators."""
    family = list(family)
    if not family:
        raise ValueError("intersection of an empty family is undefined here")
    _check_ambient(family)
    n = family[0].ambient_dim
    forms = []
    for P in family:
        forms.extend(annihilator(P).vectors())
    if not forms:
        return Subspace.full(n)
    return Subspace(n, nullspace(Matrix.from_rows(forms, n)))


class LinearSolver:
    """One elimination of A, reused for many right-hand sides.

    Gauss-Jordan runs on [A | I]; the identity block records the row
    operations, so solving A x = b afterwards costs one pass over b.
    """

    def __init__(self, A: Matrix):
        self.A = A
        R, N = A.rows, A.cols
        rows = _sparse_rows(A)
        for i, r in enumerate(rows):
            r[N + i] = Fraction(1)
        pivots, rest = _gauss_jordan(rows, N + R, stop=N)
        self.rank = len(pivots)
        self._pivots = [(c, {j - N: v for j, v in r.items() if j >= N}) for c, r in pivots]
        self._checks = [{j - N: v for j, v in r.items() if j >= N} for r in rest]

    @property
    def surjective(self) -> bool:
        return self.rank == self.A.rows

    def solve(self, b: Sequence):
        b = [_frac(x) for x in b]
        if len(b) != self.A.rows:
            raise ValueError("right-hand side has the wrong length")
        nz = {i: v for i, v in enumerate(b) if v}
        for chk in self._checks:
            if sum((v * nz[i] for i, v in chk.items() if i in nz), _ZERO):
                return None
        x = [_ZERO] * self.A.cols
        for c, comb in self._pivots:
            x[c] = sum((v * nz[i] for i, v in comb.items() if i in nz), _ZERO)
        return x
