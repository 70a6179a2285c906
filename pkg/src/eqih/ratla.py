"""Exact rational dense linear algebra.

Matrices are immutable grids of rationals; subspaces are stored through a
canonical reduced-column-echelon basis, so two equal subspaces compare (and
hash) identically.  Everything downstream relies on that canonicalization.
"""

from __future__ import annotations

from dataclasses import dataclass

try:
    from gmpy2 import mpq as QNUM
except ImportError:  # pragma: no cover - gmpy2 is a declared dependency
    from fractions import Fraction as QNUM

from .errors import AmbientMismatch, NotASubspace

ZERO = QNUM(0)
ONE = QNUM(1)


def rat(x) -> "QNUM":
    """Coerce ints, 'p/q' strings and rationals to the scalar type."""
    if isinstance(x, str):
        return QNUM(x)
    return QNUM(x)


def rat_str(x) -> str:
    return str(x)


class Matrix:
    """Immutable dense matrix over the rationals."""

    __slots__ = ("rows", "cols", "entries", "_hash")

    def __init__(self, rows, cols, entries):
        entries = tuple(tuple(rat(x) for x in row) for row in entries)
        if len(entries) != rows or any(len(r) != cols for r in entries):
            raise ValueError("entry grid does not match declared shape")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, *a):
        raise AttributeError("Matrix is immutable")

    @staticmethod
    def from_rows(rows_list) -> "Matrix":
        rows_list = list(rows_list)
        cols = len(rows_list[0]) if rows_list else 0
        return Matrix(len(rows_list), cols, rows_list)

    @staticmethod
    def zero(rows, cols) -> "Matrix":
        return Matrix(rows, cols, [[ZERO] * cols for _ in range(rows)])

    @staticmethod
    def identity(n) -> "Matrix":
        return Matrix(n, n, [[ONE if i == j else ZERO for j in range(n)] for i in range(n)])

    @staticmethod
    def from_columns(ambient_dim, columns) -> "Matrix":
        columns = [list(c) for c in columns]
        if any(len(c) != ambient_dim for c in columns):
            raise ValueError("column length mismatch")
        return Matrix(ambient_dim, len(columns),
                      [[columns[j][i] for j in range(len(columns))] for i in range(ambient_dim)])

    def column(self, j):
        return tuple(self.entries[i][j] for i in range(self.rows))

    def columns(self):
        return [self.column(j) for j in range(self.cols)]

    def transpose(self) -> "Matrix":
        return Matrix(self.cols, self.rows,
                      [[self.entries[i][j] for i in range(self.rows)] for j in range(self.cols)])

    def __eq__(self, other):
        return (isinstance(other, Matrix) and self.rows == other.rows
                and self.cols == other.cols and self.entries == other.entries)

    def __hash__(self):
        if self._hash is None:
            object.__setattr__(self, "_hash", hash((self.rows, self.cols, self.entries)))
        return self._hash

    def __repr__(self):
        return "Matrix(%d, %d, %s)" % (
            self.rows, self.cols, [[str(x) for x in row] for row in self.entries])

    def __add__(self, other) -> "Matrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch in addition")
        return Matrix(self.rows, self.cols,
                      [[a + b for a, b in zip(r1, r2)]
                       for r1, r2 in zip(self.entries, other.entries)])

    def __sub__(self, other) -> "Matrix":
        return self + other.scale(-1)

    def scale(self, c) -> "Matrix":
        c = rat(c)
        return Matrix(self.rows, self.cols, [[c * x for x in row] for row in self.entries])

    def __mul__(self, other) -> "Matrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch in product: %dx%d * %dx%d"
                             % (self.rows, self.cols, other.rows, other.cols))
        ot = other.transpose().entries
        return Matrix(self.rows, other.cols,
                      [[sum((a * b for a, b in zip(row, col)), ZERO) for col in ot]
                       for row in self.entries])

    def apply(self, vec):
        """Matrix times a column vector (given as a sequence)."""
        vec = [rat(x) for x in vec]
        if len(vec) != self.cols:
            raise ValueError("vector length mismatch")
        return tuple(sum((a * b for a, b in zip(row, vec)), ZERO) for row in self.entries)

    def hstack(self, other) -> "Matrix":
        if self.rows != other.rows:
            raise ValueError("row mismatch in hstack")
        return Matrix(self.rows, self.cols + other.cols,
                      [r1 + r2 for r1, r2 in zip(self.entries, other.entries)])

    def is_zero(self) -> bool:
        return all(x == 0 for row in self.entries for x in row)

    def rref(self):
        """Reduced row echelon form; returns (Matrix, pivot column list)."""
        m = [list(row) for row in self.entries]
        pivots = []
        r = 0
        for c in range(self.cols):
            if r >= self.rows:
                break
            pr = None
            for i in range(r, self.rows):
                if m[i][c] != 0:
                    pr = i
                    break
            if pr is None:
                continue
            m[r], m[pr] = m[pr], m[r]
            p = m[r][c]
            if p != 1:
                m[r] = [x / p for x in m[r]]
            for i in range(self.rows):
                if i != r and m[i][c] != 0:
                    f = m[i][c]
                    mr = m[r]
                    m[i] = [a - f * b for a, b in zip(m[i], mr)]
            pivots.append(c)
            r += 1
        return Matrix(self.rows, self.cols, m), pivots

    def rank(self) -> int:
        return len(self.rref()[1])

    def kernel_basis(self):
        """Basis vectors (tuples) of the null space, from the rref free columns."""
        red, pivots = self.rref()
        pivot_set = set(pivots)
        free = [c for c in range(self.cols) if c not in pivot_set]
        basis = []
        for fc in free:
            v = [ZERO] * self.cols
            v[fc] = ONE
            for r, pc in enumerate(pivots):
                v[pc] = -red.entries[r][fc]
            basis.append(tuple(v))
        return basis

    def solve(self, target):
        """A particular solution x of self*x = target, or None."""
        target = [rat(t) for t in target]
        if len(target) != self.rows:
            raise ValueError("target length mismatch")
        aug = Matrix(self.rows, self.cols + 1,
                     [list(row) + [t] for row, t in zip(self.entries, target)])
        red, pivots = aug.rref()
        if self.cols in pivots:
            return None
        x = [ZERO] * self.cols
        for r, pc in enumerate(pivots):
            x[pc] = red.entries[r][self.cols]
        return tuple(x)


def rref(m: Matrix):
    return m.rref()


def solve_preimage(m: Matrix, target):
    """Particular preimage of target under m, or None when unsolvable."""
    return m.solve(target)


@dataclass(frozen=True)
class Subspace:
    """Subspace of Q^ambient_dim given by a reduced-column-echelon basis."""

    ambient_dim: int
    basis: Matrix  # columns are the canonical basis, possibly 0 of them

    @staticmethod
    def from_matrix(m: Matrix) -> "Subspace":
        """Column span of m, canonicalized."""
        red, pivots = m.transpose().rref()
        cols = [red.entries[i] for i in range(len(pivots))]
        return Subspace(m.rows, Matrix.from_columns(m.rows, cols))

    @staticmethod
    def from_vectors(ambient_dim, vectors) -> "Subspace":
        return Subspace.from_matrix(Matrix.from_columns(ambient_dim, vectors))

    @staticmethod
    def zero(ambient_dim) -> "Subspace":
        return Subspace(ambient_dim, Matrix(ambient_dim, 0, [[] for _ in range(ambient_dim)]))

    @staticmethod
    def full(ambient_dim) -> "Subspace":
        return Subspace(ambient_dim, Matrix.identity(ambient_dim))

    @property
    def dim(self) -> int:
        return self.basis.cols

    def is_zero(self) -> bool:
        return self.dim == 0

    def is_full(self) -> bool:
        return self.dim == self.ambient_dim

    def contains(self, vec) -> bool:
        return self.basis.solve(vec) is not None

    def coords(self, vec):
        """Coordinates of vec in the canonical basis, or None if outside."""
        return self.basis.solve(vec)

    def contains_subspace(self, other: "Subspace") -> bool:
        if other.ambient_dim != self.ambient_dim:
            raise AmbientMismatch(self.ambient_dim, other.ambient_dim)
        return all(self.contains(c) for c in other.basis.columns())

    def vectors(self):
        return self.basis.columns()


def kernel(m: Matrix) -> Subspace:
    return Subspace.from_vectors(m.cols, m.kernel_basis())


def image(m: Matrix) -> Subspace:
    return Subspace.from_matrix(m)


def subspace_sum(a: Subspace, b: Subspace) -> Subspace:
    if a.ambient_dim != b.ambient_dim:
        raise AmbientMismatch(a.ambient_dim, b.ambient_dim)
    return Subspace.from_matrix(a.basis.hstack(b.basis))


def intersect(a: Subspace, b: Subspace) -> Subspace:
    if a.ambient_dim != b.ambient_dim:
        raise AmbientMismatch(a.ambient_dim, b.ambient_dim)
    if a.dim == 0 or b.dim == 0:
        return Subspace.zero(a.ambient_dim)
    # x in both spans: a.basis*s = b.basis*t, so (s,t) in ker[a.basis | -b.basis]
    stacked = a.basis.hstack(b.basis.scale(-1))
    vecs = [a.basis.apply(k[:a.dim]) for k in stacked.kernel_basis()]
    return Subspace.from_vectors(a.ambient_dim, vecs)


def preimage(m: Matrix, w: Subspace) -> Subspace:
    """{x : m*x in w} as a subspace of the domain."""
    if m.rows != w.ambient_dim:
        raise AmbientMismatch(m.rows, w.ambient_dim)
    if w.is_full():
        return Subspace.full(m.cols)
    q = quotient(Subspace.full(w.ambient_dim), w)
    return kernel(q.projection * m)


def map_image(m: Matrix, v: Subspace) -> Subspace:
    """Image m(v) of a subspace under a matrix."""
    if m.cols != v.ambient_dim:
        raise AmbientMismatch(m.cols, v.ambient_dim)
    return Subspace.from_matrix(m * v.basis)


@dataclass(frozen=True)
class QuotientSpace:
    """v/w with a projection defined on all of Q^ambient and a lift section.

    projection*lift = identity, projection kills w, and the kernel of the
    projection restricted to v is exactly w.
    """

    ambient_dim: int
    dim: int
    projection: Matrix  # dim x ambient_dim
    lift: Matrix        # ambient_dim x dim, columns in v

    def class_of(self, vec):
        return self.projection.apply(vec)

    def lift_class(self, coords):
        return self.lift.apply(coords)


def quotient(v: Subspace, w: Subspace) -> QuotientSpace:
    if v.ambient_dim != w.ambient_dim:
        raise AmbientMismatch(v.ambient_dim, w.ambient_dim)
    if not v.contains_subspace(w):
        raise NotASubspace("quotient denominator is not contained in numerator")
    n = v.ambient_dim
    # complete w-basis to a v-basis, then to an ambient basis
    chosen = list(w.basis.columns())
    comp = []
    for c in v.basis.columns():
        if not Subspace.from_vectors(n, chosen).contains(c):
            chosen.append(c)
            comp.append(c)
    extra = []
    for i in range(n):
        if len(chosen) == n:
            break
        e = tuple(ONE if j == i else ZERO for j in range(n))
        if not Subspace.from_vectors(n, chosen).contains(e):
            chosen.append(e)
            extra.append(e)
    basis = Matrix.from_columns(n, list(w.basis.columns()) + comp + extra)
    inv = _inverse(basis)
    q = len(comp)
    proj = Matrix(q, n, [inv.entries[w.dim + i] for i in range(q)])
    lift = Matrix.from_columns(n, comp)
    return QuotientSpace(n, q, proj, lift)


def _inverse(m: Matrix) -> Matrix:
    if m.rows != m.cols:
        raise ValueError("inverse of a non-square matrix")
    red, pivots = m.hstack(Matrix.identity(m.rows)).rref()
    if len(pivots) != m.rows or pivots != list(range(m.rows)):
        raise ValueError("matrix is singular")
    return Matrix(m.rows, m.rows, [row[m.rows:] for row in red.entries])


def inverse(m: Matrix) -> Matrix:
    return _inverse(m)


def vec_add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def vec_sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def vec_scale(c, a):
    c = rat(c)
    return tuple(c * x for x in a)


def zero_vec(n):
    return (ZERO,) * n


def is_zero_vec(v) -> bool:
    return all(x == 0 for x in v)
