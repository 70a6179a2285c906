"""The invariant-pair complex, the equivariant complex over the polynomial
generator u, and the equivariant Gysin sequence.

Degree-k elements of the pair complex are pairs (alpha, beta) with alpha in
the p-level of degree k, beta in the one-step-lower perverse complex of
degree k-1, and d(alpha) + sign * E(beta) again in level; its cohomology
plays the role of the intersection cohomology of the total space.  Tensoring
with powers of a degree-2 generator u and twisting the differential by a
beta-shift yields the equivariant complex; u acts by shifting the power.

Everything is truncated at a window n_u: spaces are built up to total degree
n_u + 2 and reported values are trusted for degrees <= n_u, which is safe
because the Gysin sequence forces the u-action to stabilize above the
ambient top degree.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DecompositionMismatch, InternalInvariantViolation
from .homalg import ChainMap, Cohomology, Complex, LongExactSequence, SesData, chain_map, check_exact
from .model import ModelInstance, Perversity
from .perverse import (
    PerverseComplex,
    _shift_down,
    _sign,
    euler_map,
    perverse_complex,
)
from .ratla import (
    Matrix,
    Subspace,
    image,
    intersect,
    kernel,
    map_image,
    preimage,
    subspace_sum,
    vec_add,
    vec_scale,
    zero_vec,
)


def default_window(m: ModelInstance) -> int:
    return m.ambient.top_degree + 6


# ---------------------------------------------------------------------------
# the pair complex


@dataclass(frozen=True)
class Eq1Complex:
    p: Perversity
    complex: Complex    # abstract, degrees 0 .. top_degree + 1
    spaces: dict        # degree -> Subspace of Q^{dim(k) + dim(k-1)}

    def space(self, k) -> Subspace:
        if k in self.spaces:
            return self.spaces[k]
        return Subspace.zero(0)

    def pair_dim(self, k) -> int:
        return self.complex.dim(k)


def build_eq1(m: ModelInstance, p: Perversity) -> Eq1Complex:
    return m.cached(("eq1", p), lambda: _build_eq1(m, p))


def _build_eq1(m: ModelInstance, p: Perversity) -> Eq1Complex:
    m.check_perversity(p)
    a = m.ambient
    pc = perverse_complex(m, p)
    q = p.minus(m.characteristic_perversity())
    lower = perverse_complex(m, q)
    top = a.top_degree

    spaces = {}
    for k in range(0, top + 2):
        na, nb = a.dim(k), a.dim(k - 1)
        fp = m.filtration_level(p, k)
        om = lower.omega_spaces.get(k - 1, Subspace.zero(nb))
        # product subspace F_p^k x Omega_{p-xbar}^{k-1}
        vecs = [tuple(v) + (0,) * nb for v in fp.vectors()]
        vecs += [(0,) * na + tuple(v) for v in om.vectors()]
        prod = Subspace.from_vectors(na + nb, vecs)
        # pairs whose twisted differential head stays in level
        head = a.diff(k).hstack(a.euler(k - 1).scale(_sign(k)))
        spaces[k] = intersect(prod, preimage(head, m.filtration_level(p, k + 1)))

    dims = []
    diffs = []
    for k in range(0, top + 2):
        sp = spaces[k]
        nxt = spaces.get(k + 1, Subspace.zero(a.dim(k + 1) + a.dim(k)))
        cols = []
        for w in sp.vectors():
            img = _twisted_d(a, k, w)
            c = nxt.coords(img)
            if c is None:
                raise InternalInvariantViolation(
                    "pair differential left the pair space in degree %d" % k)
            cols.append(c)
        dims.append(sp.dim)
        diffs.append(Matrix.from_columns(nxt.dim, cols))
    cx = Complex.build(0, top + 1, dims, diffs, check=True)
    return Eq1Complex(p, cx, spaces)


def _twisted_d(a, k, pair_vec):
    """D(alpha, beta) = (d alpha + sign * E beta, d beta) in ambient coords."""
    na = a.dim(k)
    alpha, beta = pair_vec[:na], pair_vec[na:]
    head = vec_add(a.diff(k).apply(alpha),
                   vec_scale(_sign(k), a.euler(k - 1).apply(beta)))
    return tuple(head) + a.diff(k - 1).apply(beta)


def eq1_cohomology(m: ModelInstance, p: Perversity) -> Cohomology:
    """Cohomology of the pair complex: the intersection cohomology of the
    total space."""
    return m.cached(("ihx", p), lambda: Cohomology(build_eq1(m, p).complex, check=False))


# ---------------------------------------------------------------------------
# Lambda-u extensions


class LambdaExtension:
    """A complex tensored with powers of the degree-2 generator u, truncated
    to total degrees lo..hi; the differential ignores u (block diagonal)."""

    def __init__(self, base: Complex, hi: int):
        self.base = base
        self.hi = hi
        self.offsets = {}
        dims = []
        for n in range(0, hi + 1):
            off = {}
            total = 0
            for j, k in self.components(n):
                off[j] = total
                total += base.dim(k)
            self.offsets[n] = off
            dims.append(total)
        diffs = []
        for n in range(0, hi + 1):
            tgt = dims[n + 1] if n + 1 <= hi else 0
            cols = []
            for j, k in self.components(n):
                for i in range(base.dim(k)):
                    out = [0] * tgt
                    if n + 1 <= hi and j in self.offsets[n + 1]:
                        col = base.d(k).column(i)
                        o = self.offsets[n + 1][j]
                        for t, x in enumerate(col):
                            out[o + t] += x
                    cols.append(tuple(out))
            diffs.append(Matrix.from_columns(tgt, cols))
        self.complex = Complex.build(0, hi, dims, diffs, check=False)

    def components(self, n):
        out = []
        j = 0
        while n - 2 * j >= self.base.lo:
            k = n - 2 * j
            if k <= self.base.hi:
                out.append((j, k))
            j += 1
        return out

    def inject(self, n, j, coords):
        out = [0] * self.complex.dim(n)
        o = self.offsets[n][j]
        for t, x in enumerate(coords):
            out[o + t] = x
        return tuple(out)

    def component_of(self, n, vec, j):
        if j not in self.offsets[n]:
            return ()
        o = self.offsets[n][j]
        k = n - 2 * j
        return tuple(vec[o:o + self.base.dim(k)])

    def u_matrix(self, n) -> Matrix:
        """The u-action C^n -> C^{n+2}: shift the power by one."""
        tgt = self.complex.dim(n + 2)
        cols = []
        for j, k in self.components(n):
            for i in range(self.base.dim(k)):
                out = [0] * tgt
                if n + 2 <= self.hi and j + 1 in self.offsets[n + 2]:
                    out[self.offsets[n + 2][j + 1] + i] = 1
                cols.append(tuple(out))
        return Matrix.from_columns(tgt, cols)


class EquivariantComplex:
    """Truncated equivariant complex with the twisted differential."""

    def __init__(self, m: ModelInstance, p: Perversity, n_u: int):
        m.check_perversity(p)
        self.m = m
        self.p = p
        self.n_u = n_u
        self.eq1 = build_eq1(m, p)
        self.hi = n_u + 2
        ext = LambdaExtension(self.eq1.complex, self.hi)
        self.offsets = ext.offsets
        self.ext = ext
        a = m.ambient

        dims = [ext.complex.dim(n) for n in range(0, self.hi + 1)]
        diffs = []
        for n in range(0, self.hi + 1):
            tgt = dims[n + 1] if n + 1 <= self.hi else 0
            cols = []
            for j, k in ext.components(n):
                sp = self.eq1.space(k)
                na = a.dim(k)
                for w in sp.vectors():
                    out = [0] * tgt
                    if n + 1 <= self.hi:
                        # differential part: same u-power
                        if j in ext.offsets[n + 1]:
                            img = _twisted_d(a, k, w)
                            c = self.eq1.space(k + 1).coords(img)
                            if c is None:
                                raise InternalInvariantViolation(
                                    "twisted differential escaped in degree %d" % n)
                            o = ext.offsets[n + 1][j]
                            for t, x in enumerate(c):
                                out[o + t] += x
                        # u part: (beta, 0) one power up, with the degree sign
                        if j + 1 in ext.offsets[n + 1]:
                            beta = w[na:]
                            upair = tuple(beta) + (0,) * a.dim(k - 2)
                            c = self.eq1.space(k - 1).coords(upair)
                            if c is None:
                                raise InternalInvariantViolation(
                                    "u-shift escaped the pair space in degree %d" % n)
                            o = ext.offsets[n + 1][j + 1]
                            s = _sign(k)
                            for t, x in enumerate(c):
                                out[o + t] += s * x
                    cols.append(tuple(out))
            diffs.append(Matrix.from_columns(tgt, cols))
        self.complex = Complex.build(0, self.hi, dims, diffs, check=True)
        self.cohomology = Cohomology(self.complex, check=False)

    def components(self, n):
        return self.ext.components(n)

    def u_matrix(self, n) -> Matrix:
        return self.ext.u_matrix(n)

    def u_chain_map(self) -> ChainMap:
        maps = {n: self.u_matrix(n) for n in range(0, self.n_u)}
        return ChainMap(self.complex, self.complex, 2, maps)

    def dims(self):
        """Cohomology dims per total degree, trusted through the window."""
        return tuple(self.cohomology.dim(n) for n in range(0, self.n_u + 1))

    def u_rank(self, n) -> int:
        """Rank of u: H^n -> H^{n+2}, via cocycle images modulo coboundaries."""
        z = kernel(self.complex.d(n))
        b = image(self.complex.d(n + 1))
        moved = map_image(self.u_matrix(n), z)
        return subspace_sum(moved, b).dim - b.dim

    def u_ranks(self):
        return tuple(self.u_rank(n) for n in range(0, self.n_u + 1))

    def u_cohomology_matrix(self, n) -> Matrix:
        """Matrix of u on cohomology H^n -> H^{n+2} (trusted for n <= n_u - 2)."""
        h = self.cohomology
        cols = [h.class_of(n + 2, self.u_matrix(n).apply(rep))
                for rep in h.basis_lifts(n)]
        return Matrix.from_columns(h.dim(n + 2), cols)


def build_equivariant(m: ModelInstance, p: Perversity, n_u=None) -> EquivariantComplex:
    if n_u is None:
        n_u = default_window(m)
    return m.cached(("equivariant", p, n_u), lambda: EquivariantComplex(m, p, n_u))


def truncation_stable(m: ModelInstance, p: Perversity, n_u=None) -> bool:
    """Dims and u-ranks for degrees <= n_u - 2 agree between the n_u and
    n_u + 2 windows."""
    if n_u is None:
        n_u = default_window(m)
    small = build_equivariant(m, p, n_u)
    big = build_equivariant(m, p, n_u + 2)
    upto = n_u - 2
    return (small.dims()[:upto + 1] == big.dims()[:upto + 1]
            and small.u_ranks()[:upto + 1] == big.u_ranks()[:upto + 1])


# ---------------------------------------------------------------------------
# equivariant Gysin sequence


class EquivariantGysin:
    """The u-extended Gysin short exact sequence with its long exact sequence
    and the verified decomposition of the connecting morphism."""

    def __init__(self, m: ModelInstance, p: Perversity, n_u=None):
        if n_u is None:
            n_u = default_window(m)
        self.m = m
        self.p = p
        self.n_u = n_u
        self.eq = build_equivariant(m, p, n_u)
        self.pc = perverse_complex(m, p)
        self.q = p.minus(m.characteristic_perversity())
        self.lower = perverse_complex(m, self.q)
        a = m.ambient
        hi = self.eq.hi

        omega_ext = Complex.build(0, self.pc.omega.hi, self.pc.omega.dims,
                                  self.pc.omega.diffs, check=False)
        self.head = LambdaExtension(omega_ext, hi)
        self.tail = LambdaExtension(_shift_down(self.pc.gysin), hi)

        inc = {}
        quo = {}
        for n in range(0, hi + 1):
            cols = []
            for j, k in self.head.components(n):
                for v in self.pc.omega_spaces.get(k, Subspace.zero(a.dim(k))).vectors():
                    pair = tuple(v) + (0,) * a.dim(k - 1)
                    c = self.eq.eq1.space(k).coords(pair)
                    if c is None:
                        raise InternalInvariantViolation(
                            "head inclusion escaped the pair space in degree %d" % n)
                    cols.append(self.eq.ext.inject(n, j, c))
            inc[n] = Matrix.from_columns(self.eq.complex.dim(n), cols)

            qcols = []
            for j, k in self.eq.components(n):
                na = a.dim(k)
                for w in self.eq.eq1.space(k).vectors():
                    beta = w[na:]
                    c = self.pc.gysin_spaces.get(k - 1, Subspace.zero(a.dim(k - 1))).coords(beta)
                    if c is None:
                        raise InternalInvariantViolation(
                            "pair tail escaped the Gysin term in degree %d" % n)
                    if j in self.tail.offsets[n]:
                        qcols.append(self.tail.inject(n, j, c))
                    else:
                        qcols.append(zero_vec(self.tail.complex.dim(n)))
            quo[n] = Matrix.from_columns(self.tail.complex.dim(n), qcols)

        self.i = chain_map(self.head.complex, self.eq.complex, inc)
        self.s = chain_map(self.eq.complex, self.tail.complex, quo)
        self.ses = SesData(self.i, self.s)
        self.eub = euler_map(m, p)

    def les(self) -> LongExactSequence:
        # trust window: one triple of nodes per degree up to n_u - 1
        return self.ses.les(0, self.n_u - 1)

    def expected_connecting_cochain(self, n, tail_vec):
        """Image cochain of the decomposition (Euler map tensor 1 plus signed
        inclusion tensor u) applied to a closed tail element."""
        a = self.m.ambient
        out = zero_vec(self.head.complex.dim(n + 1))
        for j, kk in self.tail.components(n):
            k = kk - 1  # Gysin-term degree of this component
            coords = self.tail.component_of(n, tail_vec, j)
            if not coords:
                continue
            beta = self.pc.gysin_ambient_mat(k).apply(coords)
            omega_vec, _ = self.eub.cochain_image(k, beta)
            head_c = self.pc.omega_spaces.get(
                k + 2, Subspace.zero(a.dim(k + 2))).coords(omega_vec)
            if head_c is None:
                raise InternalInvariantViolation("Euler image escaped the perverse complex")
            if j in self.head.offsets[n + 1]:
                out = vec_add(out, self.head.inject(n + 1, j, head_c))
            # signed inclusion into the next u-power
            inc_c = self.pc.omega_spaces.get(k, Subspace.zero(a.dim(k))).coords(beta)
            if inc_c is None:
                raise InternalInvariantViolation("Gysin term escaped the perverse complex")
            if j + 1 in self.head.offsets[n + 1]:
                out = vec_add(out,
                              self.head.inject(n + 1, j + 1,
                                               vec_scale(_sign(k + 1), inc_c)))
        return out

    def connecting_decomposition_report(self) -> dict:
        """Entrywise comparison of the generic connecting morphism with the
        Euler-map-plus-shifted-inclusion decomposition."""
        degrees = []
        for n in range(0, self.n_u):
            generic = self.ses.connecting(n)
            cols = []
            for rep in self.ses.hc.basis_lifts(n):
                expected = self.expected_connecting_cochain(n, rep)
                cols.append(self.ses.ha.class_of(n + 1, expected))
            expected_mat = Matrix.from_columns(self.ses.ha.dim(n + 1), cols)
            if generic != expected_mat:
                raise DecompositionMismatch(
                    "connecting morphism does not decompose in degree %d" % n)
            degrees.append(n)
        return {"decomposition_verified": True, "degrees_checked": degrees}


def equivariant_gysin_les(m: ModelInstance, p: Perversity, n_u=None):
    """(long exact sequence, report) for the u-extended Gysin sequence."""
    gy = m.cached(("eq_gysin", p, n_u),
                  lambda: EquivariantGysin(m, p, n_u))
    seq = gy.les()
    report = gy.connecting_decomposition_report()
    report["exactness"] = check_exact(seq)
    report["exact"] = all(r["exact"] for r in report["exactness"])
    return seq, report
