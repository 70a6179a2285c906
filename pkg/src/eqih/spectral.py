"""The spectral sequence of the equivariant complex and the fixed-point
long exact sequence.

The equivariant complex is filtered by the pair degree: F^i collects the
elements supported in pair degrees >= i whose twisted differential is again
supported there.  The associated first-quadrant spectral sequence has even
rows only; its third page carries the intersection cohomology of the orbit
space on row zero and the co-Gysin cohomology (tensored with u-powers) on the
higher even rows, with third differential given by the Euler map composed
with the co-Gysin connecting morphism.  When the Gysin term at the zero
perversity coincides with the lower perverse complex the same data assembles
into a long exact sequence relating the orbit-space cohomology, the
equivariant cohomology and the co-Gysin cohomology at positive u-powers (the
co-Gysin term playing the role of the fixed-point set).
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import (
    IdentificationFails,
    InternalInvariantViolation,
    NotExact,
    PropertyViolation,
    TheoremViolation,
)
from .homalg import LongExactSequence, check_exact
from .model import ModelInstance, Perversity
from .perverse import (
    build_cogysin,
    cogysin_cohomology,
    euler_map,
    gysin_cohomology,
    inclusion_map,
    omega_cohomology,
    perverse_complex,
)
from .ratla import (
    Matrix,
    Subspace,
    intersect,
    inverse,
    map_image,
    preimage,
    quotient,
    rat_str,
    subspace_sum,
)


# ---------------------------------------------------------------------------
# the filtration by pair degree


class FilteredComplex:
    """The equivariant complex together with the decreasing filtration by
    pair degree: F^i C^n consists of the elements whose components sit in
    pair degrees >= i and whose differential again has that support."""

    def __init__(self, eq):
        self.eq = eq
        self.complex = eq.complex
        # pair degrees run 0 .. top_degree + 1
        self.i_top = eq.eq1.complex.hi
        self._raw = {}
        self._filt = {}

    def raw(self, i, n) -> Subspace:
        """Coordinate subspace of C^n spanned by the components of pair
        degree >= i (no differential condition)."""
        amb = self.complex.dim(n)
        if i <= 0:
            return Subspace.full(amb)
        key = (i, n)
        if key not in self._raw:
            vecs = []
            for j, k in self.eq.components(n):
                if k < i:
                    continue
                off = self.eq.offsets[n][j]
                for t in range(self.eq.eq1.complex.dim(k)):
                    v = [0] * amb
                    v[off + t] = 1
                    vecs.append(tuple(v))
            self._raw[key] = Subspace.from_vectors(amb, vecs)
        return self._raw[key]

    def filtration(self, i, n) -> Subspace:
        amb = self.complex.dim(n)
        if i <= 0:
            return Subspace.full(amb)
        if i > self.i_top:
            return Subspace.zero(amb)
        key = (i, n)
        if key not in self._filt:
            self._filt[key] = intersect(
                self.raw(i, n), preimage(self.complex.d(n), self.raw(i, n + 1)))
        return self._filt[key]

    def check(self, n_max) -> bool:
        """Decreasing, differential-stable, exhaustive and bounded over the
        trusted degree window."""
        for n in range(0, n_max + 1):
            if not self.filtration(0, n).is_full():
                return False
            if not self.filtration(self.i_top + 1, n).is_zero():
                return False
            for i in range(0, self.i_top + 2):
                f = self.filtration(i, n)
                if not self.filtration(max(i - 1, 0), n).contains_subspace(f):
                    return False
                moved = map_image(self.complex.d(n), f)
                if not self.filtration(i, n + 1).contains_subspace(moved):
                    return False
        return True


@dataclass(frozen=True)
class SpectralPage:
    """One page: cell dimensions and differentials d_r: (i,j) -> (i+r, j-r+1)
    over the trusted window of total degrees."""

    r: int
    cells: dict            # (i, j) -> dimension
    differentials: dict    # (i, j) -> Matrix

    def dim(self, i, j) -> int:
        return self.cells.get((i, j), 0)

    def d(self, i, j) -> Matrix:
        if (i, j) in self.differentials:
            return self.differentials[(i, j)]
        return Matrix.zero(0, self.dim(i, j))


class SpectralSequence:
    """Page engine for the filtered equivariant complex.

    Cells are computed by the subspace formulas
        Z_r^{i,j} = F^i C^{i+j} intersect d^{-1}(F^{i+r} C^{i+j+1}),
        E_r^{i,j} = Z_r / (Z_{r-1}^{i+1,j-1} + d Z_{r-1}^{i-r+1,j+r-2}),
    all over exact rational arithmetic.  Cells are trusted for total degree
    <= n_max and differentials for source total degree <= n_max - 1.
    """

    def __init__(self, fc: FilteredComplex, n_max: int):
        self.fc = fc
        self.cx = fc.complex
        self.n_max = n_max
        self._z = {}
        self._cells = {}
        self._d = {}

    @property
    def r_infinity(self) -> int:
        """Pages stabilize from this index on."""
        return self.fc.i_top + 2

    def z(self, r, i, j) -> Subspace:
        n = i + j
        if n < 0 or n > self.cx.hi:
            return Subspace.zero(self.cx.dim(n))
        key = (r, i, j)
        if key not in self._z:
            self._z[key] = intersect(
                self.fc.filtration(i, n),
                preimage(self.cx.d(n), self.fc.filtration(i + r, n + 1)))
        return self._z[key]

    def _boundary_part(self, r, i, j) -> Subspace:
        src = self.z(r - 1, i - r + 1, j + r - 2)
        return map_image(self.cx.d(i + j - 1), src)

    def cell(self, r, i, j):
        """(quotient space, numerator) of the page-r cell."""
        key = (r, i, j)
        if key not in self._cells:
            num = self.z(r, i, j)
            den = subspace_sum(self.z(r - 1, i + 1, j - 1),
                               self._boundary_part(r, i, j))
            self._cells[key] = (quotient(num, den), num)
        return self._cells[key]

    def dim(self, r, i, j) -> int:
        return self.cell(r, i, j)[0].dim

    def d_matrix(self, r, i, j) -> Matrix:
        key = (r, i, j)
        if key not in self._d:
            src, src_num = self.cell(r, i, j)
            tgt, tgt_num = self.cell(r, i + r, j - r + 1)
            cols = []
            for rep in src.lift.columns():
                img = self.cx.d(i + j).apply(rep)
                if not tgt_num.contains(img):
                    raise PropertyViolation(
                        "page %d differential leaves its target cell at (%d, %d)"
                        % (r, i, j))
                cols.append(tgt.class_of(img))
            self._d[key] = Matrix.from_columns(tgt.dim, cols)
        return self._d[key]

    def page(self, r) -> SpectralPage:
        cells = {}
        diffs = {}
        for i in range(0, self.fc.i_top + 1):
            for j in range(0, self.n_max - i + 1):
                d = self.dim(r, i, j)
                if d:
                    cells[(i, j)] = d
                if i + j <= self.n_max - 1:
                    diffs[(i, j)] = self.d_matrix(r, i, j)
        return SpectralPage(r, cells, diffs)


def spectral_sequence(m: ModelInstance, p: Perversity, n_u=None) -> SpectralSequence:
    from .equivariant import build_equivariant, default_window

    if n_u is None:
        n_u = default_window(m)
    def make():
        eq = build_equivariant(m, p, n_u)
        return SpectralSequence(FilteredComplex(eq), n_u)
    return m.cached(("spectral", p, n_u), make)


# ---------------------------------------------------------------------------
# page properties and identifications


def _cells_in_window(ss, n_cap):
    for i in range(0, ss.fc.i_top + 1):
        for j in range(0, n_cap - i + 1):
            yield i, j


def pages(m: ModelInstance, p: Perversity, r_max=None, n_u=None):
    """(list of pages 1..r_max, limit-page cell dims) with all structural
    properties asserted.

    Asserted: first quadrant; odd rows vanish; d_r composes to zero; the
    cohomology of each page has the dimensions of the next; even pages from
    the second on equal the following odd page; odd differentials beyond the
    third vanish off the single matching row; row zero is a successive
    quotient of the orbit-space intersection cohomology; the limit page dims
    sum to the equivariant cohomology dims.  Any failure raises
    PropertyViolation naming the cell.
    """
    ss = spectral_sequence(m, p, n_u)
    r_inf = ss.r_infinity
    r_keep = r_inf if r_max is None else r_max
    r_max = max(r_keep, r_inf)
    ih = omega_cohomology(m, p)

    out = [ss.page(r) for r in range(1, r_max + 1)]
    n_cap = ss.n_max - 1    # degrees where both in- and outgoing d_r exist

    for pg in out:
        r = pg.r
        for i, j in _cells_in_window(ss, n_cap):
            d_out = pg.d(i, j)
            # odd rows vanish
            if j % 2 == 1 and pg.dim(i, j):
                raise PropertyViolation(
                    "odd row cell (%d, %d) nonzero on page %d" % (i, j, r))
            # d_r o d_r = 0
            if i + j + 1 <= n_cap:
                if not (pg.d(i + r, j - r + 1) * d_out).is_zero():
                    raise PropertyViolation(
                        "page %d differential does not square to zero at (%d, %d)"
                        % (r, i, j))
            # next page is the cohomology of this one
            if r + 1 <= r_max:
                d_in = pg.d(i - r, j + r - 1)
                expect = pg.dim(i, j) - d_out.rank() - d_in.rank()
                if ss.dim(r + 1, i, j) != expect:
                    raise PropertyViolation(
                        "page %d cell (%d, %d) is not the cohomology of page %d"
                        % (r + 1, i, j, r))
            # even pages equal the next odd page
            if r >= 2 and r % 2 == 0:
                if not d_out.is_zero():
                    raise PropertyViolation(
                        "even page %d has a nonzero differential at (%d, %d)"
                        % (r, i, j))
            # odd differentials beyond the third vanish off row r - 1
            if r >= 3 and r % 2 == 1 and j != r - 1 and not d_out.is_zero():
                raise PropertyViolation(
                    "page %d differential nonzero off row %d at (%d, %d)"
                    % (r, r - 1, i, j))
            # row zero stays a quotient of the orbit-space cohomology
            if r >= 3 and j == 0 and pg.dim(i, 0) > ih.dim(i):
                raise PropertyViolation(
                    "row-zero cell (%d, 0) exceeds the orbit-space cohomology "
                    "on page %d" % (i, r))

    # the limit page adds up to the equivariant cohomology
    eq = ss.fc.eq
    limit = {}
    for i, j in _cells_in_window(ss, ss.n_max):
        d = ss.dim(r_inf, i, j)
        if d:
            limit[(i, j)] = d
        if ss.dim(r_inf + 1, i, j) != d:
            raise PropertyViolation(
                "limit page not stable at (%d, %d)" % (i, j))
    for n in range(0, ss.n_max + 1):
        total = sum(d for (i, j), d in limit.items() if i + j == n)
        if total != eq.cohomology.dim(n):
            raise PropertyViolation(
                "limit page total in degree %d is %d, cohomology has %d"
                % (n, total, eq.cohomology.dim(n)))

    # second page already carries the third-page identification
    e3 = e3_isomorphisms(m, p, n_u)
    for i, j in _cells_in_window(ss, n_cap):
        if ss.dim(2, i, j) != ss.dim(3, i, j):
            raise PropertyViolation(
                "second and third pages differ at (%d, %d)" % (i, j))
        if j % 2 == 0 and (i, j // 2) not in e3 and ss.dim(3, i, j):
            raise PropertyViolation(
                "unidentified third-page cell (%d, %d)" % (i, j))

    return out[:r_keep], limit


def _component_pair(ss, n, vec, j):
    """(alpha, beta) ambient pair of the u^j component of an equivariant
    cochain of total degree n."""
    eq = ss.fc.eq
    k = n - 2 * j
    coords = eq.ext.component_of(n, vec, j)
    a = eq.m.ambient
    if not coords:
        return (0,) * a.dim(k), (0,) * a.dim(k - 1)
    pair = eq.eq1.space(k).basis.apply(coords)
    return tuple(pair[:a.dim(k)]), tuple(pair[a.dim(k):])


def e3_isomorphisms(m: ModelInstance, p: Perversity, n_u=None) -> dict:
    """Explicit isomorphisms identifying the third page: (i, j) -> matrix
    from E_3^{i,2j} onto IH^i (j = 0) or the co-Gysin cohomology H^i(K)
    (j >= 1), keyed by the u-power j.

    Each map reads off the bottom pair component of a representative and
    scales it by the column parity sign (-1)^(i(i+1)/2); with that convention
    the third differential equals the Euler-map composite with no extra sign.
    Every map is checked to kill the cell denominator and to be bijective.
    """
    ss = spectral_sequence(m, p, n_u)
    pc = perverse_complex(m, p)
    ih = omega_cohomology(m, p)
    hk = cogysin_cohomology(m, p)
    a = m.ambient
    out = {}
    for i in range(0, ss.fc.i_top + 1):
        for j in range(0, (ss.n_max - i) // 2 + 1):
            cellq, _ = ss.cell(3, i, 2 * j)
            target = ih if j == 0 else hk

            def classify(vec, i=i, j=j, target=target):
                alpha, beta = _component_pair(ss, i + 2 * j, vec, j)
                if any(x != 0 for x in beta):
                    raise InternalInvariantViolation(
                        "bottom component of a filtered representative has a "
                        "nonzero tail at (%d, %d)" % (i, 2 * j))
                om = pc.omega_spaces.get(i, Subspace.zero(a.dim(i))).coords(alpha)
                if om is None:
                    raise InternalInvariantViolation(
                        "bottom component escapes the perverse complex at "
                        "(%d, %d)" % (i, 2 * j))
                if j == 0:
                    return target.class_of(i, om)
                return target.class_of(i, pc.projection.mat(i).apply(om))

            cols = [classify(rep) for rep in cellq.lift.columns()]
            sign = (-1) ** (i * (i + 1) // 2)
            phi = Matrix.from_columns(target.dim(i), cols).scale(sign)
            # well-defined: the denominator maps to zero classes
            num = ss.z(3, i, 2 * j)
            den = subspace_sum(ss.z(2, i + 1, 2 * j - 1),
                               ss._boundary_part(3, i, 2 * j))
            for v in den.vectors():
                if any(x != 0 for x in classify(v)):
                    raise PropertyViolation(
                        "third-page identification not well defined at "
                        "(%d, %d)" % (i, 2 * j))
            if phi.rows != phi.cols or phi.rank() != phi.rows:
                raise PropertyViolation(
                    "third-page identification not bijective at (%d, %d): "
                    "cell dim %d vs %d" % (i, 2 * j, phi.cols, phi.rows))
            out[(i, j)] = phi
    return out


def _mat_strings(mat: Matrix):
    return [[rat_str(x) for x in row] for row in mat.entries]


def d3_check(m: ModelInstance, p: Perversity, n_u=None) -> dict:
    """Entrywise comparison of the engine's third differential with the
    composite of the co-Gysin connecting morphism, the Euler map and (for
    u-powers beyond the first) the co-Gysin projection, under the third-page
    identifications.  Raises TheoremViolation naming the cell on mismatch.
    """
    ss = spectral_sequence(m, p, n_u)
    phi = e3_isomorphisms(m, p, n_u)
    pc = perverse_complex(m, p)
    ih = omega_cohomology(m, p)
    hk = cogysin_cohomology(m, p)
    eub = euler_map(m, p)
    _, _, ses = build_cogysin(m, p)
    cells = []
    for (i, j), src_phi in sorted(phi.items()):
        if j < 1 or src_phi.cols == 0 or i + 2 * j + 1 > ss.n_max:
            continue
        engine_raw = ss.d_matrix(3, i, 2 * j)
        composite = eub.mat(i + 1) * ses.connecting(i)
        if j >= 2:
            composite = ih.induced_map(hk, pc.projection, i + 3) * composite
        if (i + 3, j - 1) in phi:
            engine = phi[(i + 3, j - 1)] * engine_raw * inverse(src_phi)
        else:
            # target cell lies outside the first quadrant window: both the
            # engine differential and the composite must vanish
            engine = Matrix.zero(composite.rows, composite.cols) \
                if engine_raw.is_zero() else engine_raw
        entry = {
            "cell": [i, 2 * j],
            "engine": _mat_strings(engine),
            "expected": _mat_strings(composite),
            "equal": engine == composite,
            "nonzero": not engine.is_zero(),
        }
        cells.append(entry)
        if engine != composite:
            raise TheoremViolation(
                "third differential mismatch at cell (%d, %d): engine %s, "
                "expected %s" % (i, 2 * j, engine.entries, composite.entries))
    return {
        "cells": cells,
        "checked": len(cells),
        "all_equal": all(c["equal"] for c in cells),
        "any_nonzero": any(c["nonzero"] for c in cells),
    }


# ---------------------------------------------------------------------------
# the fixed-point long exact sequence


def fixed_point_preconditions(m: ModelInstance) -> list:
    """Report of the subspace identifications the fixed-point sequence needs
    (the model-level surrogate for the normality hypothesis):

    - the Gysin term at the zero perversity equals the lower perverse complex,
    - the same one characteristic step further down,
    - the Euler operator maps the lower perverse complex into itself.
    """
    zero = m.zero_perversity()
    q = zero.minus(m.characteristic_perversity())
    pc0 = perverse_complex(m, zero)
    pcq = perverse_complex(m, q)
    a = m.ambient
    checks = []
    checks.append({
        "name": "gysin equals lower perverse complex",
        "passed": all(pc0.gysin_spaces[k] == pcq.omega_spaces[k]
                      for k in pc0.ambient.degrees()),
    })
    checks.append({
        "name": "lower gysin equals lower perverse complex",
        "passed": all(pcq.gysin_spaces[k] == pcq.omega_spaces[k]
                      for k in pc0.ambient.degrees()),
    })
    checks.append({
        "name": "euler operator preserves the lower perverse complex",
        "passed": all(
            pcq.omega_spaces.get(k + 2, Subspace.zero(a.dim(k + 2))).contains_subspace(
                map_image(a.euler(k), pcq.omega_spaces[k]))
            for k in pc0.ambient.degrees()),
    })
    return checks


def _require_fixed_point_preconditions(m: ModelInstance):
    failed = [c["name"] for c in fixed_point_preconditions(m) if not c["passed"]]
    if failed:
        raise IdentificationFails(
            "fixed-point sequence unavailable: %s" % "; ".join(failed))


def skjelbred(m: ModelInstance, n_u=None) -> LongExactSequence:
    """The fixed-point long exact sequence at the zero perversity,

        ... -> A^i -> H^{i+1}(B) -> IH^{i+1}_{S^1} -> A^{i+1} -> ...

    where A^i collects the co-Gysin cohomology at positive u-powers (the
    model-level fixed-point contribution).  The first map composes the
    co-Gysin connecting morphism with iterated Euler maps and the perversity
    inclusion, with an alternating sign per u-power; the second sends a class
    to its constant equivariant extension; the third reads off the positive
    u-power components of an equivariant class.

    Requires the subspace identifications of fixed_point_preconditions
    (IdentificationFails otherwise); exactness is checked at every interior
    node of the truncation window (NotExact naming the node otherwise).
    """
    from .equivariant import build_equivariant, default_window

    if n_u is None:
        n_u = default_window(m)
    _require_fixed_point_preconditions(m)

    zero = m.zero_perversity()
    q = zero.minus(m.characteristic_perversity())
    a = m.ambient
    pc0 = perverse_complex(m, zero)
    pcq = perverse_complex(m, q)
    hb = omega_cohomology(m, zero)
    hq = omega_cohomology(m, q)
    hg0 = gysin_cohomology(m, zero)
    hgq = gysin_cohomology(m, q)
    hk = cogysin_cohomology(m, zero)
    _, _, ses0 = build_cogysin(m, zero)
    eub_q = euler_map(m, q)
    iota = inclusion_map(m, q, zero)
    eq = build_equivariant(m, zero, n_u)
    heq = eq.cohomology
    ss = spectral_sequence(m, zero, n_u)

    def to_lower(k) -> Matrix:
        """Basis change H^k of the Gysin term -> H^k of the lower complex."""
        cols = []
        for rep in hg0.basis_lifts(k):
            amb = pc0.gysin_ambient_mat(k).apply(rep)
            c = pcq.omega_spaces[k].coords(amb)
            if c is None:
                raise InternalInvariantViolation(
                    "Gysin representative escapes the lower complex in "
                    "degree %d" % k)
            cols.append(hq.class_of(k, c))
        return Matrix.from_columns(hq.dim(k), cols)

    def euler_endo(k) -> Matrix:
        """Euler multiplication H^k -> H^{k+2} on the lower complex."""
        cols = []
        for rep in hq.basis_lifts(k):
            amb = pcq.omega_incl.mat(k).apply(rep)
            c = pcq.gysin_ambient_mat(k).solve(amb)
            if c is None:
                raise InternalInvariantViolation(
                    "lower class misses its Gysin term in degree %d" % k)
            cols.append(hgq.class_of(k, c))
        return eub_q.mat(k) * Matrix.from_columns(hgq.dim(k), cols)

    def a_blocks(i):
        return [(s, i - 2 * s) for s in range(1, i // 2 + 1)]

    def alpha(i) -> Matrix:
        """H^i(B) -> IH^i_{S^1}: constant extension (alpha, 0) u^0."""
        cols = []
        for rep in hb.basis_lifts(i):
            amb = pc0.omega_incl.mat(i).apply(rep)
            pair = tuple(amb) + (0,) * a.dim(i - 1)
            c = eq.eq1.space(i).coords(pair)
            if c is None:
                raise InternalInvariantViolation(
                    "constant extension escapes the pair space in degree %d" % i)
            cols.append(heq.class_of(i, eq.ext.inject(i, 0, c)))
        return Matrix.from_columns(heq.dim(i), cols)

    def delta(i) -> Matrix:
        """IH^i_{S^1} -> A^i: co-Gysin classes of the positive u-power heads."""
        rows_total = sum(hk.dim(k) for _, k in a_blocks(i))
        cols = []
        for rep in heq.basis_lifts(i):
            col = []
            for s, k in a_blocks(i):
                alpha_s, _ = _component_pair(ss, i, rep, s)
                om = pc0.omega_spaces.get(k, Subspace.zero(a.dim(k))).coords(alpha_s)
                if om is None:
                    raise IdentificationFails(
                        "equivariant head escapes the perverse complex in "
                        "degree %d at u-power %d" % (i, s))
                col += list(hk.class_of(k, pc0.projection.mat(k).apply(om)))
            cols.append(tuple(col))
        return Matrix.from_columns(rows_total, cols)

    def beta(i) -> Matrix:
        """A^i -> H^{i+1}(B): signed Euler-iterate of the connecting map."""
        blocks = []
        for s, k in a_blocks(i):
            mat = to_lower(k + 1) * ses0.connecting(k)
            for t in range(s):
                mat = euler_endo(k + 1 + 2 * t) * mat
            mat = hq.induced_map(hb, iota, i + 1) * mat
            blocks.append(mat.scale((-1) ** s))
        if not blocks:
            return Matrix.zero(hb.dim(i + 1), 0)
        out = blocks[0]
        for b in blocks[1:]:
            out = out.hstack(b)
        return out

    labels, dims, maps = [], [], []
    i_hi = n_u - 2
    for i in range(0, i_hi + 1):
        labels += ["H^%d(B)" % i, "IH^%d_eq" % i, "A^%d" % i]
        dims += [hb.dim(i), heq.dim(i), sum(hk.dim(k) for _, k in a_blocks(i))]
        maps.append(alpha(i))
        maps.append(delta(i))
        if i < i_hi:
            maps.append(beta(i))
    seq = LongExactSequence(labels, dims, maps)
    bad = [r for r in check_exact(seq) if not r["exact"]]
    if bad:
        raise NotExact("fixed-point sequence fails at %s" % bad[0]["node"])
    return seq
