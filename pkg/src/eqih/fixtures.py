"""Built-in example models and a seeded random-model generator.

The named fixtures are small hand-built models of classical circle actions:

* ``hopf``   -- free action with nonzero Euler class, orbit space a 2-sphere.
* ``rot``    -- same ambient complex with Euler class zero.
* ``cone2``  -- cone singularity with one perverse fixed point (apex).
* ``noperv`` -- apex variant whose Euler cocycle is exact at its own level,
  so the fixed stratum is not perverse.

``oracle_cohomology`` is an independent brute-force computation of the
equivariant cohomology dims and u-action ranks: it assembles the full
truncated twisted differential per total degree directly from the defining
linear constraints, with no use of the dedicated pipeline modules.
"""

from __future__ import annotations

import random

from .errors import InputError, InternalInvariantViolation
from .model import ModelInstance, Perversity, model_from_dict
from .ratla import (
    Matrix,
    Subspace,
    image,
    intersect,
    kernel,
    map_image,
    quotient,
    rat_str,
    subspace_sum,
)

FIXTURE_NAMES = ("hopf", "rot", "cone2", "noperv")


def _sphere_product():
    # algebra Q[v]/(v^2) with |v| = 2
    return {"0,0": [["1"]], "0,2": [["1"]], "2,0": [["1"]], "2,2": []}


def hopf() -> ModelInstance:
    return model_from_dict({
        "name": "hopf",
        "top_degree": 2,
        "dims": [1, 0, 1],
        "d": [[], [[]], []],
        "strata": [],
        "filtrations": {},
        "euler_cocycle": ["1"],
        "euler_op": [[["1"]], [], []],
        "product": _sphere_product(),
        "perversities": [{}],
        "metadata": {"normal": True, "free": True},
    })


def rot() -> ModelInstance:
    return model_from_dict({
        "name": "rot",
        "top_degree": 2,
        "dims": [1, 0, 1],
        "d": [[], [[]], []],
        "strata": [],
        "filtrations": {},
        "euler_cocycle": ["0"],
        "euler_op": [[["0"]], [], []],
        "product": _sphere_product(),
        "perversities": [{}],
        "metadata": {"normal": True, "free": False},
    })


def cone2() -> ModelInstance:
    return model_from_dict({
        "name": "cone2",
        "top_degree": 2,
        "dims": [1, 0, 1],
        "d": [[], [[]], []],
        "strata": [{"name": "apex", "kind": "fixed_perverse"}],
        "filtrations": {
            "apex": {
                "0": [[["1"]], [], []],
                "1": [[["1"]], [], []],
            }
        },
        "euler_cocycle": ["1"],
        "euler_op": [[["1"]], [], []],
        "product": _sphere_product(),
        "perversities": [{"apex": -1}, {"apex": 0}, {"apex": 1}, {"apex": 2}],
        "metadata": {
            "normal": True,
            "free": False,
            "cone": {
                "apex_stratum": "apex",
                "cone_degree": 2,
                "link_quotient_ih": [1, 0, 1],
                "link_eub": {"0": [["1"]]},
            },
        },
    })


def noperv() -> ModelInstance:
    return model_from_dict({
        "name": "noperv",
        "top_degree": 2,
        "dims": [1, 1, 1],
        "d": [[["0"]], [["1"]], []],
        "strata": [{"name": "apex", "kind": "fixed_nonperverse"}],
        "filtrations": {
            "apex": {
                "0": [[["1"]], [], []],
                "1": [[["1"]], [["1"]], [["1"]]],
            }
        },
        "euler_cocycle": ["1"],
        "euler_op": [[["1"]], [], []],
        "product": {
            "0,0": [["1"]], "0,1": [["1"]], "1,0": [["1"]],
            "0,2": [["1"]], "2,0": [["1"]], "1,1": [["0"]],
            "1,2": [], "2,1": [], "2,2": [],
        },
        "perversities": [{"apex": -1}, {"apex": 0}, {"apex": 1}],
        "metadata": {"normal": True, "free": False},
    })


def make(name: str, seed=None, size=2) -> ModelInstance:
    name = name.lower()
    if name == "hopf":
        return hopf()
    if name == "rot":
        return rot()
    if name == "cone2":
        return cone2()
    if name == "noperv":
        return noperv()
    if name == "random":
        if seed is None:
            raise InputError("random fixture needs a seed")
        return random_model(seed, size)
    raise InputError("unknown fixture %r" % name)


# ---------------------------------------------------------------------------
# seeded random models


def _random_vector(rng, n):
    return tuple(rng.randint(-2, 2) for _ in range(n))


def _random_differential(rng, dims):
    """Graded maps with d.d = 0 by construction: each d factors through the
    quotient by the previous image."""
    diffs = []
    prev = Matrix.zero(dims[0], 0)
    for k in range(len(dims)):
        nrows = dims[k + 1] if k + 1 < len(dims) else 0
        q = quotient(Subspace.full(dims[k]), image(prev))
        if q.dim and nrows:
            rand = Matrix(nrows, q.dim,
                          [[rng.randint(-1, 1) for _ in range(q.dim)] for _ in range(nrows)])
            d = rand * q.projection
        else:
            d = Matrix.zero(nrows, dims[k])
        diffs.append(d)
        prev = d
    return diffs


def _random_filtration(rng, dims, kmax):
    """Nested per-degree subspace chains with all degree-0 forms at level 0."""
    levels = {}
    prev = [Subspace.full(dims[0])] + [Subspace.zero(n) for n in dims[1:]]
    for level in range(kmax):
        cur = []
        for deg, n in enumerate(dims):
            s = prev[deg]
            if n and rng.random() < 0.7:
                s = subspace_sum(s, Subspace.from_vectors(n, [_random_vector(rng, n)]))
            cur.append(s)
        levels[level] = tuple(cur)
        prev = cur
    return levels


def _killing_projection(space: Subspace) -> Matrix:
    return quotient(Subspace.full(space.ambient_dim), space).projection


def _solve_euler_op(rng, dims, diffs, filtration_constraints):
    """Random graded operator A^k -> A^{k+2} that is a chain map and respects
    every required filtration shift; found as a random element of the solution
    space of the combined linear system on its entries."""
    n = len(dims)

    def dim(k):
        return dims[k] if 0 <= k < n else 0

    def diff(k):
        if 0 <= k < n:
            return diffs[k]
        return Matrix.zero(dim(k + 1), dim(k))

    offsets = {}
    total = 0
    for k in range(n):
        offsets[k] = total
        total += dim(k + 2) * dim(k)
    if total == 0:
        return [Matrix.zero(dim(k + 2), dim(k)) for k in range(n)]

    def var(k, r, c):
        return offsets[k] + r * dim(k) + c

    rows = []
    # chain condition: E_{k+1} d_k = d_{k+2} E_k
    for k in range(n):
        for i in range(dim(k + 3)):
            for j in range(dim(k)):
                row = [0] * total
                if 0 <= k + 1 < n:
                    for t in range(dim(k + 1)):
                        row[var(k + 1, i, t)] += diff(k).entries[t][j]
                for t in range(dim(k + 2)):
                    row[var(k, t, j)] -= diff(k + 2).entries[i][t]
                if any(x != 0 for x in row):
                    rows.append(row)
    # filtration shifts: for each (degree j, source space V, target space W):
    # E_j(V) inside W, i.e. Q_W E_j v = 0 for basis v of V
    for (j, src, tgt) in filtration_constraints:
        if dim(j + 2) == 0 or src.dim == 0 or tgt.is_full():
            continue
        q = _killing_projection(tgt)
        for v in src.vectors():
            for r in range(q.rows):
                row = [0] * total
                for t in range(dim(j + 2)):
                    for c in range(dim(j)):
                        row[var(j, t, c)] += q.entries[r][t] * v[c]
                if any(x != 0 for x in row):
                    rows.append(row)

    if rows:
        system = Matrix(len(rows), total, rows)
        basis = system.kernel_basis()
    else:
        basis = [tuple(1 if i == j else 0 for j in range(total))
                 for i in range(total)]
    x = [0] * total
    for b in basis:
        c = rng.randint(-2, 2)
        x = [xi + c * bi for xi, bi in zip(x, b)]
    return [Matrix(dim(k + 2), dim(k),
                   [[x[var(k, r, c)] for c in range(dim(k))] for r in range(dim(k + 2))])
            for k in range(n)]


_EBAR_BY_KIND = {"mobile": 0, "fixed_nonperverse": 1, "fixed_perverse": 2}
_XBAR_BY_KIND = {"mobile": 0, "fixed_nonperverse": 1, "fixed_perverse": 1}


def random_model(seed: int, size: int = 2) -> ModelInstance:
    """Deterministic random model passing strict validation, for property tests."""
    rng = random.Random(("model", seed, size).__repr__())
    top = rng.randint(2, 3)
    dims = [rng.randint(1, size)] + [rng.randint(0, size) for _ in range(top)]

    diffs = _random_differential(rng, dims)

    n_strata = rng.randint(0, 2)
    kinds = [rng.choice(("mobile", "fixed_nonperverse", "fixed_perverse"))
             for _ in range(n_strata)]
    strata = [{"name": "s%d" % i, "kind": kind} for i, kind in enumerate(kinds)]
    filtrations = {s["name"]: _random_filtration(rng, dims, rng.randint(1, 3))
                   for s in strata}
    kmax = {name: len(levels) for name, levels in filtrations.items()}

    def filt(name, level, deg):
        n = dims[deg] if 0 <= deg <= top else 0
        if level <= -1 or n == 0:
            return Subspace.zero(n)
        if level >= kmax[name]:
            return Subspace.full(n)
        return filtrations[name][level][deg]

    constraints = []
    for s in strata:
        shift = _EBAR_BY_KIND[s["kind"]]
        for level in range(kmax[s["name"]]):
            if level + shift >= kmax[s["name"]]:
                continue
            for deg in range(top + 1):
                constraints.append((deg, filt(s["name"], level, deg),
                                    filt(s["name"], level + shift, deg + 2)))
    euler = _solve_euler_op(rng, dims, diffs, constraints)

    # closed cocycle inside every stratum's Euler level in degree 2
    eps_space = kernel(diffs[2]) if top >= 2 else Subspace.zero(dims[2] if top >= 2 else 0)
    for s in strata:
        eps_space = intersect(eps_space, filt(s["name"], _EBAR_BY_KIND[s["kind"]], 2))
    n2 = dims[2] if top >= 2 else 0
    eps = [0] * n2
    for b in eps_space.vectors():
        c = rng.randint(-2, 2)
        eps = [x + c * y for x, y in zip(eps, b)]

    # perversity working set closed under subtracting the characteristic one
    xbar = {s["name"]: _XBAR_BY_KIND[s["kind"]] for s in strata}
    ebar = {s["name"]: _EBAR_BY_KIND[s["kind"]] for s in strata}
    base = [
        {s["name"]: 0 for s in strata},
        ebar,
        {s["name"]: rng.randint(-1, kmax[s["name"]] + 1) for s in strata},
    ]
    pset = []
    todo = [tuple(sorted(p.items())) for p in base]
    while todo:
        p = todo.pop()
        if p in pset:
            continue
        pset.append(p)
        todo.append(tuple(sorted((k, max(-1, v - xbar[k])) for k, v in p)))
    pset.sort()

    def mat_json(m):
        return [[rat_str(x) for x in row] for row in m.entries]

    data = {
        "name": "random-%d-%d" % (seed, size),
        "top_degree": top,
        "dims": dims,
        "d": [mat_json(d) for d in diffs],
        "strata": strata,
        "filtrations": {
            name: {str(level): [[[rat_str(x) for x in v] for v in spaces[deg].vectors()]
                                for deg in range(top + 1)]
                   for level, spaces in levels.items()}
            for name, levels in filtrations.items()
        },
        "euler_cocycle": [rat_str(x) for x in eps],
        "euler_op": [mat_json(e) for e in euler],
        "perversities": [dict(p) for p in pset],
    }
    return model_from_dict(data)


# ---------------------------------------------------------------------------
# brute-force oracle


def oracle_cohomology(m: ModelInstance, p: Perversity, n_u: int) -> dict:
    """Equivariant cohomology dims and u-ranks straight from the definitions.

    Builds, for every total degree, the space of admissible pairs in each
    u-power component as the kernel of an explicit constraint matrix, writes
    the twisted differential in those bases, and reads off dims by
    rank-nullity and u-ranks by comparing cocycle images with coboundaries.
    Trustworthy in degrees <= n_u.
    """
    a = m.ambient
    q = p.minus(m.characteristic_perversity())
    top = a.top_degree

    fp = {}
    fq = {}
    for k in range(0, top + 2):
        fp[k] = m.filtration_level(p, k)
        fq[k] = m.filtration_level(q, k)

    def flevel(table, k):
        if 0 <= k <= top:
            return table[k]
        return Subspace.zero(a.dim(k))

    def sign(k):
        return -1 if (k - 1) % 2 else 1

    # admissible pairs (alpha, beta) in degree k, as a subspace of
    # Q^{dim k + dim k-1}
    pairs = {}
    for k in range(0, top + 2):
        na, nb = a.dim(k), a.dim(k - 1)
        if na + nb == 0:
            pairs[k] = Subspace.zero(0)
            continue
        rows = []

        def add_block(proj, acols, bcols):
            for r in range(proj.rows):
                rows.append([sum((proj.entries[r][t] * acols.entries[t][c]
                                  for t in range(proj.cols)), 0)
                             for c in range(na)]
                            + [sum((proj.entries[r][t] * bcols.entries[t][c]
                                    for t in range(proj.cols)), 0)
                               for c in range(nb)])

        ia = Matrix.identity(na)
        ib = Matrix.identity(nb)
        # alpha in F_p^k
        sp = flevel(fp, k)
        if not sp.is_full():
            add_block(_killing_projection(sp), ia, Matrix.zero(na, nb))
        # beta in F_{p-xbar}^{k-1}
        sq = flevel(fq, k - 1)
        if not sq.is_full():
            add_block(_killing_projection(sq), Matrix.zero(nb, na), ib)
        # d beta in F_{p-xbar}^k
        sdq = flevel(fq, k)
        if not sdq.is_full():
            add_block(_killing_projection(sdq), Matrix.zero(a.dim(k), na),
                      a.diff(k - 1))
        # d alpha + sign * E beta in F_p^{k+1}
        st = flevel(fp, k + 1)
        if not st.is_full():
            add_block(_killing_projection(st), a.diff(k),
                      a.euler(k - 1).scale(sign(k)))
        if rows:
            pairs[k] = kernel(Matrix(len(rows), na + nb, rows))
        else:
            pairs[k] = Subspace.full(na + nb)

    def pair_space(k):
        return pairs.get(k, Subspace.zero(a.dim(k) + a.dim(k - 1)))

    def components(n):
        return [(j, n - 2 * j) for j in range(n // 2 + 1)
                if 0 <= n - 2 * j <= top + 1]

    hi = n_u + 3
    cdim = {}
    offs = {}
    for n in range(hi + 1):
        off = {}
        total = 0
        for j, k in components(n):
            off[j] = total
            total += pair_space(k).dim
        cdim[n] = total
        offs[n] = off

    nabla = {}
    umat = {}
    for n in range(hi):
        cols = []
        for j, k in components(n):
            sp = pair_space(k)
            na, nb = a.dim(k), a.dim(k - 1)
            for w in sp.vectors():
                alpha, beta = w[:na], w[na:]
                out = [0] * cdim[n + 1]
                # differential part, same u-power
                da = a.diff(k).apply(alpha)
                eb = a.euler(k - 1).apply(beta)
                s = sign(k)
                dpart = tuple(x + s * y for x, y in zip(da, eb)) + a.diff(k - 1).apply(beta)
                tgt = pair_space(k + 1)
                coords = tgt.coords(dpart)
                if coords is None:
                    raise InternalInvariantViolation(
                        "differential left the admissible-pair space")
                if j in offs[n + 1]:
                    for i, x in enumerate(coords):
                        out[offs[n + 1][j] + i] += x
                # u part: (beta, 0) one u-power up, with the degree sign
                upart = tuple(beta) + (0,) * a.dim(k - 2)
                utgt = pair_space(k - 1)
                ucoords = utgt.coords(upart)
                if ucoords is None:
                    raise InternalInvariantViolation(
                        "u-component left the admissible-pair space")
                if j + 1 in offs[n + 1]:
                    for i, x in enumerate(ucoords):
                        out[offs[n + 1][j + 1] + i] += s * x
                cols.append(tuple(out))
        nabla[n] = Matrix.from_columns(cdim[n + 1], cols)
    for n in range(hi - 1):
        cols = []
        for j, k in components(n):
            sp = pair_space(k)
            for i in range(sp.dim):
                out = [0] * cdim[n + 2]
                if j + 1 in offs[n + 2]:
                    out[offs[n + 2][j + 1] + i] = 1
                cols.append(tuple(out))
        umat[n] = Matrix.from_columns(cdim[n + 2], cols)

    dims = []
    for n in range(n_u + 1):
        r_out = nabla[n].rank()
        r_in = nabla[n - 1].rank() if n >= 1 else 0
        dims.append(cdim[n] - r_out - r_in)

    u_ranks = []
    for n in range(n_u + 1):
        z = kernel(nabla[n])
        b = image(nabla[n + 1])
        moved = map_image(umat[n], z)
        u_ranks.append(subspace_sum(moved, b).dim - b.dim)

    return {"dims": tuple(dims), "u_ranks": tuple(u_ranks)}
