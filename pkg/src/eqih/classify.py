"""Comparison of two models through a filtration-compatible chain
isomorphism of their ambient complexes.

An isomorphism is *optimal* when corresponding strata have the same kind.
Two models are *related* through an optimal isomorphism when it carries the
Euler cocycle of one to the other up to the differential of an admissible
1-form (admissible for the Euler perversity).  Relatedness forces the
equivariant invariants to agree; `consequence_check` verifies those
necessary equalities and treats any failure as an internal contradiction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import InvalidIso, TheoremViolation
from .localize import localize
from .model import ModelInstance, Perversity
from .perverse import perverse_complex
from .ratla import Matrix, Subspace, map_image, rat, vec_sub


@dataclass(frozen=True)
class ModelIso:
    """Degreewise invertible chain map from the ambient of the second model
    to the ambient of the first, with a stratum correspondence (names of the
    second model mapped to names of the first)."""

    mats: dict = field(default_factory=dict)    # degree -> Matrix A2^k -> A1^k
    strata: dict = field(default_factory=dict)  # m2 stratum -> m1 stratum

    def mat(self, m1: ModelInstance, m2: ModelInstance, k: int) -> Matrix:
        got = self.mats.get(k)
        if got is None:
            return Matrix.zero(m1.ambient.dim(k), m2.ambient.dim(k))
        return got


def identity_iso(m: ModelInstance) -> ModelIso:
    mats = {k: Matrix.identity(m.ambient.dim(k))
            for k in range(m.ambient.top_degree + 1)}
    return ModelIso(mats, {s: s for s in m.stratum_names()})


def validate_iso(iso: ModelIso, m1: ModelInstance, m2: ModelInstance) -> None:
    """Raise InvalidIso unless iso is a degreewise-invertible,
    filtration-preserving chain isomorphism m2 -> m1."""
    a1, a2 = m1.ambient, m2.ambient
    if a1.top_degree != a2.top_degree:
        raise InvalidIso("ambient top degrees differ: %d vs %d"
                         % (a1.top_degree, a2.top_degree))
    top = a1.top_degree
    for k in range(top + 1):
        f = iso.mat(m1, m2, k)
        if f.rows != a1.dim(k) or f.cols != a2.dim(k):
            raise InvalidIso("degree-%d matrix has shape %dx%d, expected %dx%d"
                             % (k, f.rows, f.cols, a1.dim(k), a2.dim(k)))
        if f.rows != f.cols or f.rank() != f.rows:
            raise InvalidIso("degree-%d matrix is not invertible" % k)
    for k in range(top):
        lhs = iso.mat(m1, m2, k + 1) * a2.diff(k)
        rhs = a1.diff(k) * iso.mat(m1, m2, k)
        if lhs != rhs:
            raise InvalidIso("not a chain map in degree %d" % k)
    if sorted(iso.strata.keys()) != sorted(m2.stratum_names()):
        raise InvalidIso("correspondence domain does not cover the strata of %r"
                         % m2.name)
    if sorted(iso.strata.values()) != sorted(m1.stratum_names()):
        raise InvalidIso("correspondence image does not cover the strata of %r"
                         % m1.name)
    for s2, s1 in iso.strata.items():
        kmax = max(a1.kmax.get(s1, 0), a2.kmax.get(s2, 0))
        for level in range(-1, kmax + 1):
            for k in range(top + 1):
                src = a2.filtration(s2, level, k)
                tgt = a1.filtration(s1, level, k)
                img = map_image(iso.mat(m1, m2, k), src)
                if not (tgt.contains_subspace(img)
                        and img.dim == tgt.dim):
                    raise InvalidIso(
                        "filtration level %d of stratum %r not preserved in "
                        "degree %d" % (level, s2, k))


def is_optimal(iso: ModelIso, m1: ModelInstance, m2: ModelInstance) -> bool:
    """True iff corresponding strata have the same kind."""
    validate_iso(iso, m1, m2)
    return all(m2.stratum(s2).kind == m1.stratum(s1).kind
               for s2, s1 in iso.strata.items())


def f_related(iso: ModelIso, m1: ModelInstance, m2: ModelInstance):
    """Decide whether iso carries the Euler cocycle of m2 to that of m1 up
    to the differential of an admissible 1-form.

    Returns (True, gamma) with gamma an ambient degree-1 witness satisfying
    d(gamma) = f(eps2) - eps1, or (False, None).  The witness is drawn from
    the admissible forms of the Euler perversity of m1.
    """
    if not is_optimal(iso, m1, m2):
        raise InvalidIso("relatedness needs an optimal isomorphism")
    a1, a2 = m1.ambient, m2.ambient
    eps1 = [rat(x) for x in a1.euler_cocycle]
    eps2 = [rat(x) for x in a2.euler_cocycle]
    diff = vec_sub(iso.mat(m1, m2, 2).apply(eps2), eps1)
    if all(x == 0 for x in diff):
        return True, (rat(0),) * a1.dim(1)
    ebar = m1.euler_perversity()
    omega1 = perverse_complex(m1, ebar).omega_spaces.get(
        1, Subspace.zero(a1.dim(1)))
    system = a1.diff(1) * omega1.basis
    x = system.solve(diff)
    if x is None:
        return False, None
    return True, tuple(omega1.basis.apply(x))


def consequence_check(iso: ModelIso, m1: ModelInstance, m2: ModelInstance) -> dict:
    """Verify the necessary consequences of relatedness: for every shared
    perversity the graded equivariant dims, the u-action ranks, and the
    localized ranks coincide.  Raises TheoremViolation on any mismatch."""
    from .equivariant import build_equivariant

    related, _ = f_related(iso, m1, m2)
    if not related:
        raise InvalidIso("consequence check needs related models")
    transported = {}
    for p2 in m2.perversity_set:
        p1 = Perversity({iso.strata[s]: v for s, v in p2.items})
        if p1 in m1.perversity_set:
            transported[p2] = p1
    report = {"perversities": [], "all_equal": True}
    for p2, p1 in sorted(transported.items(), key=lambda kv: kv[0].label()):
        eq1 = build_equivariant(m1, p1)
        eq2 = build_equivariant(m2, p2)
        entry = {
            "perversity": p2.label(),
            "dims_equal": eq1.dims() == eq2.dims(),
            "u_ranks_equal": eq1.u_ranks() == eq2.u_ranks(),
            "localization_equal":
                localize(m1, p1).ranks() == localize(m2, p2).ranks(),
        }
        report["perversities"].append(entry)
        if not all(v for k, v in entry.items() if k != "perversity"):
            report["all_equal"] = False
    if not report["all_equal"]:
        raise TheoremViolation(
            "related models disagree on equivariant invariants: %s" % report)
    return report
