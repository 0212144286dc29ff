"""Two-scale ball homology, the function F and Euler integration on the limit.

h^a(x) is the rank of H_a(B(delta1)) -> H_a(B(delta2)) for the balls of a
coupling around the limit point x, realised as induced subcomplexes of the
surface mesh.  Over a field this rank equals the rank of the restriction in
cohomology, so homology is used throughout.
"""
from __future__ import annotations

from dataclasses import dataclass

from .complexes import SimplicialComplex, homology_dims, image_rank
from .gh import CouplingMetric, LimitSpace, ball
from .surfaces.base import SampledSurface

CONCLUSIVE = "conclusive"
EMPTY = "inconclusive:empty_ball"
GAP = "inconclusive:gap_below_threshold"
BOUNDARY = "inconclusive:boundary_proximity"


class AssemblyError(ValueError):
    pass


def induced_subcomplex(S: SampledSurface, V) -> SimplicialComplex:
    """Full subcomplex of the surface mesh on the vertex set V."""
    return S.tri.induced(V)


@dataclass
class HProfile:
    h: tuple | None
    F: int | None
    field_p: int
    basepoint: float
    deltas: tuple
    collapse_index: float | None = None
    status: str = CONCLUSIVE
    tag: str = "interior"

    @property
    def conclusive(self):
        return self.status == CONCLUSIVE


def trust_threshold(C: CouplingMetric, budget: float) -> float:
    """Smallest usable delta gap.  Exact projected balls only carry the
    coupling slack; otherwise the metric budget is added."""
    if getattr(C, "exact_balls", False):
        return C.epsilon
    return budget + C.epsilon


def ball_pair_status(C, x, d1, d2, B1, B2, tag, budget):
    if len(B1) == 0 or len(B2) == 0:
        return EMPTY
    if d2 - d1 <= trust_threshold(C, budget):
        return GAP
    if tag == "interior" and d2 >= C.limit.boundary_distance(x):
        return BOUNDARY
    return CONCLUSIVE


def h_profiles(C: CouplingMetric, x, d1, d2, fields, tag="interior", budget=None,
               collapse_index=None):
    """Profiles at one basepoint and delta pair for several primes (the balls
    and subcomplexes are shared)."""
    if not 0 < d1 < d2:
        raise ValueError("need 0 < delta1 < delta2")
    S = C.surface
    if budget is None:
        budget = S.measured_error if S.measured_error is not None else S.error_budget
    B1, B2 = ball(C, x, d1), ball(C, x, d2)
    status = ball_pair_status(C, x, d1, d2, B1, B2, tag, budget)
    out = []
    if status == EMPTY:
        return [HProfile(None, None, p, x, (d1, d2), collapse_index, status, tag) for p in fields]
    K1, K2 = induced_subcomplex(S, B1), induced_subcomplex(S, B2)
    for p in fields:
        h = tuple(int(image_rank(K1, K2, a, p)) for a in range(3))
        out.append(HProfile(h, h[0] - h[1] + h[2], p, x, (d1, d2), collapse_index, status, tag))
    return out


def h_profile(C: CouplingMetric, x, d1, d2, p, tag="interior", budget=None, collapse_index=None):
    return h_profiles(C, x, d1, d2, [p], tag, budget, collapse_index)[0]


@dataclass
class ConstructibleFunction:
    """Integer function on the limit, constant on the open interior.

    segment: ``interior_value`` plus ``endpoint_values`` (at 0 and at length);
    circle / point / surface: constant ``interior_value``.  ``support_chi``
    is the Euler characteristic of the limit for the constant kinds."""

    kind: str
    interior_value: int
    endpoint_values: tuple = ()
    support_chi: int = 0

    def __post_init__(self):
        if self.kind == "segment" and len(self.endpoint_values) != 2:
            raise AssemblyError("a segment function needs two endpoint values")
        if self.kind != "segment" and self.endpoint_values:
            raise AssemblyError(f"{self.kind} functions have no endpoint values")

    def __call__(self, x, limit: LimitSpace):
        if self.kind == "segment":
            if abs(x) < 1e-12:
                return self.endpoint_values[0]
            if abs(x - limit.length) < 1e-12:
                return self.endpoint_values[1]
        return self.interior_value


def assemble_constructible(profiles, limit: LimitSpace, support_chi=None) -> ConstructibleFunction:
    """Glue conclusive profiles of one (i, delta pair, p) cell into F."""
    good = [pr for pr in profiles if pr.conclusive]
    if not good:
        raise AssemblyError("no conclusive profiles")
    keys = {(pr.collapse_index, pr.deltas, pr.field_p) for pr in good}
    if len(keys) > 1:
        raise AssemblyError(f"profiles from different cells: {sorted(keys, key=str)}")
    if limit.kind == "segment":
        inner = [pr for pr in good if 1e-12 < pr.basepoint < limit.length - 1e-12]
        ends = [[pr for pr in good if abs(pr.basepoint - e) <= 1e-12] for e in (0.0, limit.length)]
    else:
        inner, ends = good, []
    values = {pr.F for pr in inner}
    if len(values) > 1:
        bad = sorted((pr.basepoint, pr.F) for pr in inner)
        raise AssemblyError(f"interior values disagree: {bad}")
    if not values:
        raise AssemblyError("no conclusive interior profile")
    v = values.pop()
    if limit.kind == "segment":
        ev = []
        for e, group in zip((0.0, limit.length), ends):
            fs = {pr.F for pr in group}
            if len(fs) != 1:
                raise AssemblyError(f"endpoint {e}: values {sorted(fs)}")
            ev.append(fs.pop())
        return ConstructibleFunction("segment", v, tuple(ev))
    chi = {"circle": 0, "point": 1}.get(limit.kind)
    if limit.kind == "surface":
        chi = support_chi if support_chi is not None else limit.surface.tri.euler_characteristic
    return ConstructibleFunction(limit.kind, v, (), chi)


def euler_integral(F: ConstructibleFunction) -> int:
    """Sum of c_i chi(Z_i) over the strata: the open segment has chi = -1
    and each endpoint chi = 1."""
    if F.kind == "segment":
        ea, eb = F.endpoint_values
        return int(F.interior_value * (-1) + ea + eb)
    return int(F.interior_value * F.support_chi)


def betti_full(S: SampledSurface, p: int):
    return list(homology_dims(S.tri, p))
