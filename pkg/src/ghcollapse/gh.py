"""Couplings between a sampled surface and its collapsed limit.

A coupling is a metric on the disjoint union X_i ⊔ X extending both metrics.
It is built from a map f: X_i -> X with small distortion by the usual
formula cross(p, x) = min_q [d(p, q) + eps + d_X(f q, x)].  Balls in X_i
around limit points, their projected counterparts and Hausdorff distances
are read off the cross distances.  Small exhaustive Gromov-Hausdorff
oracles are included for testing.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .hyperbolic import hyperboloid_distance
from .surfaces.base import FamilySpec, SampledSurface

TIE = 1e-12
LIPSCHITZ_TOL = 1e-9
LIMIT_KINDS = ("segment", "circle", "point", "surface")


class UsageError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class LimitSpace:
    """Segment [0, length], circle R/length Z, a point, or (for non-collapsing
    controls) the surface itself with vertex indices as parameters.

    ``reflection`` marks the involution x -> length - x (mod length on the
    circle) used by equivariant couplings."""

    kind: str
    length: float = 0.0
    samples: tuple = ()
    reflection: bool = False
    surface: SampledSurface | None = None

    def __post_init__(self):
        if self.kind not in LIMIT_KINDS:
            raise UsageError(f"unknown limit kind {self.kind!r}")
        if self.kind in ("segment", "circle") and not self.length > 0:
            raise UsageError("limit length must be positive")
        if self.kind == "surface" and self.surface is None:
            raise UsageError("surface limit needs its surface")
        for x in self.samples:
            self.check_param(x)

    def check_param(self, x):
        if self.kind == "segment" and not -TIE <= x <= self.length + TIE:
            raise UsageError(f"parameter {x} outside [0, {self.length}]")
        if self.kind == "circle" and not 0 <= x < self.length:
            raise UsageError(f"parameter {x} outside [0, {self.length})")
        if self.kind == "surface" and not (0 <= int(x) < self.surface.n):
            raise UsageError(f"vertex {x} out of range")

    def distance(self, a, b):
        a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
        if self.kind == "segment":
            return np.abs(a - b)
        if self.kind == "circle":
            d = np.mod(np.abs(a - b), self.length)
            return np.minimum(d, self.length - d)
        if self.kind == "point":
            return np.zeros(np.broadcast(a, b).shape)
        a, b = np.broadcast_arrays(a.astype(np.int64), b.astype(np.int64))
        return _surface_pairs(self.surface, a, b)

    def grid(self, h):
        """Uniform samples with gap <= h (all vertices for a surface)."""
        if self.kind == "point":
            return np.zeros(1)
        if self.kind == "surface":
            return np.arange(self.surface.n, dtype=float)
        n = max(int(math.ceil(self.length / h - 1e-9)), 1)
        if self.kind == "segment":
            return np.linspace(0.0, self.length, n + 1)
        return np.arange(n) * (self.length / n)

    def act(self, x):
        if not self.reflection:
            raise UsageError("limit has no reflection")
        x = np.asarray(x, dtype=float)
        return self.length - x if self.kind == "segment" else np.mod(self.length - x, self.length)

    def fold(self):
        """Quotient by the reflection, a segment of half the length."""
        if not self.reflection:
            raise UsageError("limit has no reflection")
        return LimitSpace("segment", self.length / 2)

    def fold_param(self, x):
        x = np.asarray(x, dtype=float)
        return np.minimum(x, self.length - x)

    def boundary_distance(self, x):
        if self.kind == "segment":
            return float(min(x, self.length - x))
        return math.inf


def _surface_pairs(S, a, b):
    out = np.empty(a.shape)
    for s in np.unique(a):
        sel = a == s
        out[sel] = S.distances_from([s])[0][b[sel]]
    return out


@dataclass(eq=False)
class AlmostIsometry:
    """Vertex map into the limit with its measured distortion and codensity.

    ``lipschitz_excess`` is max over audited pairs of d_X(f p, f q) - d(p, q);
    a value <= 1e-9 certifies f as 1-Lipschitz on the sample."""

    surface: SampledSurface
    limit: LimitSpace
    map: np.ndarray
    distortion: float = math.nan
    codensity: float = math.nan
    lipschitz_excess: float = math.nan
    grid_gap: float = math.nan

    @property
    def lipschitz(self):
        return self.lipschitz_excess <= LIPSCHITZ_TOL

    def measure(self):
        S, X, f = self.surface, self.limit, self.map
        rows = S.sup_rows()
        D = S.distances_from(rows)
        if X.kind == "surface":
            DX = X.surface.distances_from(f[rows].astype(np.int64))[:, f.astype(np.int64)]
        else:
            DX = X.distance(f[rows][:, None], f[None, :])
        diff = DX - D
        distortion = float(np.max(np.abs(diff)))
        excess = float(np.max(diff))
        grid = X.grid(self.grid_gap)
        if X.kind == "surface":
            codensity = 0.0
        elif X.kind == "point":
            codensity = 0.0
        else:
            codensity = max(float(np.min(X.distance(f, x))) for x in grid)
        return distortion, codensity, excess

    def refresh(self):
        self.distortion, self.codensity, self.lipschitz_excess = self.measure()
        return self

    def verify(self, tol=1e-12):
        d, c, _ = self.measure()
        return abs(d - self.distortion) <= tol and abs(c - self.codensity) <= tol


def limit_for(S: SampledSurface, family: FamilySpec) -> LimitSpace:
    fam, prm = family.family, family.params
    if fam == "sphere_tube":
        return LimitSpace("segment", prm["ell"], reflection=True)
    if fam == "rp2_tube":
        return LimitSpace("segment", prm["ell"] / 2)
    if fam in ("flat_torus", "flat_klein_circle"):
        return LimitSpace("circle", prm["L"], reflection=fam == "flat_torus")
    if fam == "flat_klein_segment":
        return LimitSpace("segment", prm["L"] / 2)
    if fam == "point_collapse":
        return LimitSpace("point")
    if fam in ("no_collapse", "double_cover"):
        return LimitSpace("surface", surface=S)
    raise UsageError(f"no natural projection for family {fam!r}")


def natural_projection(S: SampledSurface, family: FamilySpec) -> AlmostIsometry:
    """The family's canonical map to its limit: axis parameter for tubes
    (folded for the projective plane), the long coordinate for flat
    families (folded for the segment-mode Klein bottle), a constant for
    point collapse, the identity when nothing collapses."""
    X = limit_for(S, family)
    fam = family.family
    c = S.coords
    if fam in ("sphere_tube", "rp2_tube"):
        fmap = np.asarray(c["s"], dtype=float)
    elif fam in ("flat_torus", "flat_klein_circle"):
        fmap = np.asarray(c["u"], dtype=float)
    elif fam == "flat_klein_segment":
        u = np.mod(np.asarray(c["u"], dtype=float), family.params["L"])
        fmap = np.minimum(u, family.params["L"] - u)
    elif fam == "point_collapse":
        fmap = np.zeros(S.n)
    else:
        fmap = np.arange(S.n, dtype=float)
    gap = family.h or S.h or 1e-2
    return AlmostIsometry(S, X, fmap, grid_gap=gap).refresh()


@dataclass(eq=False)
class CouplingMetric:
    """Metric on surface ⊔ limit.  ``cross(x)`` returns the distances from
    every surface vertex to the limit parameter x."""

    surface: SampledSurface
    limit: LimitSpace
    epsilon: float
    cross_fn: object
    description: str = ""
    # True when balls are exactly eps-shrunk projected balls (1-Lipschitz map)
    exact_balls: bool = False
    _memo: dict = field(default_factory=dict, repr=False)

    def cross(self, x):
        key = float(x)
        if key not in self._memo:
            self._memo[key] = np.asarray(self.cross_fn(key), dtype=float)
        return self._memo[key]

    def cross_pair(self, p, x):
        return float(self.cross(x)[p])


def coupling_from_map(f: AlmostIsometry, eps=None) -> CouplingMetric:
    """cross(p, x) = min_q [d(p, q) + eps + d_X(f q, x)].

    eps defaults to distortion/2 + h.  When f is certified 1-Lipschitz the
    minimum is attained at q = p, so cross(p, x) = eps + d_X(f p, x)."""
    S, X = f.surface, f.limit
    if eps is None:
        eps = f.distortion / 2 + (S.h or 0.0)
    if eps < f.distortion / 2:
        raise UsageError(f"eps={eps} below distortion/2={f.distortion / 2}: triangle inequality may fail")
    if eps <= 0:
        raise UsageError("eps must be positive (cross distances must be > 0)")
    fmap = f.map

    if X.kind == "surface":
        idx = fmap.astype(np.int64)
        if not f.lipschitz:
            raise UsageError("maps into a surface limit must be 1-Lipschitz")

        def cross(x):
            return eps + X.surface.distances_from([int(x)])[0][idx]
    elif f.lipschitz:
        def cross(x):
            return eps + X.distance(fmap, x)
    else:
        def cross(x):
            return S.seeded_distances(eps + X.distance(fmap, x))
    kind = "projection" if f.lipschitz else "seeded"
    C = CouplingMetric(S, X, float(eps), cross, description=kind)
    C.exact_balls = f.lipschitz
    return C


def ambient_coupling(S: SampledSurface, ell: float) -> CouplingMetric:
    """Hyperbolic distance from a tube vertex to the axis point at parameter x
    (the axis is centred at the origin along the first Klein coordinate)."""
    H = S.hpoints
    X = LimitSpace("segment", ell)

    def cross(x):
        t = x - ell / 2
        a = np.array([math.cosh(t), math.sinh(t), 0.0, 0.0])
        return hyperboloid_distance(H, a[None, :])

    return CouplingMetric(S, X, 0.0, cross, description="ambient")


def ambient_projected_ball(S: SampledSurface, ell: float, x: float, delta: float):
    """Vertices whose nearest point on the axis line is within delta of the
    axis point x (the projection is not clamped to the segment)."""
    s = np.asarray(S.coords["t"], dtype=float) + ell / 2
    return np.nonzero(np.abs(s - x) < delta - TIE)[0]


def quotient_coupling(C: CouplingMetric, Q: SampledSurface) -> CouplingMetric:
    """Coupling between Q = cover / Z2 and the folded limit, minimising over
    lifts on both sides."""
    X = C.limit
    Xq = X.fold()
    orbit_of = Q.orbit_of

    def cross(xb):
        vals = np.minimum(C.cross(xb), C.cross(float(X.act(xb))))
        out = np.full(Q.n, np.inf)
        np.minimum.at(out, orbit_of, vals)
        return out

    return CouplingMetric(Q, Xq, C.epsilon, cross, description="quotient")


def hausdorff_in_coupling(C: CouplingMetric, h=None, grid=None) -> float:
    """Hausdorff distance between the two blocks, with the limit sampled on a
    uniform grid of gap <= h plus its configured samples."""
    if grid is None:
        h = h or C.surface.h or 1e-2
        grid = np.union1d(C.limit.grid(h), np.asarray(C.limit.samples, dtype=float))
    rows = np.vstack([C.cross(x) for x in grid])
    return float(max(np.max(np.min(rows, axis=0)), np.max(np.min(rows, axis=1))))


def ball(C: CouplingMetric, x, delta):
    """Open ball {p : cross(p, x) < delta} (ties within 1e-12 excluded)."""
    if delta <= 0:
        raise UsageError("delta must be positive")
    return np.nonzero(C.cross(x) < delta - TIE)[0]


def projected_ball(S: SampledSurface, f: AlmostIsometry, x, delta):
    """{p : d_X(f p, x) < delta}."""
    if delta <= 0:
        raise UsageError("delta must be positive")
    if f.limit.kind == "surface":
        d = f.limit.surface.distances_from([int(x)])[0][f.map.astype(np.int64)]
    else:
        d = f.limit.distance(f.map, x)
    return np.nonzero(d < delta - TIE)[0]


def audit_coupling_triangles(C: CouplingMetric, n_triples=100_000, n_vertices=150,
                             n_limit=100, seed=0):
    """Minimum triangle slack d(a, b) + d(b, c) - d(a, c) over random triples
    drawn from a pool of surface vertices and limit grid points."""
    rng = np.random.default_rng(seed)
    S, X = C.surface, C.limit
    P = np.sort(rng.choice(S.n, min(n_vertices, S.n), replace=False))
    grid = X.grid(S.h or 1e-2)
    xs = grid if len(grid) <= n_limit else np.sort(rng.choice(grid, n_limit, replace=False))
    DPP = S.distances_from(P)[:, P]
    if X.kind == "surface":
        DXX = X.surface.distances_from(xs.astype(np.int64))[:, xs.astype(np.int64)]
    else:
        DXX = X.distance(xs[:, None], xs[None, :])
    DPX = np.column_stack([C.cross(x)[P] for x in xs])
    m = len(P)
    full = np.block([[DPP, DPX], [DPX.T, DXX]])
    idx = rng.integers(0, len(full), size=(n_triples, 3))
    a, b, c = idx.T
    slack = full[a, b] + full[b, c] - full[a, c]
    return float(slack.min()), m, len(xs)


# ---------------------------------------------------------------------------
# small Gromov-Hausdorff oracles


def _distortion(R, DX, DY):
    R = np.asarray(R)
    a, b = R[:, 0], R[:, 1]
    return float(np.max(np.abs(DX[np.ix_(a, a)] - DY[np.ix_(b, b)])))


def correspondence_from_map(f, DX, DY):
    """graph(f) plus, for each y, a nearest point of the image paired with y."""
    f = np.asarray(f, dtype=np.int64)
    R = {(x, int(f[x])) for x in range(len(f))}
    for y in range(len(DY)):
        x = int(np.argmin(DY[f, y]))
        R.add((x, y))
    return sorted(R)


def gh_upper_bound(DX, DY, maps):
    """min over candidate maps X -> Y of distortion/2 of their correspondences."""
    DX, DY = np.asarray(DX, float), np.asarray(DY, float)
    if not maps:
        raise UsageError("need at least one candidate map")
    return min(_distortion(correspondence_from_map(f, DX, DY), DX, DY) / 2 for f in maps)


def gh_oracle_small(DX, DY, group=None, max_size=36):
    """Exact GH distance min_R dis(R)/2 over correspondences R.

    ``group`` is an optional list of pairs (perm of X, perm of Y) listing
    every group element; correspondences are then closed under the diagonal
    action (the equivariant distance).  Each candidate threshold t is
    decided by a depth-first search that covers X and Y pair by pair and
    keeps only pairs compatible with all chosen ones."""
    DX, DY = np.asarray(DX, float), np.asarray(DY, float)
    nx, ny = len(DX), len(DY)
    if nx * ny > max_size:
        raise UsageError(f"|X||Y| = {nx * ny} exceeds the oracle limit {max_size}")
    if group is None:
        group = [(np.arange(nx), np.arange(ny))]
    group = [(np.asarray(gx), np.asarray(gy)) for gx, gy in group]
    # compatibility cost of two pairs
    cost = np.abs(DX[:, None, :, None] - DY[None, :, None, :])   # [a, b, c, d]

    def orbit(a, b):
        return {(int(gx[a]), int(gy[b])) for gx, gy in group}

    def feasible(t):
        def extend(R, cov_x, cov_y):
            if len(cov_x) == nx and len(cov_y) == ny:
                return True
            # branch on the first uncovered point (x before y)
            if len(cov_x) < nx:
                x = min(set(range(nx)) - cov_x)
                options = [(x, y) for y in range(ny)]
            else:
                y = min(set(range(ny)) - cov_y)
                options = [(x, y) for x in range(nx)]
            for a, b in options:
                new = orbit(a, b) - R
                cand = list(R | new)
                ok = all(cost[p, q, r, s] <= t + 1e-12 for (p, q) in new for (r, s) in cand)
                if ok and extend(R | new, cov_x | {p for p, _ in new}, cov_y | {q for _, q in new}):
                    return True
            return False

        return extend(frozenset(), frozenset(), frozenset())

    levels = np.unique(np.round(cost.reshape(-1), 12))
    lo, hi = 0, len(levels) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if feasible(levels[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(levels[lo]) / 2
