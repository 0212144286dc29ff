"""Boundaries of tubular neighbourhoods of a geodesic segment in H^3.

The r-neighbourhood of a segment of length ell has a boundary made of a
cylinder (Fermi coordinates (t, theta), flat metric cosh(r)^2 dt^2 +
sinh(r)^2 dtheta^2) and two hemispheres of geodesic spheres of radius r
(round metric of radius sinh r).  Intrinsically it is a Euclidean capsule:
radius R = sinh r, straight part of length ell cosh r.  Distances inside a
piece are closed form; paths crossing a seam are minimised over the seam
crossing angle.  The surface metric is the shortest-path metric of the mesh
graph enriched by a k-hop stencil whose edges carry exact local distances.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.sparse import csr_matrix, triu

from ..complexes import SimplicialComplex
from ..hyperbolic import GeodesicSubspace, HPoint, fermi_from_hyperboloid, hyperboloid_to_klein
from .base import ConfigError, ConstructionError, SampledSurface, check_closed_surface, quotient_by_group


def _wrap_angle(a):
    return a - 2 * np.pi * np.round(a / (2 * np.pi))


def _zoom_min(fun, m, dims, first=33, later=9, levels=10):
    """Vectorised minimisation of ``fun`` over [0, 1]^dims for m problems.

    ``fun`` takes an (m, k, dims) array of parameters and returns (m, k)
    values.  Coarse grid followed by repeated zooms around the best point."""
    center = np.full((m, dims), 0.5)
    half = 0.5
    best = np.full(m, np.inf)
    for lev in range(levels):
        npts = first if lev == 0 else later
        offs = np.linspace(-half, half, npts)
        grid = np.stack(np.meshgrid(*([offs] * dims), indexing="ij"), axis=-1).reshape(-1, dims)
        pts = np.clip(center[:, None, :] + grid[None, :, :], 0.0, 1.0)
        vals = fun(pts)
        k = np.argmin(vals, axis=1)
        rows = np.arange(m)
        best = np.minimum(best, vals[rows, k])
        center = pts[rows, k]
        half = 2.0 * half / (npts - 1)
    return best


class Capsule:
    """Intrinsic geometry of the tube boundary, parametrised by vertex data.

    Each point is (part, z, theta, phi): part 0 is the closed cylinder with
    axial arclength z in [-Lc/2, Lc/2]; part +1/-1 are the open caps, with
    polar angle phi in [0, pi/2) measured from the tip (phi = pi/2 is the seam).
    """

    def __init__(self, ell, r):
        self.ell, self.r = float(ell), float(r)
        self.R = math.sinh(r)
        self.Lc = ell * math.cosh(r)

    # ambient embedding -----------------------------------------------------
    def hyperboloid(self, part, z, theta, phi):
        part, z, theta, phi = np.broadcast_arrays(part, z, theta, phi)
        ch, sh = math.cosh(self.r), math.sinh(self.r)
        out = np.zeros(part.shape + (4,))
        cyl = part == 0
        t = z[cyl] / ch
        out[cyl] = (ch * np.stack([np.cosh(t), np.sinh(t), 0 * t, 0 * t], -1)
                    + sh * np.stack([0 * t, 0 * t, np.cos(theta[cyl]), np.sin(theta[cyl])], -1))
        for c in (1, -1):
            sel = part == c
            a = self.ell / 2
            E = np.array([math.cosh(a), c * math.sinh(a), 0, 0])
            e1 = np.array([math.sinh(a), c * math.cosh(a), 0, 0])
            ph, th = phi[sel][:, None], theta[sel][:, None]
            v = (np.cos(ph) * e1 + np.sin(ph) * (np.cos(th) * np.array([0, 0, 1.0, 0])
                                                 + np.sin(th) * np.array([0, 0, 0, 1.0])))
            out[sel] = ch * E + sh * v
        return out

    # intrinsic pieces --------------------------------------------------------
    def _unit(self, c, theta, phi):
        c, theta, phi = np.broadcast_arrays(c, theta, phi)
        return np.stack([c * np.cos(phi), np.sin(phi) * np.cos(theta),
                         np.sin(phi) * np.sin(theta)], axis=-1)

    def _sphere(self, u1, u2):
        chord = np.linalg.norm(u1 - u2, axis=-1)
        return 2.0 * self.R * np.arcsin(np.clip(0.5 * chord, 0.0, 1.0))

    def _helix(self, z1, th1, z2, th2):
        return np.hypot(z2 - z1, self.R * _wrap_angle(th2 - th1))

    def distance(self, A, B, fine=False):
        """Intrinsic distances between point data A[i] and B[i] (dicts of
        arrays with keys part, z, theta, phi)."""
        pa, pb = A["part"], B["part"]
        m = len(pa)
        out = np.full(m, np.nan)
        half = self.Lc / 2
        za = np.where(pa == 0, A["z"], pa * half)
        zb = np.where(pb == 0, B["z"], pb * half)
        # which closed cap each point lies on (0 if none)
        capa = np.where(pa != 0, pa, np.where(np.isclose(za, half), 1, np.where(np.isclose(za, -half), -1, 0)))
        capb = np.where(pb != 0, pb, np.where(np.isclose(zb, half), 1, np.where(np.isclose(zb, -half), -1, 0)))
        phia = np.where(pa == 0, np.pi / 2, A["phi"])
        phib = np.where(pb == 0, np.pi / 2, B["phi"])
        ua = self._unit(np.where(capa == 0, 1, capa), A["theta"], phia)
        ub = self._unit(np.where(capb == 0, 1, capb), B["theta"], phib)

        cyl = (pa == 0) & (pb == 0)
        out[cyl] = self._helix(za[cyl], A["theta"][cyl], zb[cyl], B["theta"][cyl])
        same = ~cyl & (capa != 0) & (capa == capb)
        out[same] = self._sphere(ua[same], ub[same])

        first, later = (129, 9) if fine else (33, 9)
        # one point strictly on a cap, the other on the cylinder
        mixed = np.isnan(out) & ((pa == 0) | (pb == 0))
        if np.any(mixed):
            idx = np.nonzero(mixed)[0]
            swap = pa[idx] == 0
            c = np.where(swap, pb[idx], pa[idx])
            u = np.where(swap[:, None], ub[idx], ua[idx])
            th_cap = np.where(swap, B["theta"][idx], A["theta"][idx])
            z_cyl = np.where(swap, za[idx], zb[idx])
            th_cyl = np.where(swap, A["theta"][idx], B["theta"][idx])
            delta = _wrap_angle(th_cyl - th_cap)

            def f(s):
                alpha = th_cap[:, None] + s[..., 0] * delta[:, None]
                seam = self._unit(0, alpha, np.pi / 2)
                return (self._sphere(u[:, None, :], seam)
                        + self._helix(c[:, None] * half, alpha, z_cyl[:, None], th_cyl[:, None]))

            out[idx] = _zoom_min(f, len(idx), 1, first, later)
        # opposite caps
        rest = np.isnan(out)
        if np.any(rest):
            idx = np.nonzero(rest)[0]
            swap = pa[idx] < 0
            u1 = np.where(swap[:, None], ub[idx], ua[idx])   # on the + cap
            u2 = np.where(swap[:, None], ua[idx], ub[idx])
            th1 = np.where(swap, B["theta"][idx], A["theta"][idx])
            th2 = np.where(swap, A["theta"][idx], B["theta"][idx])
            delta = _wrap_angle(th2 - th1)

            def g(s):
                al = th1[:, None] + s[..., 0] * delta[:, None]
                be = th1[:, None] + s[..., 1] * delta[:, None]
                return (self._sphere(u1[:, None, :], self._unit(0, al, np.pi / 2))
                        + self._helix(half, al, -half, be)
                        + self._sphere(self._unit(0, be, np.pi / 2), u2[:, None, :]))

            out[idx] = _zoom_min(g, len(idx), 2, 33 if fine else 17, later)
        return out

    def tip_to_tip(self):
        """Profile geodesic through the axis plane."""
        return self.Lc + math.pi * self.R


def _round_up(n, k):
    return int(k * math.ceil(n / k))


class _TubeMesh:
    """Index bookkeeping for the capsule mesh."""

    def __init__(self, ell, r, h):
        self.cap = Capsule(ell, r)
        R, Lc = self.cap.R, self.cap.Lc
        self.nth = max(_round_up(math.ceil(2 * math.pi * R / h - 1e-9), 4), 8)
        self.nt = max(_round_up(math.ceil(Lc / h - 1e-9), 8), 8)
        self.M = max(int(math.ceil(0.5 * math.pi * R / h - 1e-9)), 2)
        nth, nt, M = self.nth, self.nt, self.M
        self.n_cyl = (nt + 1) * nth
        self.n_ring = (M - 1) * nth
        self.base = {1: self.n_cyl, -1: self.n_cyl + self.n_ring + 1}
        self.tip = {c: self.base[c] + self.n_ring for c in (1, -1)}
        self.n = self.n_cyl + 2 * (self.n_ring + 1)

    def cyl(self, k, j):
        return k * self.nth + np.mod(j, self.nth)

    def ring(self, c, m, j):
        """Ring m of cap c (m = 0 is the seam, m = M the tip)."""
        if m == 0:
            return self.cyl(self.nt if c > 0 else 0, j)
        if m == self.M:
            return np.full(np.shape(j), self.tip[c]) if np.ndim(j) else self.tip[c]
        return self.base[c] + (m - 1) * self.nth + np.mod(j, self.nth)

    def vertex_data(self):
        nth, nt, M = self.nth, self.nt, self.M
        part = np.zeros(self.n, dtype=np.int64)
        z = np.zeros(self.n)
        theta = np.zeros(self.n)
        phi = np.full(self.n, np.pi / 2)
        col = np.zeros(self.n, dtype=np.int64)
        k, j = np.meshgrid(np.arange(nt + 1), np.arange(nth), indexing="ij")
        ids = self.cyl(k, j).ravel()
        # symmetric in k -> nt - k so that the central symmetry is exact
        z[ids] = ((k - nt // 2) * (self.cap.Lc / nt)).ravel()
        theta[ids] = (2 * np.pi / nth * j).ravel()
        col[ids] = j.ravel()
        for c in (1, -1):
            for m in range(1, M):
                jj = np.arange(nth)
                ids = self.ring(c, m, jj)
                part[ids] = c
                theta[ids] = 2 * np.pi / nth * jj
                phi[ids] = 0.5 * np.pi * (1.0 - m / M)
                col[ids] = jj
            part[self.tip[c]] = c
            phi[self.tip[c]] = 0.0
            col[self.tip[c]] = -1
        return {"part": part, "z": z, "theta": theta, "phi": phi, "col": col}

    def triangles(self):
        nth, nt, M = self.nth, self.nt, self.M
        tris = []
        j = np.arange(nth)
        for k in range(nt):
            a, b = self.cyl(k, j), self.cyl(k + 1, j)
            c, d = self.cyl(k + 1, j + 1), self.cyl(k, j + 1)
            # diagonal type flips at the middle: the central symmetry maps
            # quad k to quad nt-1-k, so the mesh is equivariant
            if k < nt // 2:
                tris += [np.stack([a, b, c], 1), np.stack([a, c, d], 1)]
            else:
                tris += [np.stack([a, b, d], 1), np.stack([b, c, d], 1)]
        for cs in (1, -1):
            for m in range(M - 1):
                a, b = self.ring(cs, m, j), self.ring(cs, m + 1, j)
                c, d = self.ring(cs, m + 1, j + 1), self.ring(cs, m, j + 1)
                tris += [np.stack([a, b, c], 1), np.stack([a, c, d], 1)]
            a, d = self.ring(cs, M - 1, j), self.ring(cs, M - 1, j + 1)
            tris.append(np.stack([a, d, np.full(nth, self.tip[cs])], 1))
        return np.vstack(tris)

    def central_symmetry(self):
        """Vertex permutation induced by the point reflection through the
        origin: (t, theta) -> (-t, theta + pi), caps swapped."""
        nth, nt, M = self.nth, self.nt, self.M
        g = np.empty(self.n, dtype=np.int64)
        k, j = np.meshgrid(np.arange(nt + 1), np.arange(nth), indexing="ij")
        g[self.cyl(k, j).ravel()] = self.cyl(nt - k, j + nth // 2).ravel()
        for c in (1, -1):
            for m in range(1, M):
                jj = np.arange(nth)
                g[self.ring(c, m, jj)] = self.ring(-c, m, jj + nth // 2)
            g[self.tip[c]] = self.tip[-c]
        return g


def _stencil_pairs(K: SimplicialComplex, n, hops):
    e = K.edges
    A = csr_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(n, n))
    A = ((A + A.T) > 0).astype(np.float64)
    reach, frontier = A.copy(), A.copy()
    for _ in range(hops - 1):
        frontier = ((frontier @ A) > 0).astype(np.float64)
        reach = ((reach + frontier) > 0).astype(np.float64)
    U = triu(reach, k=1).tocoo()
    return U.row, U.col


def _check_tube(ell, r, h):
    if min(ell, r, h) <= 0:
        raise ConfigError("ell, r and h must be positive")
    if r > ell / 10 * (1 + 1e-12):
        raise ConfigError(f"need r <= ell/10 (r={r}, ell={ell})")
    if r < 4 * h * (1 - 1e-9):
        raise ConfigError(f"resolution too coarse: r={r} < 4h={4 * h}")


def gen_sphere_tube(ell, r, h, hops=3, audit=True, with_action=False):
    """Boundary of the r-neighbourhood of a segment of length ell centred at
    the origin of H^3 (axis along the first Klein coordinate).

    The graph is the mesh edge graph plus every pair within ``hops`` mesh
    edges, weighted by the exact intrinsic distance; paths in it are
    genuine surface curves, so graph distances never undershoot.  With
    ``audit`` the graph is compared with the semi-analytic capsule distance
    on sampled pairs and the worst excess is stored as ``measured_error``.
    """
    _check_tube(ell, r, h)
    mesh = _TubeMesh(ell, r, h)
    data = mesh.vertex_data()
    cap = mesh.cap
    P = cap.hyperboloid(data["part"], data["z"], data["theta"], data["phi"])
    # seam vertices must coincide with the cap boundary circles
    for c, k in ((1, mesh.nt), (-1, 0)):
        ids = mesh.cyl(k, np.arange(mesh.nth))
        seam = cap.hyperboloid(np.full(mesh.nth, c), 0.0, data["theta"][ids], np.pi / 2)
        if np.max(np.abs(seam - P[ids])) > 1e-10:
            raise ConstructionError("cap and cylinder seam vertices do not match")
    tri = SimplicialComplex.from_triangles(mesh.triangles())
    check_closed_surface(tri)
    rows, cols = _stencil_pairs(tri, mesh.n, hops)
    pick = {k: data[k] for k in ("part", "z", "theta", "phi")}
    w = cap.distance({k: v[rows] for k, v in pick.items()},
                     {k: v[cols] for k, v in pick.items()})
    W = csr_matrix((w, (rows, cols)), shape=(mesh.n, mesh.n))
    W = W + W.T
    axis = GeodesicSubspace(HPoint.origin(3), (np.array([1.0, 0, 0]),))
    t, _, _ = fermi_from_hyperboloid(P, axis)
    reps = np.nonzero(data["col"] <= 0)[0]
    coords = {"t": t, "s": np.clip(t + ell / 2, 0.0, ell), **data}
    S = SampledSurface(
        f"sphere_tube(ell={ell:g},r={r:g})", hyperboloid_to_klein(P), tri,
        metric_kind="graph-approx", error_budget=3 * h, graph=W,
        action=[mesh.central_symmetry()] if with_action else None,
        hpoints=P, coords=coords, representatives=reps, h=h)
    S.capsule = cap
    S.mesh_shape = (mesh.nt, mesh.nth, mesh.M)
    if audit:
        S.measured_error = audit_tube_metric(S)
        if S.measured_error > S.error_budget:
            raise ConstructionError(
                f"graph metric error {S.measured_error:.4g} exceeds budget {S.error_budget:.4g}")
    return S


def capsule_oracle(S, i, j, fine=True):
    """Semi-analytic intrinsic distance between vertex arrays i and j."""
    c = S.coords
    pick = lambda idx: {k: np.asarray(c[k])[idx] for k in ("part", "z", "theta", "phi")}
    return S.capsule.distance(pick(np.asarray(i)), pick(np.asarray(j)), fine=fine)


def audit_tube_metric(S, n_sources=12, seed=0):
    """Max of (graph - capsule) over rows from sampled representatives.
    Raises if the graph undershoots the oracle anywhere."""
    rng = np.random.default_rng(seed)
    reps = S.representatives
    src = np.unique(np.concatenate([reps[[0, -1]], rng.choice(reps, min(n_sources, len(reps)), replace=False)]))
    worst = 0.0
    for s in src:
        row = S.distances_from([s])[0]
        tgt = np.arange(S.n)
        exact = capsule_oracle(S, np.full(S.n, s), tgt)
        gap = row - exact
        if gap.min() < -1e-7:
            raise ConstructionError(f"graph distance undershoots the intrinsic metric by {-gap.min():.3g}")
        worst = max(worst, float(gap.max()))
    return worst


def gen_rp2_tube(ell, r, h, hops=3, audit=True):
    """Quotient of the sphere tube by the central symmetry (a projective
    plane).  The double cover with its involution is kept in ``cover``."""
    cover = gen_sphere_tube(ell, r, h, hops=hops, audit=audit, with_action=True)
    S = quotient_by_group(cover)
    S.label = f"rp2_tube(ell={ell:g},r={r:g})"
    S.capsule = cover.capsule
    S.measured_error = cover.measured_error
    # the quotient projection t -> |t| needs the cover coordinate of the
    # chosen lift; |t| is the same for both lifts
    S.coords["s"] = ell / 2 - np.abs(np.clip(S.coords["t"], -ell / 2, ell / 2))
    return S
