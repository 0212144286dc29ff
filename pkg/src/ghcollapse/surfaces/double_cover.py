"""Double of a convex hyperbolic polygon: two copies glued along the boundary."""
from __future__ import annotations

import math

import numpy as np
from scipy.optimize import minimize

from ..complexes import SimplicialComplex
from ..hyperbolic import (GeodesicSubspace, HPoint, geodesic_point, hyp_distance,
                          hyperboloid_distance, klein_to_hyperboloid, project_hyperboloid)
from .base import ConfigError, SampledSurface, check_closed_surface


def _as_klein(v):
    if isinstance(v, HPoint):
        return np.array(v.klein)
    return np.asarray(v, dtype=float).reshape(-1)


def _check_convex(K):
    n = len(K)
    if n < 3:
        raise ConfigError("a polygon needs at least 3 vertices")
    if K.shape[1] != 2:
        raise ConfigError("polygon vertices must lie in H^2")
    e = np.roll(K, -1, axis=0) - K
    cross = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
    if not (np.all(cross > 1e-12) or np.all(cross < -1e-12)):
        raise ConfigError("polygon vertices are not in strictly convex position")


def distance_to_boundary(x, corners):
    """Hyperbolic distance from hyperboloid points x (..., 3) to the polygon
    boundary given by Klein-chart corners."""
    x = np.asarray(x, dtype=float)
    best = np.full(x.shape[:-1], np.inf)
    n = len(corners)
    for i in range(n):
        a, b = corners[i], corners[(i + 1) % n]
        A, B = klein_to_hyperboloid(a), klein_to_hyperboloid(b)
        line = GeodesicSubspace(HPoint(a), (b - a,))
        F = project_hyperboloid(x, line)
        dab = hyperboloid_distance(A, B)
        on_seg = np.abs(hyperboloid_distance(A, F) + hyperboloid_distance(F, B) - dab) < 1e-9
        d = np.where(on_seg, hyperboloid_distance(x, F),
                     np.minimum(hyperboloid_distance(x, A), hyperboloid_distance(x, B)))
        best = np.minimum(best, d)
    return best


def hyperbolic_incenter(corners):
    """Centre of a largest inscribed disc (Klein chart) and its radius."""
    corners = np.asarray(corners, dtype=float)

    def neg(k):
        if k @ k >= 1 - 1e-9:
            return 1e3
        # outside the polygon the boundary distance is not the inradius
        e = np.roll(corners, -1, axis=0) - corners
        rel = k - corners
        side = e[:, 0] * rel[:, 1] - e[:, 1] * rel[:, 0]
        orient = np.sign(np.sum(e[:, 0] * np.roll(e, -1, 0)[:, 1] - e[:, 1] * np.roll(e, -1, 0)[:, 0]))
        if np.any(side * orient < 0):
            return 1e3
        return -float(distance_to_boundary(klein_to_hyperboloid(k), corners))

    res = minimize(neg, corners.mean(axis=0), method="Nelder-Mead",
                   options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 4000})
    return res.x, -res.fun


def gen_double_cover(polygon, h):
    """Two triangulated copies of a convex polygon in H^2 glued along their
    boundary, a topological sphere.

    Both copies share the boundary vertices.  Inside one copy the distance is
    the hyperbolic one (the polygon is convex); between copies it is the
    minimum over boundary vertices of the broken path, which differs from the
    true doubled metric by at most the boundary spacing.
    """
    K = np.array([_as_klein(v) for v in polygon])
    _check_convex(K)
    if h <= 0:
        raise ConfigError("h must be positive")
    c, inradius = hyperbolic_incenter(K)
    C = HPoint(c)
    # boundary samples, each edge split into pieces of length <= h
    bnd = []
    for i in range(len(K)):
        a, b = HPoint(K[i]), HPoint(K[(i + 1) % len(K)])
        m = max(int(math.ceil(hyp_distance(a, b) / h - 1e-9)), 1)
        bnd += [geodesic_point(a, b, s / m).klein for s in range(m)]
    bnd = np.array(bnd)
    M = len(bnd)
    radius = max(hyp_distance(C, HPoint(b)) for b in bnd)
    nk = max(int(math.ceil(radius / h - 1e-9)), 2)
    rings = np.array([[geodesic_point(C, HPoint(b), k / nk).klein for b in bnd]
                      for k in range(1, nk)])          # (nk-1, M, 2)
    # layout: boundary, then per copy the centre and the inner rings
    n_copy = 1 + (nk - 1) * M
    n = M + 2 * n_copy
    pts = np.zeros((n, 2))
    copy = np.zeros(n, dtype=np.int64)
    pts[:M] = bnd
    for s in (0, 1):
        off = M + s * n_copy
        pts[off] = c
        pts[off + 1: off + n_copy] = rings.reshape(-1, 2)
        copy[off: off + n_copy] = s + 1

    def vid(s, k, j):
        j = np.mod(j, M)
        if k == nk:
            return j
        return M + s * n_copy + 1 + (k - 1) * M + j

    tris = []
    j = np.arange(M)
    for s in (0, 1):
        centre = M + s * n_copy
        tris.append(np.stack([np.full(M, centre), vid(s, 1, j), vid(s, 1, j + 1)], 1))
        for k in range(1, nk):
            a, b = vid(s, k, j), vid(s, k + 1, j)
            cc, d = vid(s, k + 1, j + 1), vid(s, k, j + 1)
            tris += [np.stack([a, b, cc], 1), np.stack([a, cc, d], 1)]
    tri = SimplicialComplex.from_triangles(np.vstack(tris))
    check_closed_surface(tri)

    H = klein_to_hyperboloid(pts)
    D = hyperboloid_distance(H[:, None, :], H[None, :, :])
    A = np.nonzero(copy == 1)[0]
    B = np.nonzero(copy == 2)[0]
    cross = np.full((len(A), len(B)), np.inf)
    for b in range(M):
        cross = np.minimum(cross, D[A, b][:, None] + D[b, B][None, :])
    D[np.ix_(A, B)] = cross
    D[np.ix_(B, A)] = cross.T
    spacing = float(np.max(hyperboloid_distance(H[:M], np.roll(H[:M], -1, axis=0))))
    S = SampledSurface(
        f"double_cover({len(K)}-gon)", pts, tri, metric_kind="graph-approx",
        error_budget=spacing, dense=D, hpoints=H,
        coords={"copy": copy}, h=h)
    S.incenter = c
    S.inradius = inradius
    S.centres = (M, M + n_copy)
    return S
