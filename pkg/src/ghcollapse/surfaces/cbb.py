"""Spot checks of the curvature >= -1 comparison condition on sampled surfaces.

For a hinge at x with y on one discrete shortest path from x and z on
another, the comparison angle lambda(a, b) at x of the curvature -1
triangle with sides a = d(x, y), b = d(x, z), c = d(y, z) must not increase
as y and z move outward along their paths.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from ..complexes import SimplicialComplex
from ..hyperbolic import comparison_angle
from .base import SampledSurface
from .tubes import _stencil_pairs


@dataclass
class CBBReport:
    status: str                      # "pass", "fail" or "inconclusive"
    hinges: int
    checks: int
    violation_fraction: float
    tolerance: float
    scales: tuple
    violations: list = field(default_factory=list)


def _path_graph(S: SampledSurface, hops):
    if S.graph is not None:
        return S.graph
    rows, cols = _stencil_pairs(S.tri, S.n, hops)
    w = S.dist[rows, cols]
    W = csr_matrix((w, (rows, cols)), shape=(S.n, S.n))
    return W + W.T


def _walk(pred, dist, x, target, scales):
    """Vertices on the tree path x -> target first reaching each scale."""
    path = [target]
    while path[-1] != x:
        p = pred[path[-1]]
        if p < 0:
            return None
        path.append(p)
    path = path[::-1]
    lengths = dist[path]
    out = []
    for s in scales:
        k = int(np.searchsorted(lengths, s))
        if k >= len(path):
            return None
        out.append((path[k], float(lengths[k])))
    return out


def cbb_spotcheck(S: SampledSurface, trials: int, scales=None, seed=0, hops=3) -> CBBReport:
    """Sample hinges and test monotonicity of the comparison angle.

    The tolerance is 5 * budget / min(scales), where the budget is the larger
    of the surface's measured metric error (its declared budget when nothing
    was measured) and the worst path defect (path length minus distance) of
    the sampled points.  Fewer than trials/4 usable hinges is inconclusive.
    """
    rng = np.random.default_rng(seed)
    h = S.h if S.h else float(np.min(S.dist[S.dist > 0]))
    if scales is None:
        scales = (10 * h, 15 * h, 20 * h)
    scales = tuple(sorted(float(s) for s in scales))
    G = _path_graph(S, hops)
    budget = S.measured_error if S.measured_error is not None else S.error_budget
    hinges, checks = 0, 0
    violations = []
    worst_defect = 0.0
    records = []
    for _ in range(trials):
        x = int(rng.integers(S.n))
        dist, pred = dijkstra(G, directed=False, indices=x, return_predecessors=True)
        far = np.nonzero(dist > scales[-1] * 1.05)[0]
        if len(far) < 2:
            continue
        y_end, z_end = rng.choice(far, 2, replace=False)
        wy = _walk(pred, dist, x, int(y_end), scales)
        wz = _walk(pred, dist, x, int(z_end), scales)
        if wy is None or wz is None:
            continue
        ys = [v for v, _ in wy]
        zs = [v for v, _ in wz]
        row_x = S.distances_from([x])[0]
        a = row_x[ys]
        b = row_x[zs]
        worst_defect = max(worst_defect, max(l - d for (_, l), d in zip(wy + wz, np.concatenate([a, b]))))
        C = S.distances_from(ys)[:, zs]
        lam = np.full((len(scales), len(scales)), np.nan)
        ok = True
        for i in range(len(scales)):
            for j in range(len(scales)):
                try:
                    lam[i, j] = comparison_angle(a[i], b[j], C[i, j], tol=max(budget, 1e-9) * 2)
                except ValueError:
                    ok = False
        if not ok:
            continue
        hinges += 1
        records.append((x, ys, zs, lam))
    tol = 5.0 * max(budget, worst_defect) / scales[0]
    for x, ys, zs, lam in records:
        k = len(scales)
        for i in range(k):
            for j in range(k):
                for di, dj in ((1, 0), (0, 1)):
                    if i + di < k and j + dj < k:
                        checks += 1
                        inc = lam[i + di, j + dj] - lam[i, j]
                        if inc > tol:
                            violations.append({"x": x, "y": ys[i + di], "z": zs[j + dj],
                                               "increase": float(inc)})
    if hinges < max(1, trials // 4):
        status = "inconclusive"
    else:
        status = "fail" if violations else "pass"
    frac = len(violations) / checks if checks else 0.0
    return CBBReport(status, hinges, checks, frac, tol, scales, violations)


def saddle_cone(angle=3 * math.pi, radius=1.0, h=0.05):
    """Flat cone of total angle ``angle`` > 2 pi (a saddle point at the apex),
    sampled on a polar grid with its exact metric.  Negative control for
    :func:`cbb_spotcheck`."""
    nk = max(int(math.ceil(radius / h)), 2)
    nphi = max(int(math.ceil(angle * radius / h)), 8)
    rho = np.concatenate([[0.0], np.repeat(np.arange(1, nk + 1) * (radius / nk), nphi)])
    phi = np.concatenate([[0.0], np.tile(np.arange(nphi) * (angle / nphi), nk)])

    def vid(k, j):
        return 1 + (k - 1) * nphi + np.mod(j, nphi)

    j = np.arange(nphi)
    tris = [np.stack([np.zeros(nphi, dtype=np.int64), vid(1, j), vid(1, j + 1)], 1)]
    for k in range(1, nk):
        a, b, c, d = vid(k, j), vid(k + 1, j), vid(k + 1, j + 1), vid(k, j + 1)
        tris += [np.stack([a, b, c], 1), np.stack([a, c, d], 1)]
    tri = SimplicialComplex.from_triangles(np.vstack(tris))
    dphi = np.abs(phi[:, None] - phi[None, :])
    dphi = np.minimum(dphi, angle - dphi)
    r1, r2 = rho[:, None], rho[None, :]
    D = np.where(dphi < math.pi,
                 np.sqrt(np.maximum(r1 * r1 + r2 * r2 - 2 * r1 * r2 * np.cos(dphi), 0.0)),
                 r1 + r2)
    np.fill_diagonal(D, 0.0)
    pts = np.column_stack([rho * np.cos(phi), rho * np.sin(phi)])
    return SampledSurface(f"saddle_cone(angle={angle:.4g})", pts, tri, metric_kind="exact",
                          dense=D, coords={"rho": rho, "phi": phi}, h=h)
