"""Finite samples of surfaces with their intrinsic metrics."""
from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix, coo_matrix
from scipy.sparse.csgraph import dijkstra

from ..complexes import SimplicialComplex

# dense matrices are materialised up to this many vertices
DENSE_LIMIT = 6000


class ConfigError(ValueError):
    """Invalid generator parameters (resolution, shape, ...)."""


class ConstructionError(RuntimeError):
    """A generated object failed one of its structural invariants."""


class DataError(ValueError):
    """Supplied data is inconsistent (e.g. a non-isometric permutation)."""


FAMILIES = ("sphere_tube", "rp2_tube", "flat_torus", "flat_klein_circle",
            "flat_klein_segment", "double_cover", "no_collapse", "point_collapse")


@dataclass(frozen=True)
class FamilySpec:
    family: str
    params: dict = field(default_factory=dict)
    h: float | None = None
    schedule: tuple = ()

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown family {self.family!r}")
        for key in ("r", "w", "L", "ell"):
            val = self.params.get(key)
            if val is not None and val <= 0:
                raise ConfigError(f"{key} must be positive")
        if self.h is not None and self.h <= 0:
            raise ConfigError("resolution h must be positive")
        s = list(self.schedule)
        if any(b >= a for a, b in zip(s, s[1:])):
            raise ConfigError("collapse schedule must be strictly decreasing")


class SampledSurface:
    """A finite sample of a surface: intrinsic distances plus a triangulation.

    The metric comes from one of two backends:

    ``dense``  an explicit symmetric matrix (exact closed-form metrics),
    ``graph``  a weighted sparse graph whose shortest-path metric is the
               surface metric; rows are computed per source and memoised.

    Quotients keep a reference to their cover in ``cover``.

    ``representatives`` optionally lists vertices whose distance rows cover
    every pair up to an isometry that also preserves the family's natural
    projection; sup-type audits use only those rows.
    """

    def __init__(self, label, points, tri, metric_kind="exact", error_budget=0.0,
                 dense=None, graph=None, action=None, hpoints=None, coords=None,
                 representatives=None, h=None):
        self.label = label
        self.points = np.asarray(points, dtype=float)
        self.tri = tri
        self.metric_kind = metric_kind
        self.error_budget = float(error_budget)
        self.h = h
        self.action = None if action is None else [np.asarray(g, dtype=np.int64) for g in action]
        self.hpoints = hpoints
        self.coords = dict(coords or {})
        self.representatives = (None if representatives is None
                                else np.asarray(representatives, dtype=np.int64))
        self.measured_error = None
        self.cover = None
        self.orbits = None
        self._dense = None if dense is None else np.asarray(dense, dtype=float)
        self._graph = None if graph is None else csr_matrix(graph)
        self._rows = {}
        self._lock = threading.Lock()
        if self._dense is None and self._graph is None:
            raise ConstructionError("surface needs a dense matrix or a graph")
        if metric_kind not in ("exact", "graph-approx"):
            raise ConfigError(f"unknown metric kind {metric_kind!r}")

    def __repr__(self):
        return f"SampledSurface({self.label!r}, n={self.n}, {self.metric_kind})"

    @property
    def n(self):
        return len(self.points)

    @property
    def has_dense(self):
        return self._dense is not None

    @property
    def graph(self):
        return self._graph

    @property
    def dist(self):
        """Full distance matrix (materialised on first use)."""
        if self._dense is None:
            if self.n > DENSE_LIMIT:
                raise MemoryError(f"{self.n} vertices exceeds the dense limit {DENSE_LIMIT}")
            self._dense = self.distances_from(np.arange(self.n))
        return self._dense

    def distances_from(self, sources):
        sources = np.atleast_1d(np.asarray(sources, dtype=np.int64))
        if self._dense is not None:
            return self._dense[sources]
        missing = [int(s) for s in np.unique(sources) if int(s) not in self._rows]
        if missing:
            rows = dijkstra(self._graph, directed=False, indices=missing)
            with self._lock:
                for s, row in zip(missing, np.atleast_2d(rows)):
                    self._rows[s] = row
        return np.vstack([self._rows[int(s)] for s in sources])

    def distance(self, i, j):
        return float(self.distances_from([i])[0, j])

    def seeded_distances(self, seed):
        """min over q of d(p, q) + seed[q], for every vertex p."""
        seed = np.asarray(seed, dtype=float)
        if self._dense is not None:
            return np.min(self._dense + seed[None, :], axis=1)
        # virtual source joined to every vertex with weight seed[q]
        n = self.n
        offset = seed.min()
        g = coo_matrix(self._graph)
        rows = np.concatenate([g.row, np.full(n, n)])
        cols = np.concatenate([g.col, np.arange(n)])
        vals = np.concatenate([g.data, seed - offset + 1e-300])
        aug = csr_matrix((vals, (rows, cols)), shape=(n + 1, n + 1))
        out = dijkstra(aug, directed=True, indices=n)
        return out[:n] + offset

    def sup_rows(self, max_dense=DENSE_LIMIT):
        """Sources whose rows suffice for sup-over-pairs audits."""
        if self.representatives is not None:
            return self.representatives
        if self.n <= max_dense:
            return np.arange(self.n)
        raise MemoryError("no representatives for a large surface")

    def diameter(self):
        return float(np.max(self.distances_from(self.sup_rows())))

    def to_json(self):
        """Debug dump; distances are recomputed by the generators."""
        doc = {
            "label": self.label,
            "metric_kind": self.metric_kind,
            "error_budget": self.error_budget,
            "points": np.round(self.points, 12).tolist(),
            "triangles": self.tri.triangles.tolist(),
            "group": None if self.action is None else [g.tolist() for g in self.action],
        }
        return json.dumps(doc, sort_keys=True)


def scaled(S: SampledSurface, c: float) -> SampledSurface:
    """Same mesh with every distance multiplied by c > 0."""
    if c <= 0:
        raise ConfigError("scale factor must be positive")
    out = SampledSurface(
        f"{S.label}*{c:g}", S.points, S.tri, metric_kind=S.metric_kind,
        error_budget=S.error_budget * c,
        dense=None if not S.has_dense else S.dist * c,
        graph=None if S.has_dense else S.graph * c,
        action=S.action, hpoints=S.hpoints, coords=S.coords,
        representatives=S.representatives, h=None if S.h is None else S.h * c)
    if S.measured_error is not None:
        out.measured_error = S.measured_error * c
    return out


def load_surface_dump(text):
    doc = json.loads(text)
    missing = {"label", "metric_kind", "error_budget", "points", "triangles"} - set(doc)
    if missing:
        raise DataError(f"surface dump lacks fields {sorted(missing)}")
    return doc


# ---------------------------------------------------------------------------
# structural checks


def check_closed_surface(K: SimplicialComplex):
    """Raise ConstructionError unless K triangulates a closed surface."""
    t = K.triangles
    if len(t) == 0:
        raise ConstructionError("no triangles")
    faces = np.vstack([t[:, [0, 1]], t[:, [0, 2]], t[:, [1, 2]]])
    _, counts = np.unique(faces, axis=0, return_counts=True)
    if len(counts) != len(K.edges) or np.any(counts != 2):
        raise ConstructionError("some edge is not in exactly two triangles")
    # vertex links: the opposite edges of the star must form a single cycle
    link = {int(v): [] for v in K.vertices}
    for a, b, c in t.tolist():
        link[a].append((b, c))
        link[b].append((a, c))
        link[c].append((a, b))
    for v, edges in link.items():
        if not edges:
            raise ConstructionError(f"isolated vertex {v}")
        adj = {}
        for x, y in edges:
            adj.setdefault(x, []).append(y)
            adj.setdefault(y, []).append(x)
        if any(len(nb) != 2 for nb in adj.values()):
            raise ConstructionError(f"link of vertex {v} is not a cycle")
        start = edges[0][0]
        prev, cur, steps = None, start, 0
        while True:
            nxt = adj[cur][0] if adj[cur][0] != prev else adj[cur][1]
            prev, cur = cur, nxt
            steps += 1
            if cur == start:
                break
        if steps != len(adj):
            raise ConstructionError(f"link of vertex {v} is disconnected")


def check_metric(D, tol=1e-9, sample=None, rng=None):
    """Symmetry, zero diagonal and triangle inequality of a dense matrix.
    Returns the worst triangle slack found."""
    D = np.asarray(D, dtype=float)
    if not np.allclose(D, D.T, atol=tol):
        raise DataError("distance matrix is not symmetric")
    if np.any(np.abs(np.diag(D)) > tol):
        raise DataError("distance matrix has a nonzero diagonal")
    n = len(D)
    if sample is None and n <= 200:
        worst = np.inf
        for k in range(n):
            slack = D[:, k][:, None] + D[k, :][None, :] - D
            worst = min(worst, float(slack.min()))
    else:
        rng = np.random.default_rng(0) if rng is None else rng
        m = sample or 100_000
        i, j, k = rng.integers(0, n, size=(3, m))
        worst = float(np.min(D[i, k] + D[k, j] - D[i, j]))
    if worst < -tol:
        raise DataError(f"triangle inequality violated by {-worst:g}")
    return worst


def permutation_is_automorphism(K: SimplicialComplex, g):
    g = np.asarray(g)
    img = np.sort(g[K.triangles], axis=1)
    a = {tuple(r) for r in K.triangles.tolist()}
    return all(tuple(r) in a for r in img.tolist())


# ---------------------------------------------------------------------------
# quotients


def _group_closure(perms, n):
    ident = np.arange(n)
    elems = {tuple(ident): ident}
    frontier = [ident]
    while frontier:
        new = []
        for e in frontier:
            for g in perms:
                c = g[e]
                key = tuple(c)
                if key not in elems:
                    elems[key] = c
                    new.append(c)
        frontier = new
        if len(elems) > 10_000:
            raise DataError("group generated by the action is too large")
    return list(elems.values())


def quotient_by_group(S: SampledSurface, check_closed=True, tol=1e-9) -> SampledSurface:
    """Quotient of S by its finite group action.

    Orbit distances are min over g of d(x, g y); for graph metrics the orbit
    graph with min-over-lifts weights is used, whose shortest-path metric is
    the same quantity because a free isometric action makes the quotient map
    a covering of weighted graphs.
    """
    if not S.action:
        raise DataError("surface has no group action")
    n = S.n
    group = _group_closure(S.action, n)
    for g in group:
        if sorted(g.tolist()) != list(range(n)):
            raise DataError("action entry is not a permutation")
    # isometry check: dense exactly, graph via edge weights (an automorphism
    # of the weighted graph is an isometry of its path metric)
    for g in S.action:
        if S.has_dense:
            D = S.dist
            if np.max(np.abs(D[np.ix_(g, g)] - D)) > tol:
                raise DataError("permutation is not an isometry")
        else:
            G = S.graph.tocoo()
            W = S.graph
            moved = np.asarray(W[g[G.row], g[G.col]]).reshape(-1)
            if np.max(np.abs(moved - G.data)) > tol:
                raise DataError("permutation is not an isometry of the graph metric")
        if not permutation_is_automorphism(S.tri, g):
            raise ConstructionError("permutation is not a simplicial automorphism")
    # orbits, labelled by smallest member
    stack = np.vstack(group)
    rep = stack.min(axis=0)
    labels, orbit_of = np.unique(rep, return_inverse=True)
    m = len(labels)
    for g in group[1:]:
        if np.any(g == np.arange(n)):
            raise ConstructionError("action has a fixed vertex (not free)")
    # simplicial freeness: no simplex may contain two points of one orbit, and
    # distinct simplices must have distinct images unless related by the group
    K = S.tri
    for simp in (K.edges, K.triangles):
        img = orbit_of[simp]
        if np.any(np.sort(img, axis=1)[:, 1:] == np.sort(img, axis=1)[:, :-1]):
            raise ConstructionError("a simplex meets an orbit twice (action not simplicially free)")
        uniq, cnt = np.unique(np.sort(img, axis=1), axis=0, return_counts=True)
        if np.any(cnt != len(group)):
            raise ConstructionError("orbit complex is not a simplicial complex")
    tri = SimplicialComplex(np.arange(m), orbit_of[K.edges], orbit_of[K.triangles])
    if check_closed:
        check_closed_surface(tri)
    first = np.array([np.nonzero(orbit_of == k)[0][0] for k in range(m)])
    members = [np.nonzero(orbit_of == k)[0] for k in range(m)]
    kwargs = dict(
        label=f"{S.label}/G",
        points=S.points[first],
        tri=tri,
        metric_kind=S.metric_kind,
        error_budget=S.error_budget,
        hpoints=None if S.hpoints is None else S.hpoints[first],
        coords={k: np.asarray(v)[first] for k, v in S.coords.items()},
        representatives=(None if S.representatives is None
                         else np.unique(orbit_of[S.representatives])),
        h=S.h,
    )
    if S.has_dense:
        D = S.dist
        Q = np.full((m, m), np.inf)
        for g in group:
            Q = np.minimum(Q, D[np.ix_(first, g[first])])
        Q = np.minimum(Q, Q.T)
        check_metric(Q, tol=max(tol, 1e-9), sample=None if m <= 200 else 100_000)
        out = SampledSurface(dense=Q, **kwargs)
    else:
        G = S.graph.tocoo()
        a, b = orbit_of[G.row], orbit_of[G.col]
        keep = a != b
        # duplicates must collapse to the minimum weight, not the sum
        W = _min_duplicates(a[keep], b[keep], G.data[keep], m)
        out = SampledSurface(graph=W, **kwargs)
    out.cover = S
    out.orbits = members
    out.orbit_of = orbit_of
    return out


def _min_duplicates(rows, cols, vals, m):
    key = rows * m + cols
    order = np.lexsort((vals, key))
    key, vals = key[order], vals[order]
    first = np.ones(len(key), dtype=bool)
    first[1:] = key[1:] != key[:-1]
    k = key[first]
    return csr_matrix((vals[first], (k // m, k % m)), shape=(m, m))
