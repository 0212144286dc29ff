"""Simplicial complexes of dimension <= 2 and their homology over F_p.

Simplices are labelled by integer vertex ids (usually vertex indices of a
surface mesh), so subcomplexes of a mesh share labels with the mesh and
inclusions are checked by label.

Two linear-algebra routes live here:

* a sparse column reduction (dict columns, pivot on the lowest row) used for
  everything at mesh scale, and
* dense modular Gaussian elimination (``rank_mod_p``, ``nullspace_mod_p``)
  used for small complexes, the cohomology side of the duality check and as
  a cross-check of the sparse route.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class ComplexError(ValueError):
    pass


def is_prime(p):
    p = int(p)
    if p < 2:
        return False
    if p < 4:
        return True
    if p % 2 == 0:
        return False
    f = 3
    while f * f <= p:
        if p % f == 0:
            return False
        f += 2
    return True


def _check_prime(p):
    if not is_prime(p) or p > 2**31:
        raise ValueError(f"{p} is not a prime <= 2^31")


def _as_rows(arr, width):
    a = np.asarray(arr, dtype=np.int64).reshape(-1, width)
    a = np.sort(a, axis=1)
    if len(a):
        a = np.unique(a, axis=0)
    return a


@dataclass(frozen=True, eq=False)
class SimplicialComplex:
    """Vertices, edges and triangles in canonical sorted order."""

    vertices: np.ndarray
    edges: np.ndarray
    triangles: np.ndarray

    def __post_init__(self):
        v = np.unique(np.asarray(self.vertices, dtype=np.int64).reshape(-1))
        e = _as_rows(self.edges, 2)
        t = _as_rows(self.triangles, 3)
        for arr in (v, e, t):
            arr.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "edges", e)
        object.__setattr__(self, "triangles", t)
        if len(e) and np.any(e[:, 0] == e[:, 1]):
            raise ComplexError("degenerate edge")
        if len(t) and np.any((t[:, 0] == t[:, 1]) | (t[:, 1] == t[:, 2])):
            raise ComplexError("degenerate triangle")
        if len(e) and not np.all(np.isin(e, v)):
            raise ComplexError("edge with a vertex outside the vertex set")
        if len(t):
            faces = np.vstack([t[:, [0, 1]], t[:, [0, 2]], t[:, [1, 2]]])
            if not np.all(_member(faces, e)):
                raise ComplexError("triangle whose edge is missing (not face-closed)")

    @classmethod
    def from_triangles(cls, triangles, vertices=None):
        t = _as_rows(triangles, 3)
        e = np.vstack([t[:, [0, 1]], t[:, [0, 2]], t[:, [1, 2]]]) if len(t) else np.zeros((0, 2))
        v = t.reshape(-1) if vertices is None else np.concatenate([t.reshape(-1), np.asarray(vertices).reshape(-1)])
        return cls(v, e, t)

    @classmethod
    def from_simplices(cls, simplices):
        """Face closure of a list of vertex tuples."""
        vs, es, ts = set(), set(), set()
        for s in simplices:
            s = tuple(sorted(int(x) for x in s))
            if len(s) == 3:
                ts.add(s)
                es.update([(s[0], s[1]), (s[0], s[2]), (s[1], s[2])])
            elif len(s) == 2:
                es.add(s)
            elif len(s) != 1:
                raise ComplexError(f"unsupported simplex {s}")
            vs.update(s)
        return cls(sorted(vs), sorted(es) or np.zeros((0, 2)), sorted(ts) or np.zeros((0, 3)))

    @property
    def counts(self):
        return len(self.vertices), len(self.edges), len(self.triangles)

    @property
    def euler_characteristic(self):
        nv, ne, nt = self.counts
        return nv - ne + nt

    def __len__(self):
        return sum(self.counts)

    def is_subcomplex_of(self, other: "SimplicialComplex") -> bool:
        return (bool(np.all(np.isin(self.vertices, other.vertices)))
                and bool(np.all(_member(self.edges, other.edges)))
                and bool(np.all(_member(self.triangles, other.triangles))))

    def induced(self, vertex_subset) -> "SimplicialComplex":
        """Full subcomplex on ``vertex_subset``."""
        keep = np.unique(np.asarray(vertex_subset, dtype=np.int64).reshape(-1))
        keep = keep[np.isin(keep, self.vertices)]
        e = self.edges[np.all(np.isin(self.edges, keep), axis=1)] if len(self.edges) else self.edges
        t = self.triangles[np.all(np.isin(self.triangles, keep), axis=1)] if len(self.triangles) else self.triangles
        return SimplicialComplex(keep, e, t)

    def relabel(self, mapping) -> "SimplicialComplex":
        m = np.asarray(mapping, dtype=np.int64)
        return SimplicialComplex(m[self.vertices], m[self.edges], m[self.triangles])


def _keys(rows):
    rows = np.asarray(rows, dtype=np.int64)
    if rows.ndim == 1 or rows.shape[1] == 1:
        return rows.reshape(-1)
    # labels stay below 2^20 at desk scale, so three 21-bit fields fit
    key = np.zeros(len(rows), dtype=np.int64)
    for j in range(rows.shape[1]):
        key = key * (1 << 21) + rows[:, j]
    return key


def _member(rows, table):
    if len(rows) == 0:
        return np.zeros(0, dtype=bool)
    if len(table) == 0:
        return np.zeros(len(rows), dtype=bool)
    return np.isin(_keys(rows), _keys(table))


def _index_of(rows, table):
    keys = _keys(table)
    order = np.argsort(keys)
    pos = np.searchsorted(keys[order], _keys(rows))
    return order[pos]


def boundary_columns(K: SimplicialComplex, a: int, p: int):
    """Columns of the boundary map C_a -> C_{a-1} as ``{row: coeff}`` dicts,
    rows indexed by position in the canonical (a-1)-simplex list."""
    if a == 1:
        if len(K.edges) == 0:
            return []
        idx = _index_of(K.edges.reshape(-1), K.vertices).reshape(-1, 2)
        return [{int(j): 1, int(i): p - 1} for i, j in idx]
    if a == 2:
        t = K.triangles
        if len(t) == 0:
            return []
        bc = _index_of(t[:, [1, 2]], K.edges)
        ac = _index_of(t[:, [0, 2]], K.edges)
        ab = _index_of(t[:, [0, 1]], K.edges)
        return [{int(x): 1, int(y): p - 1, int(z): 1} for x, y, z in zip(bc, ac, ab)]
    if a == 0:
        return [dict() for _ in range(len(K.vertices))]
    return []


def boundary_matrix(K: SimplicialComplex, a: int, p: int) -> np.ndarray:
    rows = [len(K.vertices), len(K.edges)][a - 1] if a in (1, 2) else 0
    cols = boundary_columns(K, a, p)
    M = np.zeros((rows, len(cols)), dtype=np.int64)
    for j, c in enumerate(cols):
        for i, v in c.items():
            M[i, j] = v % p
    return M


# ---------------------------------------------------------------------------
# sparse column reduction


def _low(col):
    return max(col) if col else -1


def _axpy(target, src, factor, p):
    """target -= factor * src (mod p), in place."""
    for i, v in src.items():
        nv = (target.get(i, 0) - factor * v) % p
        if nv:
            target[i] = nv
        else:
            target.pop(i, None)


class Reduction:
    """Column reduction of one boundary matrix over F_p.

    Keeps the reduced columns keyed by their lowest nonzero row (``pivots``)
    and, if requested, the combination of original columns that produced each
    reduced column (``V``), which is how cycle representatives are read off.
    """

    def __init__(self, columns, p, track=False, skip=()):
        self.p = p
        self.pivots = {}
        self.zero_columns = []
        self.V = {} if track else None
        skip = set(skip)
        for j, col in enumerate(columns):
            if j in skip:
                continue
            col = dict(col)
            v = {j: 1} if track else None
            while col:
                low = _low(col)
                piv = self.pivots.get(low)
                if piv is None:
                    break
                pj, pcol = piv
                factor = col[low] * pow(pcol[low], p - 2, p) % p
                _axpy(col, pcol, factor, p)
                if track:
                    _axpy(v, self.V[pj], factor, p)
            if col:
                self.pivots[_low(col)] = (j, col)
            else:
                self.zero_columns.append(j)
            if track:
                self.V[j] = v

    @property
    def rank(self):
        return len(self.pivots)

    @property
    def pivot_rows(self):
        return set(self.pivots)

    def reduce_vector(self, vec):
        """Reduce ``vec`` against the pivot columns; returns the remainder."""
        vec = dict(vec)
        p = self.p
        while vec:
            low = _low(vec)
            piv = self.pivots.get(low)
            if piv is None:
                break
            _, pcol = piv
            factor = vec[low] * pow(pcol[low], p - 2, p) % p
            _axpy(vec, pcol, factor, p)
        return vec

    def add_pivot(self, vec, tag=None):
        self.pivots[_low(vec)] = (tag, vec)


def homology_representatives(K: SimplicialComplex, a: int, p: int):
    """Cycles whose classes form a basis of H_a(K; F_p), as sparse dicts over
    the canonical a-simplex list of K."""
    _check_prime(p)
    upper = Reduction(boundary_columns(K, a + 1, p), p) if a < 2 else None
    killed = upper.pivot_rows if upper is not None else set()
    if a == 0:
        return [{i: 1} for i in range(len(K.vertices)) if i not in killed]
    red = Reduction(boundary_columns(K, a, p), p, track=True, skip=killed)
    return [red.V[j] for j in red.zero_columns if j not in killed]


def homology_dims(K: SimplicialComplex, p: int):
    """[b0, b1, b2] of K over F_p."""
    _check_prime(p)
    nv, ne, nt = K.counts
    r1 = Reduction(boundary_columns(K, 1, p), p).rank
    r2 = Reduction(boundary_columns(K, 2, p), p).rank
    return [nv - r1, ne - r1 - r2, nt - r2]


def _reindex(vec, src: SimplicialComplex, dst: SimplicialComplex, a: int):
    if not vec:
        return {}
    rows = np.fromiter(vec.keys(), dtype=np.int64)
    table_src = [src.vertices, src.edges, src.triangles][a]
    table_dst = [dst.vertices, dst.edges, dst.triangles][a]
    new = _index_of(table_src[rows], table_dst)
    return {int(n): v for n, v in zip(new, vec.values())}


def image_rank(K1: SimplicialComplex, K2: SimplicialComplex, a: int, p: int) -> int:
    """Rank of H_a(K1; F_p) -> H_a(K2; F_p) induced by the inclusion K1 <= K2.

    Equal to dim Z_a(K1) - dim(Z_a(K1) & B_a(K2)).  Writing Z_a(K1) as
    B_a(K1) plus the span R of homology representatives, and using
    B_a(K1) <= B_a(K2), this is rank[R | B_a(K2)] - dim B_a(K2): the number
    of representatives left nonzero after reduction against B_a(K2) and the
    earlier survivors.
    """
    _check_prime(p)
    if not K1.is_subcomplex_of(K2):
        raise ComplexError("K1 is not a subcomplex of K2")
    reps = homology_representatives(K1, a, p)
    if not reps:
        return 0
    red = Reduction(boundary_columns(K2, a + 1, p), p) if a < 2 else Reduction([], p)
    survivors = 0
    for rep in reps:
        rest = red.reduce_vector(_reindex(rep, K1, K2, a))
        if rest:
            red.add_pivot(rest)
            survivors += 1
    return survivors


# ---------------------------------------------------------------------------
# dense modular linear algebra


def row_echelon_mod_p(M, p):
    """Reduced row echelon form of ``M`` over F_p; returns (R, pivot_cols).

    Pivot rows are chosen by lowest index among nonzero candidates, so the
    result is deterministic.
    """
    _check_prime(p)
    R = np.array(M, dtype=np.int64) % p
    rows, cols = R.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(R[r:, c])[0]
        if len(nz) == 0:
            continue
        k = r + nz[0]
        if k != r:
            R[[r, k]] = R[[k, r]]
        inv = pow(int(R[r, c]), p - 2, p)
        R[r] = (R[r] * inv) % p
        others = np.nonzero(R[:, c])[0]
        others = others[others != r]
        if len(others):
            R[others] = (R[others] - np.outer(R[others, c], R[r])) % p
        pivots.append(c)
        r += 1
    return R, pivots


def rank_mod_p(M, p):
    M = np.asarray(M)
    if M.size == 0:
        return 0
    return len(row_echelon_mod_p(M, p)[1])


def nullspace_mod_p(M, p):
    """Basis of ker M over F_p as the columns of the returned matrix."""
    M = np.asarray(M, dtype=np.int64)
    n = M.shape[1]
    if M.shape[0] == 0:
        return np.eye(n, dtype=np.int64)
    R, piv = row_echelon_mod_p(M, p)
    free = [c for c in range(n) if c not in piv]
    basis = np.zeros((n, len(free)), dtype=np.int64)
    for k, f in enumerate(free):
        basis[f, k] = 1
        for i, pc in enumerate(piv):
            basis[pc, k] = (-R[i, f]) % p
    return basis


def homology_dims_dense(K: SimplicialComplex, p: int):
    nv, ne, nt = K.counts
    r1 = rank_mod_p(boundary_matrix(K, 1, p), p)
    r2 = rank_mod_p(boundary_matrix(K, 2, p), p)
    return [nv - r1, ne - r1 - r2, nt - r2]


def _chain_dim(K, a):
    return K.counts[a]


def _dense_boundary(K, a, p):
    """Boundary C_a -> C_{a-1} with correct shape for a in 0..3."""
    if a in (1, 2):
        return boundary_matrix(K, a, p)
    if a == 0:
        return np.zeros((0, len(K.vertices)), dtype=np.int64)
    return np.zeros((len(K.triangles), 0), dtype=np.int64)


def image_rank_dense(K1, K2, a, p):
    """Literal rank[Z_a(K1) | B_a(K2)] - dim B_a(K2) with a full kernel basis."""
    if not K1.is_subcomplex_of(K2):
        raise ComplexError("K1 is not a subcomplex of K2")
    Z1 = nullspace_mod_p(_dense_boundary(K1, a, p), p)
    table1 = [K1.vertices, K1.edges, K1.triangles][a]
    table2 = [K2.vertices, K2.edges, K2.triangles][a]
    embed = np.zeros((len(table2), Z1.shape[1]), dtype=np.int64)
    if len(table1):
        embed[_index_of(table1, table2)] = Z1
    B2 = _dense_boundary(K2, a + 1, p)
    rb = rank_mod_p(B2, p) if B2.size else 0
    both = np.hstack([embed, B2]) if B2.size else embed
    return (rank_mod_p(both, p) if both.size else 0) - rb


def cohomology_image_rank(K1, K2, a, p):
    """Rank of the restriction H^a(K2; F_p) -> H^a(K1; F_p)."""
    if not K1.is_subcomplex_of(K2):
        raise ComplexError("K1 is not a subcomplex of K2")
    # cocycles of K2: kernel of the transposed boundary C^a -> C^{a+1}
    Zc = nullspace_mod_p(_dense_boundary(K2, a + 1, p).T, p)
    table1 = [K1.vertices, K1.edges, K1.triangles][a]
    table2 = [K2.vertices, K2.edges, K2.triangles][a]
    restrict = Zc[_index_of(table1, table2)] if len(table1) else np.zeros((0, Zc.shape[1]), dtype=np.int64)
    Bc = _dense_boundary(K1, a, p).T  # coboundaries C^{a-1}(K1) -> C^a(K1)
    rb = rank_mod_p(Bc, p) if Bc.size else 0
    both = np.hstack([restrict, Bc]) if Bc.size else restrict
    return (rank_mod_p(both, p) if both.size else 0) - rb
