"""Small complexes with known homology and inclusion pairs, plus an
independent brute-force oracle (enumerates chains over F_p)."""
import itertools

import numpy as np

from ghcollapse.complexes import SimplicialComplex

# 6-vertex real projective plane
RP2_6 = [(0, 1, 3), (0, 1, 5), (0, 2, 4), (0, 2, 5), (0, 3, 4),
         (1, 2, 3), (1, 2, 4), (1, 4, 5), (2, 3, 5), (3, 4, 5)]
# 7-vertex torus
TORUS_7 = [(i, (i + 1) % 7, (i + 3) % 7) for i in range(7)] + \
          [(i, (i + 2) % 7, (i + 3) % 7) for i in range(7)]


def cx(*simplices):
    return SimplicialComplex.from_simplices(simplices)


def annulus_hexagon():
    """Inner hexagon 0..5, outer hexagon 6..11, strip triangulated."""
    tris = []
    for i in range(6):
        j = (i + 1) % 6
        tris += [(i, j, 6 + i), (j, 6 + j, 6 + i)]
    return SimplicialComplex.from_triangles(tris)


def hexagon_cycle():
    return cx(*[(i, (i + 1) % 6) for i in range(6)])


# (name, K1, K2, expected image ranks [a=0, a=1, a=2] over F_2)
PAIRS = [
    ("vertex in edge", cx((0,)), cx((0, 1)), [1, 0, 0]),
    ("two vertices in edge", cx((0,), (1,)), cx((0, 1)), [1, 0, 0]),
    ("hollow in filled triangle", cx((0, 1), (1, 2), (0, 2)), cx((0, 1, 2)), [1, 0, 0]),
    ("hollow in hollow triangle", cx((0, 1), (1, 2), (0, 2)), cx((0, 1), (1, 2), (0, 2)), [1, 1, 0]),
    ("square in filled square", cx((0, 1), (1, 2), (2, 3), (0, 3)), cx((0, 1, 2), (0, 2, 3)), [1, 0, 0]),
    ("two points apart", cx((0,), (5,)), cx((0,), (5,)), [2, 0, 0]),
    ("two points joined", cx((0,), (5,)), cx((0, 5)), [1, 0, 0]),
    ("path in triangle", cx((0, 1), (1, 2)), cx((0, 1), (1, 2), (0, 2)), [1, 0, 0]),
    ("hexagon core in annulus", hexagon_cycle(), annulus_hexagon(), [1, 1, 0]),
    ("empty in vertex", SimplicialComplex([], np.zeros((0, 2)), np.zeros((0, 3))), cx((0,)), [0, 0, 0]),
]


def boundary(simplex):
    """Signed faces: delete vertex i with sign (-1)^i."""
    return [((-1) ** i, simplex[:i] + simplex[i + 1:]) for i in range(len(simplex))]


def simplices(K, a):
    if a == 0:
        return [(int(v),) for v in K.vertices]
    if a == 1:
        return [tuple(int(x) for x in e) for e in K.edges]
    if a == 2:
        return [tuple(int(x) for x in t) for t in K.triangles]
    return []


def boundary_dense(K_src, a, K_dst, p):
    rows = {s: i for i, s in enumerate(simplices(K_dst, a - 1))}
    cols = simplices(K_src, a)
    M = np.zeros((len(rows), len(cols)), dtype=np.int64)
    for j, s in enumerate(cols):
        for sign, f in boundary(s):
            M[rows[f], j] = (M[rows[f], j] + sign) % p
    return M


def gf_rank(M, p):
    """Plain Gaussian elimination over F_p."""
    M = np.array(M, dtype=np.int64) % p
    r = 0
    rows, cols = M.shape if M.ndim == 2 else (0, 0)
    for c in range(cols):
        piv = next((i for i in range(r, rows) if M[i, c]), None)
        if piv is None:
            continue
        M[[r, piv]] = M[[piv, r]]
        M[r] = M[r] * pow(int(M[r, c]), p - 2, p) % p
        for i in range(rows):
            if i != r and M[i, c]:
                M[i] = (M[i] - M[i, c] * M[r]) % p
        r += 1
        if r == rows:
            break
    return r


def betti_oracle(K, p):
    n = [len(simplices(K, a)) for a in range(3)]
    r = [0, gf_rank(boundary_dense(K, 1, K, p), p) if n[1] else 0,
         gf_rank(boundary_dense(K, 2, K, p), p) if n[2] else 0, 0]
    return [n[a] - r[a] - r[a + 1] for a in range(3)]


def _all_vectors(n, p):
    return np.array(list(itertools.product(range(p), repeat=n)), dtype=np.int64).reshape(-1, n)


def _span(gens, p, n):
    """All F_p combinations of the generator rows, by closure."""
    span = {tuple([0] * n)}
    for g in gens:
        g = np.asarray(g, dtype=np.int64) % p
        if not g.any():
            continue
        grown = set(span)
        for v in span:
            w = np.asarray(v)
            for _ in range(p - 1):
                w = (w + g) % p
                grown.add(tuple(int(x) for x in w))
        span = grown
    return span


def image_rank_enumerate(K1, K2, a, p, limit=200_000):
    """rank of H_a(K1) -> H_a(K2) as log_p |Z_a(K1) + B_a(K2)| / |B_a(K2)|,
    enumerating every chain of K1 and every element of B_a(K2)."""
    c1 = simplices(K1, a)
    c2 = simplices(K2, a)
    if not c1:
        return 0
    if p ** len(c1) > limit:
        raise ValueError("too large to enumerate")
    index = {s: i for i, s in enumerate(c2)}
    emb = np.zeros((len(c2), len(c1)), dtype=np.int64)
    for j, s in enumerate(c1):
        emb[index[s], j] = 1
    chains = _all_vectors(len(c1), p)
    if a > 0:
        d1 = boundary_dense(K1, a, K1, p)
        cycles = chains[np.all((chains @ d1.T) % p == 0, axis=1)]
    else:
        cycles = chains
    up = simplices(K2, a + 1)
    gens = boundary_dense(K2, a + 1, K2, p).T if up else []
    if p ** min(len(gens), len(c2)) > limit:
        raise ValueError("too large to enumerate")
    B = _span(gens, p, len(c2))
    Z = _span(cycles @ emb.T, p, len(c2)) if len(cycles) else {tuple([0] * len(c2))}
    sums = {tuple((np.asarray(z) + np.asarray(b)) % p) for z in Z for b in B}
    ratio = len(sums) // len(B)
    return int(round(np.log(ratio) / np.log(p))) if ratio > 1 else 0
