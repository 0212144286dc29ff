import itertools
from types import SimpleNamespace
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ghcollapse.gh import (AlmostIsometry, LimitSpace, UsageError, audit_coupling_triangles,
                           ball, coupling_from_map, gh_oracle_small, gh_upper_bound,
                           hausdorff_in_coupling, natural_projection, projected_ball,
                           quotient_coupling)
from ghcollapse.complexes import SimplicialComplex
from ghcollapse.surfaces import (FamilySpec, SampledSurface, flat_klein_segment_cover,
                                 gen_flat_torus, quotient_by_group, scaled)
from conftest import rp2_tube


def euclid_surface(pts, h=None):
    pts = np.asarray(pts, float).reshape(len(pts), -1)
    D = np.linalg.norm(pts[:, None] - pts[None], axis=-1)
    tri = SimplicialComplex.from_simplices([(i,) for i in range(len(pts))])
    return SampledSurface("pts", pts, tri, dense=D, h=h)


def lattice(p, q, L, w):
    return min(math.hypot(q[0] - p[0] + k * L, q[1] - p[1] + m * w)
               for k in range(-2, 3) for m in range(-2, 3))


def circ(a, b, L):
    d = abs(a - b) % L
    return min(d, L - d)


def brute_gh(DX, DY, group=None):
    """Exact GH distance: min over every covering relation of distortion / 2."""
    nx, ny = len(DX), len(DY)
    pairs = [(a, b) for a in range(nx) for b in range(ny)]
    best = math.inf
    for mask in range(1, 2 ** len(pairs)):
        R = [pairs[k] for k in range(len(pairs)) if mask >> k & 1]
        if group is not None:
            closed = {(int(gx[a]), int(gy[b])) for a, b in R for gx, gy in group}
            if closed != set(R):
                continue
        if {a for a, _ in R} != set(range(nx)) or {b for _, b in R} != set(range(ny)):
            continue
        dis = max(abs(DX[a, c] - DY[b, d]) for a, b in R for c, d in R)
        best = min(best, dis / 2)
    return best


# ---------------------------------------------------------------- natural projections


@pytest.fixture(scope="module")
def torus01():
    S = gen_flat_torus(1.0, 0.1, 0.02)
    return S, natural_projection(S, FamilySpec("flat_torus", {"L": 1.0, "w": 0.1}, h=0.02))


def test_point_collapse_distortion_is_diameter():
    S = scaled(gen_flat_torus(1.0, 0.5, 0.1), 0.08)
    f = natural_projection(S, FamilySpec("point_collapse"))
    assert f.distortion == pytest.approx(S.diameter(), abs=1e-12)
    assert f.codensity == 0.0
    C = coupling_from_map(f)
    # constant map: every cross distance equals eps = diam/2 + h
    assert hausdorff_in_coupling(C) == pytest.approx(S.diameter() / 2 + S.h, abs=1e-12)


def test_torus_distortion_at_most_w(torus01):
    S, f = torus01
    assert f.distortion <= 0.1
    # the projection forgets v, so distortion is the largest sampled v-gap
    v = S.coords["v"]
    assert f.distortion == pytest.approx(max(circ(a, b, 0.1) for a in v[:5] for b in v[:5]), abs=1e-12)
    assert f.lipschitz and f.verify()


def test_tube_codensity_at_most_h(tube05):
    f = natural_projection(tube05, FamilySpec("sphere_tube", {"ell": 1.0, "r": 0.05}, h=tube05.h))
    assert f.codensity <= tube05.h
    assert f.limit.kind == "segment" and f.limit.length == 1.0


def test_unknown_family_is_usage_error():
    S = euclid_surface([[0.0], [1.0]])
    # FamilySpec itself rejects unknown names, so bypass it
    with pytest.raises(UsageError):
        natural_projection(S, SimpleNamespace(family="banana", params={}, h=None))


# ---------------------------------------------------------------- couplings


def test_single_vertex_coupling():
    S = euclid_surface([[0.0, 0.0]])
    f = natural_projection(S, FamilySpec("point_collapse"))
    C = coupling_from_map(f, 0.1)
    assert C.cross_pair(0, 0.0) == pytest.approx(0.1)


def _exhaustive_min_slack(C, xs):
    S, X = C.surface, C.limit
    DPP = S.dist
    DXX = X.distance(xs[:, None], xs[None, :])
    DPX = np.column_stack([C.cross(x) for x in xs])
    full = np.block([[DPP, DPX], [DPX.T, DXX]])
    n = len(full)
    worst = math.inf
    for a, b, c in itertools.product(range(n), repeat=3):
        worst = min(worst, full[a, b] + full[b, c] - full[a, c])
    # strict positivity across the blocks
    assert DPX.min() > 0
    return worst


@pytest.mark.parametrize("scale", [1.0, 1.7])
def test_coupling_triangle_inequality_exhaustive(scale):
    rng = np.random.default_rng(4)
    pts = rng.uniform(0, 1, size=(5, 2))
    S = euclid_surface(pts)
    X = LimitSpace("segment", 2.0)
    f = AlmostIsometry(S, X, np.clip(scale * pts[:, 0], 0, 2), grid_gap=0.1).refresh()
    assert f.lipschitz == (scale == 1.0)
    C = coupling_from_map(f, f.distortion / 2 + 1e-12)
    assert C.exact_balls == f.lipschitz
    xs = np.linspace(0, 2, 5)
    assert _exhaustive_min_slack(C, xs) >= -1e-9


def test_seeded_coupling_matches_definition():
    rng = np.random.default_rng(5)
    pts = rng.uniform(0, 1, size=(8, 2))
    S = euclid_surface(pts)
    X = LimitSpace("circle", 1.0)
    fmap = np.mod(2 * pts[:, 0], 1.0)
    f = AlmostIsometry(S, X, fmap, grid_gap=0.1).refresh()
    eps = f.distortion / 2 + 0.01
    C = coupling_from_map(f, eps)
    for x in (0.0, 0.3, 0.77):
        want = [min(S.dist[p, q] + eps + circ(fmap[q], x, 1.0) for q in range(8)) for p in range(8)]
        assert np.allclose(C.cross(x), want)


def test_eps_refused_below_half_distortion(torus01):
    _, f = torus01
    with pytest.raises(UsageError):
        coupling_from_map(f, f.distortion / 2 - 1e-6)
    pc = natural_projection(euclid_surface([[0.0]]), FamilySpec("point_collapse"))
    with pytest.raises(UsageError):
        coupling_from_map(pc, 0.0)


def test_equivariant_coupling_is_invariant():
    cover = flat_klein_segment_cover(1.0, 0.2, 0.05)
    f = natural_projection(cover, FamilySpec("flat_torus", {"L": 1.0, "w": 0.2}, h=0.05))
    assert f.limit.reflection
    g = cover.action[0]
    for eps in (None, f.distortion / 2 + 0.2):
        C = coupling_from_map(f, eps)
        for x in f.limit.grid(0.1):
            assert np.allclose(C.cross(x)[g], C.cross(float(f.limit.act(x))), atol=1e-12)
    # the same through the seeded (non-Lipschitz) route
    warped = AlmostIsometry(cover, f.limit, np.mod(f.map + 0.02 * np.sin(4 * np.pi * f.map), 1.0),
                            grid_gap=0.05).refresh()
    assert np.allclose(np.mod(-warped.map, 1.0), warped.map[g])
    C = coupling_from_map(warped)
    for x in (0.1, 0.35):
        assert np.allclose(C.cross(x)[g], C.cross(float(f.limit.act(x))), atol=1e-12)


def test_equivariant_tube_coupling(rp2_05):
    cover = rp2_05.cover
    f = natural_projection(cover, FamilySpec("sphere_tube", {"ell": 1.0, "r": 0.05}, h=cover.h))
    C = coupling_from_map(f)
    g = cover.action[0]
    for x in (0.1, 0.5, 0.8):
        assert np.allclose(C.cross(x)[g], C.cross(1.0 - x), atol=1e-12)


def test_hausdorff_of_exact_isometry():
    pts = np.linspace(0, 1, 11)[:, None]
    S = euclid_surface(pts, h=0.1)
    X = LimitSpace("segment", 1.0)
    f = AlmostIsometry(S, X, pts[:, 0], grid_gap=0.03).refresh()
    assert f.distortion == pytest.approx(0.0, abs=1e-12)
    eps = 0.02
    C = coupling_from_map(f, eps)
    H = hausdorff_in_coupling(C, h=0.03)
    assert eps - 1e-12 <= H <= eps + 0.1 + 1e-12
    assert H == pytest.approx(eps + 0.05, abs=0.01)


def test_hausdorff_bounded_by_eps_plus_codensity(torus01):
    _, f = torus01
    C = coupling_from_map(f)
    assert hausdorff_in_coupling(C) <= C.epsilon + f.codensity + 1e-12


# ---------------------------------------------------------------- balls


@settings(max_examples=40)
@given(st.floats(0, 0.999), st.floats(0.01, 0.6), st.floats(0.0, 0.5))
def test_ball_monotone(x, d1, extra):
    S = gen_flat_torus(1.0, 0.2, 0.05)
    f = natural_projection(S, FamilySpec("flat_torus", {"L": 1.0, "w": 0.2}, h=0.05))
    C = coupling_from_map(f)
    assert set(ball(C, x, d1)) <= set(ball(C, x, d1 + extra))


def test_ball_extremes(torus01):
    S, f = torus01
    C = coupling_from_map(f)
    assert len(ball(C, 0.3, C.epsilon)) == 0
    assert len(ball(C, 0.3, 0.5 * C.epsilon)) == 0
    assert len(ball(C, 0.3, S.diameter() + C.epsilon + 0.01)) == S.n
    with pytest.raises(UsageError):
        ball(C, 0.3, 0.0)


def test_torus_ball_is_band_brute_force():
    L, w, h, eps, delta, x = 1.0, 0.01, 0.0025, 0.06, 0.1, 0.5
    S = gen_flat_torus(L, w, h)
    f = natural_projection(S, FamilySpec("flat_torus", {"L": L, "w": w}, h=h))
    C = coupling_from_map(f, eps)
    B = set(ball(C, x, delta).tolist())
    P = np.column_stack([S.coords["u"], S.coords["v"]])
    # brute force from closed-form distances, min over all q
    cols = np.unique(S.coords["u"])
    reps = [int(np.nonzero((S.coords["u"] == u) & (S.coords["j"] == 0))[0][0]) for u in cols]
    cq = np.array([circ(u, x, L) for u in P[:, 0]])
    for p in reps:
        d = P - P[p]
        lat = np.min([np.hypot(d[:, 0] + k * L, d[:, 1] + m * w)
                      for k in range(-2, 3) for m in range(-2, 3)], axis=0)
        val = np.min(lat + eps + cq)
        assert (val < delta - 1e-12) == (p in B)
    u_in = np.unique(S.coords["u"][list(B)])
    width = u_in.max() - u_in.min() + L / 400
    assert width == pytest.approx(2 * (delta - eps), abs=2 * L / 400)
    # each column in the band contains the full short circle
    for u in u_in:
        assert np.sum(S.coords["u"][list(B)] == u) == 4


def test_projected_ball_is_band_of_width_2delta(torus01):
    S, f = torus01
    for x, delta in ((0.5, 0.1), (0.02, 0.13)):
        A = projected_ball(S, f, x, delta)
        want = [p for p in range(S.n) if circ(S.coords["u"][p], x, 1.0) < delta - 1e-12]
        assert sorted(A.tolist()) == want
        d = np.array([circ(u, x, 1.0) for u in S.coords["u"][A]])
        assert d.max() < delta and d.max() >= delta - 0.02
    assert len(projected_ball(S, f, 0.5, 1.1)) == S.n


# ---------------------------------------------------------------- GH oracles


def path_metric(gaps):
    c = np.concatenate([[0], np.cumsum(gaps)])
    return np.abs(c[:, None] - c[None])


def test_oracle_examples():
    rng = np.random.default_rng(1)
    P = rng.uniform(size=(4, 2))
    D = np.linalg.norm(P[:, None] - P[None], axis=-1)
    assert gh_oracle_small(D, D) == 0.0
    assert gh_oracle_small([[0, 2], [2, 0]], [[0]]) == 1.0
    X, Y = path_metric([1, 1]), path_metric([1, 0.5])
    assert gh_oracle_small(X, Y) == pytest.approx(brute_gh(X, Y))
    with pytest.raises(UsageError):
        gh_oracle_small(np.zeros((7, 7)), np.zeros((6, 6)))


def small_metric(n):
    return st.lists(st.floats(0.1, 2.0), min_size=n, max_size=n).map(
        lambda v: np.array(v)).map(lambda v: _from_points(v))


def _from_points(v):
    # points on a line plus a bump, giving a genuine (non-path) metric
    P = np.column_stack([np.cumsum(v), np.sin(3 * v)])
    return np.linalg.norm(P[:, None] - P[None], axis=-1)


@settings(max_examples=25)
@given(st.integers(1, 3).flatmap(small_metric), st.integers(1, 3).flatmap(small_metric))
def test_oracle_matches_brute_force(DX, DY):
    got = gh_oracle_small(DX, DY)
    assert got == pytest.approx(brute_gh(DX, DY), abs=1e-9)
    maps = [list(m) for m in itertools.product(range(len(DY)), repeat=len(DX))]
    assert gh_upper_bound(DX, DY, maps) >= got - 1e-12


def test_equivariant_oracle():
    X = path_metric([1.0, 0.3, 1.0])            # symmetric 4-point path
    Y = path_metric([1.4, 0.5])                  # symmetric 3-point path
    gX = np.array([3, 2, 1, 0])
    gY = np.array([2, 1, 0])
    group = [(np.arange(4), np.arange(3)), (gX, gY)]
    eq = gh_oracle_small(X, Y, group=group)
    plain = gh_oracle_small(X, Y)
    assert eq >= plain - 1e-12
    assert eq == pytest.approx(brute_gh(X, Y, group=group))
    assert plain == pytest.approx(brute_gh(X, Y))


def test_upper_bound_requires_maps():
    with pytest.raises(UsageError):
        gh_upper_bound(np.zeros((1, 1)), np.zeros((1, 1)), [])


# ---------------------------------------------------------------- quotients and audits


def test_quotient_hausdorff_not_larger_klein():
    cover = flat_klein_segment_cover(1.0, 0.1, 0.025)
    Q = quotient_by_group(cover)
    f = natural_projection(cover, FamilySpec("flat_torus", {"L": 1.0, "w": 0.1}, h=0.025))
    C = coupling_from_map(f)
    Cq = quotient_coupling(C, Q)
    assert Cq.limit.kind == "segment" and Cq.limit.length == 0.5
    assert hausdorff_in_coupling(Cq) <= hausdorff_in_coupling(C) + 1e-12


def test_quotient_hausdorff_not_larger_rp2():
    Q = rp2_tube(0.05)
    f = natural_projection(Q.cover, FamilySpec("sphere_tube", {"ell": 1.0, "r": 0.05}, h=Q.cover.h))
    C = coupling_from_map(f)
    Cq = quotient_coupling(C, Q)
    assert hausdorff_in_coupling(Cq) <= hausdorff_in_coupling(C) + 1e-12
    slack, _, _ = audit_coupling_triangles(Cq, n_triples=20_000)
    assert slack >= -1e-9


def test_sampled_triangle_audit_tube(tube05):
    f = natural_projection(tube05, FamilySpec("sphere_tube", {"ell": 1.0, "r": 0.05}, h=tube05.h))
    C = coupling_from_map(f)
    slack, m, nx = audit_coupling_triangles(C, n_triples=20_000)
    assert slack >= -1e-9 and m == 150 and nx > 0


def test_limit_space_validation():
    with pytest.raises(UsageError):
        LimitSpace("segment", 0.0)
    with pytest.raises(UsageError):
        LimitSpace("segment", 1.0, samples=(1.5,))
    with pytest.raises(UsageError):
        LimitSpace("circle", 1.0, samples=(1.0,))
    with pytest.raises(UsageError):
        LimitSpace("torus", 1.0)
    with pytest.raises(UsageError):
        LimitSpace("segment", 1.0).act(0.2)
    X = LimitSpace("circle", 1.0, reflection=True)
    assert X.act(0.25) == pytest.approx(0.75)
    assert X.distance(0.1, 0.9) == pytest.approx(0.2)
    assert LimitSpace("segment", 2.0).boundary_distance(0.5) == 0.5
