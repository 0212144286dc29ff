"""Hyperbolic geometry in dimensions 2 and 3.

Points are exchanged in Klein-chart coordinates (the open unit ball, where
geodesics are affine chords) and all computations are done on the
hyperboloid ``{x : <x, x> = -1, x_0 > 0}`` of Minkowski space with the form
``<x, y> = -x_0 y_0 + x_1 y_1 + ... + x_n y_n``.

The array helpers (``klein_to_hyperboloid``, ``mdot``, ``hyperboloid_distance``
and friends) work on stacks of points along the leading axes and are what the
surface generators use; the ``HPoint`` based functions are thin wrappers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

BOUNDARY_MARGIN = 1e-12


class DimensionError(ValueError):
    pass


# ---------------------------------------------------------------------------
# array level


def mdot(x, y):
    """Minkowski product along the last axis."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return -x[..., 0] * y[..., 0] + np.sum(x[..., 1:] * y[..., 1:], axis=-1)


def klein_to_hyperboloid(k):
    k = np.asarray(k, dtype=float)
    sq = np.sum(k * k, axis=-1)
    if np.any(sq >= 1.0 - BOUNDARY_MARGIN):
        raise ValueError("Klein coordinates must lie strictly inside the unit ball")
    x0 = 1.0 / np.sqrt(1.0 - sq)
    return np.concatenate([x0[..., None], k * x0[..., None]], axis=-1)


def hyperboloid_to_klein(x):
    x = np.asarray(x, dtype=float)
    return x[..., 1:] / x[..., :1]


def normalize_timelike(x):
    """Rescale future timelike vectors onto the hyperboloid."""
    x = np.asarray(x, dtype=float)
    return x / np.sqrt(-mdot(x, x))[..., None]


def hyperboloid_distance(x, y):
    # 2 asinh(|x - y|_M / 2) is accurate for nearby points where arccosh is not
    diff = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    sq = np.maximum(mdot(diff, diff), 0.0)
    return 2.0 * np.arcsinh(0.5 * np.sqrt(sq))


def klein_distance(k1, k2):
    return hyperboloid_distance(klein_to_hyperboloid(k1), klein_to_hyperboloid(k2))


def klein_metric_tensor(k):
    """Riemannian metric of the Klein model at chart point ``k`` (n x n)."""
    k = np.asarray(k, dtype=float)
    s = 1.0 - k @ k
    return np.eye(len(k)) / s + np.outer(k, k) / s**2


def tangent_at(base, klein_dir):
    """Unit Minkowski tangent vector at hyperboloid point ``base`` in the
    direction of the Klein-chart vector ``klein_dir``."""
    base = np.asarray(base, dtype=float)
    d = np.asarray(klein_dir, dtype=float)
    k = base[1:] / base[0]
    s = 1.0 - k @ k
    # derivative of k -> (1, k) / sqrt(1 - |k|^2) along d
    x0 = 1.0 / math.sqrt(s)
    dx0 = (k @ d) / s**1.5
    v = np.concatenate([[dx0], d * x0 + k * dx0])
    v = v + mdot(v, base) * base
    nrm = mdot(v, v)
    if nrm <= 0:
        raise ValueError("degenerate tangent direction")
    return v / math.sqrt(nrm)


def gram_schmidt_spacelike(vectors, against):
    """Minkowski-orthonormalise spacelike ``vectors`` against the orthonormal
    list ``against`` (first entry timelike)."""
    out = []
    basis = list(against)
    for v in vectors:
        w = np.array(v, dtype=float)
        for b in basis + out:
            w = w - mdot(w, b) / mdot(b, b) * b
        nrm = mdot(w, w)
        if nrm <= 1e-14:
            raise ValueError("direction vectors are linearly dependent")
        out.append(w / math.sqrt(nrm))
    return out


# ---------------------------------------------------------------------------
# value types


@dataclass(frozen=True, eq=False)
class HPoint:
    """A point of H^2 or H^3 given by Klein-chart coordinates."""

    klein: np.ndarray

    def __post_init__(self):
        k = np.array(self.klein, dtype=float).reshape(-1)
        if k.shape[0] not in (2, 3):
            raise DimensionError(f"dimension must be 2 or 3, got {k.shape[0]}")
        if k @ k >= 1.0 - BOUNDARY_MARGIN:
            raise ValueError("point is not inside the open unit ball")
        k.setflags(write=False)
        object.__setattr__(self, "klein", k)

    @classmethod
    def origin(cls, dim=3):
        return cls(np.zeros(dim))

    @classmethod
    def from_hyperboloid(cls, x):
        return cls(hyperboloid_to_klein(x))

    @property
    def dim(self):
        return self.klein.shape[0]

    @property
    def hyperboloid(self):
        return klein_to_hyperboloid(self.klein)

    def __repr__(self):
        return f"HPoint({np.array2string(self.klein, precision=6)})"


@dataclass(frozen=True, eq=False)
class GeodesicSubspace:
    """Totally geodesic line or plane: ``base`` plus affine Klein-chart
    directions."""

    base: HPoint
    directions: tuple = field(default=())

    def __post_init__(self):
        dirs = tuple(np.array(d, dtype=float).reshape(-1) for d in self.directions)
        if not 1 <= len(dirs) <= 2:
            raise ValueError("a geodesic subspace needs 1 or 2 directions")
        for d in dirs:
            if d.shape[0] != self.base.dim:
                raise DimensionError("direction dimension does not match base point")
        if np.linalg.matrix_rank(np.vstack(dirs), tol=1e-12) < len(dirs):
            raise ValueError("direction vectors are linearly dependent")
        object.__setattr__(self, "directions", dirs)
        B = self.base.hyperboloid
        tangents = gram_schmidt_spacelike(
            [tangent_at(B, d) for d in dirs], [B])
        object.__setattr__(self, "_frame", (B, tuple(tangents)))

    @property
    def dim(self):
        return len(self.directions)

    @property
    def frame(self):
        """Minkowski-orthonormal frame (base, tangents...)."""
        return self._frame

    def point_at(self, t):
        """Point at signed arclength ``t`` along the first direction."""
        B, T = self._frame
        return HPoint.from_hyperboloid(math.cosh(t) * B + math.sinh(t) * T[0])


@dataclass(frozen=True)
class FermiCoords:
    t: float
    r: float
    theta: float = 0.0


def _check_dims(*points):
    dims = {p.dim for p in points}
    if len(dims) != 1:
        raise DimensionError(f"dimension mismatch: {sorted(dims)}")


# ---------------------------------------------------------------------------
# operations


def hyp_distance(p: HPoint, q: HPoint) -> float:
    _check_dims(p, q)
    return float(hyperboloid_distance(p.hyperboloid, q.hyperboloid))


def geodesic_point(p: HPoint, q: HPoint, s: float) -> HPoint:
    """Point at arclength fraction ``s`` of the geodesic from p to q."""
    _check_dims(p, q)
    P, Q = p.hyperboloid, q.hyperboloid
    d = float(hyperboloid_distance(P, Q))
    if d == 0.0:
        return p
    if s == 0.0:
        return p
    if s == 1.0:
        return q
    x = (math.sinh((1.0 - s) * d) * P + math.sinh(s * d) * Q) / math.sinh(d)
    return HPoint.from_hyperboloid(x)


def project_hyperboloid(x, subspace: GeodesicSubspace):
    """Nearest-point projection of hyperboloid points onto a geodesic
    subspace (vectorised over leading axes)."""
    x = np.asarray(x, dtype=float)
    B, T = subspace.frame
    proj = -mdot(x, B)[..., None] * B
    for t in T:
        proj = proj + mdot(x, t)[..., None] * t
    return normalize_timelike(proj)


def project_to_geodesic(p: HPoint, L: GeodesicSubspace) -> HPoint:
    _check_dims(p, L.base)
    return HPoint.from_hyperboloid(project_hyperboloid(p.hyperboloid, L))


def _normal_frame(axis: GeodesicSubspace):
    B, T = axis.frame
    n = axis.base.dim
    candidates = list(np.eye(n + 1)[1:])
    normals = []
    for c in candidates:
        try:
            normals.extend(gram_schmidt_spacelike([c], [B, *T, *normals]))
        except ValueError:
            continue
        if len(normals) == n - 1:
            break
    return normals


def fermi_from_hyperboloid(x, axis: GeodesicSubspace):
    """Vectorised Fermi coordinates (t, r, theta) around a geodesic line."""
    if axis.dim != 1:
        raise ValueError("Fermi coordinates need a 1-dimensional axis")
    x = np.asarray(x, dtype=float)
    B, (T,) = axis.frame
    alpha = -mdot(x, B)
    beta = mdot(x, T)
    t = np.arctanh(beta / alpha)
    normals = _normal_frame(axis)
    comps = [mdot(x, nv) for nv in normals]
    r = np.arcsinh(np.sqrt(sum(c * c for c in comps)))
    if len(normals) == 2:
        theta = np.mod(np.arctan2(comps[1], comps[0]), 2 * np.pi)
    else:
        theta = np.where(comps[0] < 0, np.pi, 0.0)
    theta = np.where(r == 0.0, 0.0, theta)
    return t, r, theta


def fermi_to_hyperboloid(t, r, theta, axis: GeodesicSubspace):
    if axis.dim != 1:
        raise ValueError("Fermi coordinates need a 1-dimensional axis")
    t, r, theta = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (t, r, theta)))
    B, (T,) = axis.frame
    normals = _normal_frame(axis)
    foot = np.cosh(t)[..., None] * B + np.sinh(t)[..., None] * T
    if len(normals) == 2:
        nvec = np.cos(theta)[..., None] * normals[0] + np.sin(theta)[..., None] * normals[1]
    else:
        nvec = np.where(np.cos(theta)[..., None] < 0, -1.0, 1.0) * normals[0]
    return np.cosh(r)[..., None] * foot + np.sinh(r)[..., None] * nvec


def fermi_from_point(axis: GeodesicSubspace, p: HPoint) -> FermiCoords:
    _check_dims(p, axis.base)
    t, r, theta = fermi_from_hyperboloid(p.hyperboloid, axis)
    return FermiCoords(float(t), float(r), float(theta))


def fermi_to_point(axis: GeodesicSubspace, c: FermiCoords) -> HPoint:
    return HPoint.from_hyperboloid(fermi_to_hyperboloid(c.t, c.r, c.theta, axis))


def reflect_hyperboloid(center, x):
    """Point reflection through ``center``: x -> -x - 2<x, c> c."""
    center = np.asarray(center, dtype=float)
    x = np.asarray(x, dtype=float)
    return -x - 2.0 * mdot(x, center)[..., None] * center


def point_reflection(center: HPoint, p: HPoint) -> HPoint:
    _check_dims(center, p)
    return HPoint.from_hyperboloid(reflect_hyperboloid(center.hyperboloid, p.hyperboloid))


def comparison_angle(a: float, b: float, c: float, tol: float = 1e-9) -> float:
    """Angle opposite the side ``c`` in the curvature -1 triangle with sides
    a, b, c (law of cosines in half-angle form)."""
    if a <= 0 or b <= 0:
        raise ValueError("comparison angle needs a, b > 0")
    if c > a + b + tol or c < abs(a - b) - tol:
        raise ValueError(f"sides ({a}, {b}, {c}) violate the triangle inequality")
    c = min(max(c, abs(a - b)), a + b)
    num = math.sinh(0.5 * (c + a - b)) * math.sinh(0.5 * (c - a + b))
    s2 = num / (math.sinh(a) * math.sinh(b))
    return 2.0 * math.asin(math.sqrt(min(max(s2, 0.0), 1.0)))
