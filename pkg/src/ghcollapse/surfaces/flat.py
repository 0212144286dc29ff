"""Flat tori and flat Klein bottles with exact quotient metrics."""
from __future__ import annotations

import math

import numpy as np

from ..complexes import SimplicialComplex
from .base import (ConfigError, SampledSurface, check_closed_surface,
                   quotient_by_group)


def _wrap(x, period):
    """Representative of x modulo period in [-period/2, period/2]."""
    return x - period * np.round(x / period)


def _count(length, h, minimum, even=False):
    n = max(int(math.ceil(length / h - 1e-9)), 1)
    if even and n % 2:
        n += 1
    return max(n, minimum)


def _check(L, w, h):
    if min(L, w, h) <= 0:
        raise ConfigError("L, w and h must be positive")
    if w > L:
        raise ConfigError("need w <= L")
    if w < 4 * h * (1 - 1e-9):
        raise ConfigError(f"resolution too coarse: w={w} < 4h={4 * h} "
                          "(fewer than 4 vertices around the short circle)")


def _grid_triangles(nu, nv, vid, diag):
    """Quads (i, j) -> (i+1, j+1) split along ``diag(i)`` ('main' or 'anti').
    ``vid(i, j)`` resolves wrapped indices."""
    tris = []
    for i in range(nu):
        for j in range(nv):
            a, b = vid(i, j), vid(i + 1, j)
            c, d = vid(i + 1, j + 1), vid(i, j + 1)
            if diag(i) == "main":
                tris += [(a, b, c), (a, c, d)]
            else:
                tris += [(a, b, d), (b, c, d)]
    return np.array(tris)


def torus_distance_matrix(u, v, L, w):
    du = _wrap(u[:, None] - u[None, :], L)
    dv = _wrap(v[:, None] - v[None, :], w)
    return np.sqrt(du * du + dv * dv)


def klein_distance_matrix(u, v, L, w, words=2):
    """Flat Klein bottle R^2 / <(u, v) -> (u + L, -v), (u, v) -> (u, v + w)>.

    Deck elements are (u, v) -> (u + kL, (-1)^k v + m w); the v-shift m is
    minimised in closed form and k runs over |k| <= ``words``.
    """
    best = np.full((len(u), len(u)), np.inf)
    for k in range(-words, words + 1):
        sign = -1.0 if k % 2 else 1.0
        du = u[None, :] + k * L - u[:, None]
        dv = _wrap(sign * v[None, :] - v[:, None], w)
        best = np.minimum(best, np.sqrt(du * du + dv * dv))
    return best


def gen_flat_torus(L, w, h, label=None):
    """Grid sample of R^2 / <(L, 0), (0, w)> with its exact flat metric."""
    _check(L, w, h)
    nu, nv = _count(L, h, 4), _count(w, h, 4)
    i, j = np.meshgrid(np.arange(nu), np.arange(nv), indexing="ij")
    i, j = i.ravel(), j.ravel()
    u, v = i * (L / nu), j * (w / nv)
    tri = SimplicialComplex.from_triangles(
        _grid_triangles(nu, nv, lambda a, b: (a % nu) * nv + (b % nv), lambda _: "main"))
    check_closed_surface(tri)
    return SampledSurface(
        label or f"flat_torus(L={L:g},w={w:g})", np.column_stack([u, v]), tri,
        metric_kind="exact", dense=torus_distance_matrix(u, v, L, w),
        coords={"u": u, "v": v, "i": i, "j": j}, h=h)


def flat_klein_segment_cover(L, w, h):
    """Torus T(L, w) with the free involution (u, v) -> (-u, v + w/2)."""
    _check(L, w, h)
    nu = _count(L, h, 4, even=True)
    nv = _count(w, h, 6, even=True)
    i, j = np.meshgrid(np.arange(nu), np.arange(nv), indexing="ij")
    i, j = i.ravel(), j.ravel()
    u, v = i * (L / nu), j * (w / nv)

    def vid(a, b):
        return (a % nu) * nv + (b % nv)

    # reflection u -> -u maps column i to nu-1-i and swaps diagonal types
    tri = SimplicialComplex.from_triangles(
        _grid_triangles(nu, nv, vid, lambda c: "main" if c < nu // 2 else "anti"))
    check_closed_surface(tri)
    sigma = vid(-i, j + nv // 2)
    return SampledSurface(
        f"flat_torus_cover(L={L:g},w={w:g})", np.column_stack([u, v]), tri,
        metric_kind="exact", dense=torus_distance_matrix(u, v, L, w),
        action=[sigma], coords={"u": u, "v": v, "i": i, "j": j}, h=h)


def gen_flat_klein(L, w, mode, h):
    """Flat Klein bottle collapsing to a circle (``mode='circle'``) of length L
    or to a segment (``mode='segment'``) of length L/2 as w -> 0."""
    if mode == "segment":
        cover = flat_klein_segment_cover(L, w, h)
        S = quotient_by_group(cover)
        S.label = f"flat_klein_segment(L={L:g},w={w:g})"
        return S
    if mode != "circle":
        raise ConfigError(f"unknown Klein bottle mode {mode!r}")
    _check(L, w, h)
    nu, nv = _count(L, h, 4), _count(w, h, 4)
    i, j = np.meshgrid(np.arange(nu), np.arange(nv), indexing="ij")
    i, j = i.ravel(), j.ravel()
    u, v = i * (L / nu), j * (w / nv)

    def vid(a, b):
        # crossing u = L applies the glide (u, v) -> (u - L, -v)
        if a >= nu:
            a, b = a - nu, -b
        return a * nv + (b % nv)

    tri = SimplicialComplex.from_triangles(_grid_triangles(nu, nv, vid, lambda _: "main"))
    check_closed_surface(tri)
    words = int(math.ceil(math.hypot(L / 2, w / 2) / min(L, w))) + 1
    words = min(words, 2)  # |k| <= 2 already covers every u-difference in (-L, L)
    return SampledSurface(
        f"flat_klein_circle(L={L:g},w={w:g})", np.column_stack([u, v]), tri,
        metric_kind="exact", dense=klein_distance_matrix(u, v, L, w, words=words),
        coords={"u": u, "v": v, "i": i, "j": j}, h=h)
