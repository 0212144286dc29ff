"""Flat tori and Klein bottles with a shrinking short side.

The torus and the Klein bottle in circle mode both converge to a circle, the
Klein bottle in segment mode converges to a segment of half the length.
Whole-surface Betti numbers over F3 tell the torus from the Klein bottle,
while the local profiles over the limit agree and integrate to 0 in every
case.
"""
import numpy as np

from ghcollapse.gh import coupling_from_map, natural_projection
from ghcollapse.surfaces import FamilySpec, gen_flat_klein, gen_flat_torus
from ghcollapse.topology import betti_full, h_profiles

L, h = 1.0, 0.005
for w in (0.2, 0.05, 0.02):
    T = gen_flat_torus(L, w, max(h, w / 8))
    K = gen_flat_klein(L, w, "circle", max(h, w / 8))
    print(f"w = {w:<5} torus betti F2 {betti_full(T, 2)}  klein betti F2 {betti_full(K, 2)} "
          f"F3 {betti_full(K, 3)}")

w = 0.02
for name, S, family in (
        ("torus", gen_flat_torus(L, w, h), FamilySpec("flat_torus", {"L": L, "w": w}, h=h)),
        ("klein circle", gen_flat_klein(L, w, "circle", h),
         FamilySpec("flat_klein_circle", {"L": L, "w": w}, h=h)),
        ("klein segment", gen_flat_klein(L, w, "segment", h),
         FamilySpec("flat_klein_segment", {"L": L, "w": w}, h=h))):
    f = natural_projection(S, family)
    C = coupling_from_map(f)
    xs = np.array([0.0, 0.25]) * f.limit.length
    for x in xs:
        tag = "endpoint" if f.limit.kind == "segment" and x == 0 else "interior"
        prs = h_profiles(C, x, 0.05, 0.1, (2, 3), tag=tag)
        print(f"{name:14s} x = {x:.3f}  " + "  ".join(f"p={pr.field_p} h={pr.h} F={pr.F}" for pr in prs))
