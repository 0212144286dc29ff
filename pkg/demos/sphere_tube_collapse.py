"""Thin tubes around a hyperbolic segment collapse onto the segment.

Builds the boundary of the r-neighbourhood of a unit segment for a few radii,
measures how far the tube is from the segment, and reads off the local
homology profile at an endpoint and in the middle.  The profile values are
integrated against the Euler characteristic of the segment to recover the
Euler characteristic of the sphere.
"""
from ghcollapse.gh import coupling_from_map, hausdorff_in_coupling, natural_projection
from ghcollapse.surfaces import FamilySpec, gen_sphere_tube
from ghcollapse.topology import assemble_constructible, euler_integral, h_profiles

ell = 1.0
for r in (0.1, 0.05, 0.02):
    h = r / 4
    S = gen_sphere_tube(ell, r, h)
    f = natural_projection(S, FamilySpec("sphere_tube", {"ell": ell, "r": r}, h=h))
    C = coupling_from_map(f)
    print(f"r = {r:<5} vertices = {S.n:5d}  distortion = {f.distortion:.4f}  "
          f"hausdorff = {hausdorff_in_coupling(C):.4f}")

# local homology at r = 0.02 with delta pair (0.05, 0.1)
profiles = []
for x, tag in ((0.0, "endpoint"), (0.5, "interior"), (1.0, "endpoint")):
    for pr in h_profiles(C, x, 0.05, 0.1, (2, 3), tag=tag):
        print(f"  x = {x:.1f} p = {pr.field_p}  h = {pr.h}  F = {pr.F}  {pr.status}")
        if pr.field_p == 2:
            profiles.append(pr)

F = assemble_constructible(profiles, f.limit)
print("Euler integral over the segment:", euler_integral(F), "(sphere: 2)")
