"""Sampled surfaces: generators, metrics, quotients and comparison checks."""
from .base import (ConfigError, ConstructionError, DataError, FamilySpec, SampledSurface,
                   check_closed_surface, check_metric, load_surface_dump, quotient_by_group,
                   scaled)
from .flat import flat_klein_segment_cover, gen_flat_klein, gen_flat_torus
from .tubes import capsule_oracle, gen_rp2_tube, gen_sphere_tube
from .double_cover import gen_double_cover, hyperbolic_incenter, distance_to_boundary
from .cbb import CBBReport, cbb_spotcheck, saddle_cone
