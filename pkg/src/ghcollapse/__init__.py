"""Gromov-Hausdorff collapse of sampled surfaces with curvature bounded below.

Subpackages and modules:

``hyperbolic``  Klein-chart points, hyperboloid computations, Fermi frames
``surfaces``    sampled surface families with exact or graph metrics
``gh``          couplings, balls, Hausdorff distances, small GH oracles
``topology``    two-scale ball homology, constructible functions, Euler integrals
``runner``      scenario files and reports; ``cli`` wraps it
"""
__version__ = "0.1.0"
