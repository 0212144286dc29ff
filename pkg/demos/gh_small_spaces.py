"""Exact Gromov-Hausdorff distances between tiny metric spaces.

Enumerates correspondences for a few hand made examples and compares the
exact value with the upper bound obtained from explicit maps.
"""
import numpy as np

from ghcollapse.gh import gh_oracle_small, gh_upper_bound

point = np.zeros((1, 1))
pair = np.array([[0.0, 1.0], [1.0, 0.0]])
# three points on a circle of length 3, and a 4-cycle of length 4
tri = np.array([[0, 1, 1], [1, 0, 1], [1, 1, 0]], float)
sq = np.array([[0, 1, 2, 1], [1, 0, 1, 2], [2, 1, 0, 1], [1, 2, 1, 0]], float)

print("point vs pair    ", gh_oracle_small(point, pair))
print("pair vs triangle ", gh_oracle_small(pair, tri))
print("triangle vs 4-cycle", gh_oracle_small(tri, sq))
print("4-cycle vs pair  ", gh_oracle_small(sq, pair))

# folding the 4-cycle onto an edge gives an upper bound
fold = np.array([0, 1, 1, 0])
print("fold bound        ", gh_upper_bound(sq, pair, [fold]))
