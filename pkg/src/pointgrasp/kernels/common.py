"""Numeric constants shared by the numpy and numba kernel implementations.

Both backends must use these values so a given (ray, triangle) or
(box, triangle) pair evaluates to exactly the same predicate.
"""

# Ray/triangle intersection: determinant below this is treated as parallel.
RAY_DET_EPS = 1e-12

# Barycentric slack so edge- and vertex-exact hits are counted.
BARY_EPS = 1e-12

# Minimum ray parameter for camera-style rays (skips self intersections).
RAY_T_MIN = 1e-9

# Squared axis length below which a SAT cross axis is skipped as degenerate.
AXIS_EPS2 = 1e-18

# BVH traversal stack depth (median-split trees stay far below this).
STACK_DEPTH = 128
