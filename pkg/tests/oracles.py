"""Independent brute-force oracles used across the test suite.

These deliberately avoid the library's accelerated code paths: the
support-function estimate and the linear program operate directly on
wrench arrays, and the geometric oracles are plain vectorized numpy.
"""

import numpy as np
from scipy.optimize import linprog, minimize


def support_function_quality(wrenches, n_dirs=20000, n_polish=8, seed=0):
    """Distance from the origin to the wrench hull boundary via the
    support function h(u) = max_w w.u.

    Samples >= n_dirs random unit directions, then polishes the best few
    with an SLSQP minimax solve (min t s.t. w.u <= t, |u| = 1).  Uses
    only support evaluations, never the hull.
    """
    w = np.asarray(wrenches, dtype=np.float64)
    rng = np.random.default_rng(seed)
    u = rng.normal(size=(n_dirs, w.shape[1]))
    u /= np.linalg.norm(u, axis=1)[:, None]
    sup = (u @ w.T).max(axis=1)
    best = float(sup.min())
    dim = w.shape[1]
    ones = np.ones(len(w))
    for x0 in u[np.argsort(sup)[:n_polish]]:
        z0 = np.concatenate([x0, [(w @ x0).max()]])
        cons = [
            {"type": "ineq",
             "fun": lambda z: z[dim] - w @ z[:dim],
             "jac": lambda z: np.column_stack([-w, ones])},
            {"type": "eq",
             "fun": lambda z: z[:dim] @ z[:dim] - 1.0,
             "jac": lambda z: np.concatenate([2.0 * z[:dim], [0.0]])},
        ]
        res = minimize(lambda z: z[dim], z0,
                       jac=lambda z: np.eye(dim + 1)[dim],
                       constraints=cons, method="SLSQP",
                       options={"maxiter": 200, "ftol": 1e-12})
        un = res.x[:dim]
        norm = np.linalg.norm(un)
        if norm > 1e-9:
            best = min(best, float((w @ (un / norm)).max()))
    return best


def lp_force_closure(wrenches, tol=1e-9):
    """Origin strictly inside conv(wrenches), by linear programming.

    Solves max delta s.t. W^T lambda = 0, sum lambda = 1,
    lambda_i >= delta; strict interiority also requires the wrench matrix
    to span the full space.
    """
    w = np.asarray(wrenches, dtype=np.float64)
    n, dim = w.shape
    if np.linalg.matrix_rank(w, tol=1e-10) < dim:
        return False
    # variables: lambda (n), delta (1); maximize delta
    c = np.zeros(n + 1)
    c[-1] = -1.0
    a_eq = np.zeros((dim + 1, n + 1))
    a_eq[:dim, :n] = w.T
    a_eq[dim, :n] = 1.0
    b_eq = np.zeros(dim + 1)
    b_eq[dim] = 1.0
    a_ub = np.zeros((n, n + 1))
    a_ub[:, :n] = -np.eye(n)
    a_ub[:, -1] = 1.0
    b_ub = np.zeros(n)
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq,
                  bounds=[(0, 1)] * n + [(-1, 1)], method="highs")
    if not res.success:
        return False
    return float(res.x[-1]) > tol


def brute_nearest_within(points, query, radius):
    """Linear-scan nearest neighbor within radius; -1 when none."""
    d = np.linalg.norm(points - query, axis=1)
    i = int(np.argmin(d))
    return i if d[i] <= radius else -1


def brute_raycast(origins, dirs, verts, tris, t_min=1e-9):
    """All-triangles nearest-hit ray cast, fully independent formulation.

    Uses a different algebraic route (plane hit + barycentric inside
    test) than the production kernels.
    """
    n = origins.shape[0]
    out_t = np.full(n, np.inf)
    out_tri = np.full(n, -1, dtype=np.int64)
    v0 = verts[tris[:, 0]]
    v1 = verts[tris[:, 1]]
    v2 = verts[tris[:, 2]]
    nrm = np.cross(v1 - v0, v2 - v0)
    for i in range(n):
        o = origins[i]
        d = dirs[i]
        denom = nrm @ d
        ok = np.abs(denom) > 1e-12
        t = np.where(ok, np.einsum("tj,tj->t", nrm, v0 - o)
                     / np.where(ok, denom, 1.0), np.inf)
        pts = o + t[:, None] * d
        # barycentric containment
        e0 = v1 - v0
        e1 = v2 - v0
        ep = pts - v0
        d00 = np.einsum("tj,tj->t", e0, e0)
        d01 = np.einsum("tj,tj->t", e0, e1)
        d11 = np.einsum("tj,tj->t", e1, e1)
        d20 = np.einsum("tj,tj->t", ep, e0)
        d21 = np.einsum("tj,tj->t", ep, e1)
        den = d00 * d11 - d01 * d01
        good = np.abs(den) > 1e-18
        v = np.where(good, (d11 * d20 - d01 * d21) / np.where(good, den, 1),
                     -1)
        u = np.where(good, (d00 * d21 - d01 * d20) / np.where(good, den, 1),
                     -1)
        inside = (v >= -1e-9) & (u >= -1e-9) & (u + v <= 1 + 1e-9)
        t = np.where(ok & inside & (t > t_min), t, np.inf)
        j = int(np.argmin(t))
        if np.isfinite(t[j]):
            out_t[i] = t[j]
            out_tri[i] = j
    return out_t, out_tri


def random_rotation(rng):
    """Uniform-ish rotation from a normalized quaternion."""
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
    ])
