"""Independent reference computations used by the tests.

None of these call into the code paths they check: Gerstewitz values come from
an LP over generators (the library uses a closed form over halfspaces), cone
distances from face enumeration (the library uses NNLS / conic solvers), and
map distances from brute-force grids.
"""
from itertools import combinations, product

import numpy as np
from scipy.optimize import linprog


def gerstewitz_lp(G, e, z):
    """``min { t : t e - z in cone(G) }`` solved as an LP in ``(t, lambda)``."""
    G = np.atleast_2d(np.asarray(G, float))
    n = len(e)
    k = len(G)
    c = np.zeros(1 + k)
    c[0] = 1.0
    A_eq = np.hstack([np.asarray(e, float).reshape(n, 1), -G.T])
    res = linprog(c, A_eq=A_eq, b_eq=np.asarray(z, float), bounds=[(None, None)] + [(0, None)] * k,
                  method="highs")
    assert res.status == 0, res.message
    return res.fun


def boundary_distance_by_rays(contains, e, n_dirs=20000, t_max=10.0, seed=0):
    """Shoot rays from ``e`` and bisect for the exit point; upper bound on d(e, bd K)."""
    rng = np.random.default_rng(seed)
    e = np.asarray(e, float)
    U = rng.normal(size=(n_dirs, len(e)))
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    best = np.inf
    for u in U:
        if contains(e + t_max * u):
            continue
        lo, hi = 0.0, t_max
        for _ in range(50):
            mid = 0.5 * (lo + hi)
            if contains(e + mid * u):
                lo = mid
            else:
                hi = mid
        best = min(best, hi)
    return best


def cone_distance_faces(A, W):
    """Distance of each row of ``W`` to ``{z : A z >= 0}`` by face enumeration.

    The projection lies in the relative interior of some face and is then the
    orthogonal projection onto that face's span; every feasible candidate is a
    point of the cone, so the smallest candidate distance is exact.
    """
    A = np.atleast_2d(np.asarray(A, float))
    W = np.atleast_2d(np.asarray(W, float))
    n = W.shape[1]
    best = np.full(len(W), np.inf)
    for k in range(len(A) + 1):
        for rows in combinations(range(len(A)), k):
            if rows:
                S = A[list(rows)]
                P = np.eye(n) - np.linalg.pinv(S) @ S
            else:
                P = np.eye(n)
            Z = W @ P.T
            ok = np.all(Z @ A.T >= -1e-10, axis=1) if len(A) else np.ones(len(W), bool)
            d = np.linalg.norm(W - Z, axis=1)
            best = np.where(ok, np.minimum(best, d), best)
    return best


def _grid(center, half, m):
    axes = [np.linspace(c - h, c + h, m) for c, h in zip(center, half)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.ravel() for g in mesh], axis=1)
    step = np.array([2 * h / (m - 1) for h in half])
    return pts, step


def _cell(step, split):
    out, j = 0.0, 0
    for k in split:
        out += float(np.linalg.norm(step[j:j + k]))
        j += k
    return out


def _zoom(fn, center, half, m, rounds=4):
    """Brute-force minimum of ``fn`` over a grid, then over shrinking grids
    around the best node.  ``fn`` maps an array of points to values (``inf``
    where infeasible).  Returns ``(value, step of the first grid)``.

    Zooming matters at acute corners of a feasible set, where the nearest
    feasible node of a single grid can sit more than one cell away.
    """
    pts, step0 = _grid(center, half, m)
    vals = fn(pts)
    i = int(np.argmin(vals))
    best, arg = vals[i], pts[i]
    step = step0
    for _ in range(rounds):
        if not np.isfinite(best):
            break
        pts, step = _grid(arg, 3 * step, m)
        vals = fn(pts)
        i = int(np.argmin(vals))
        if vals[i] < best:
            best, arg = vals[i], pts[i]
    return float(best), step0


class AffineGridOracle:
    """Brute-force distances for ``H(x, p) = Tx x + Tp p + b + C`` with ``C = {A z >= 0}``.

    Each query runs a coarse grid over a wide box to get an upper bound ``U``
    (densified while it finds no feasible node),
    then a fine grid over the ``U``-box around the query, which then contains a
    minimizer, refined by zooming.  The point that produced ``U`` stays a
    candidate.  Returns ``(value, cell)`` with ``cell`` the sum-norm diameter
    of a fine-grid cell.
    """

    def __init__(self, Tx, Tp, b, A, m_fine=41, wide=4.0, m_coarse=21):
        self.Tx, self.Tp = np.atleast_2d(Tx), np.atleast_2d(Tp)
        self.b = np.asarray(b, float)
        self.A = np.atleast_2d(A)
        self.nx, self.np_ = self.Tx.shape[1], self.Tp.shape[1]
        self.ny = len(self.b)
        self.m, self.wide, self.mc = m_fine, wide, m_coarse

    def base(self, X, P):
        return X @ self.Tx.T + P @ self.Tp.T + self.b

    def feasible(self, X, P):
        return np.all((-self.base(X, P)) @ self.A.T >= -1e-10, axis=1)

    def value_distance(self, x, p, y):
        y = np.asarray(y, float)
        b0 = self.base(np.atleast_2d(x), np.atleast_2d(p))[0]
        U = float(np.linalg.norm(y - b0))  # the apex b0 is a member
        if U == 0.0:
            return 0.0, 0.0

        def fn(Y):
            ok = np.all((Y - b0) @ self.A.T >= -1e-12, axis=1)
            return np.where(ok, np.linalg.norm(Y - y, axis=1), np.inf)

        val, step = _zoom(fn, y, [U] * self.ny, self.m)
        return min(val, U), _cell(step, [self.ny])

    def solution_distance(self, x, p):
        x = np.asarray(x, float)
        p = np.atleast_2d(p)

        def fn(X):
            ok = self.feasible(X, np.repeat(p, len(X), 0))
            return np.where(ok, np.linalg.norm(X - x, axis=1), np.inf)

        U = self._upper(fn, x)
        if U in (0.0, np.inf):
            return U, 0.0
        val, step = _zoom(fn, x, [U] * self.nx, self.m)
        return min(val, U), _cell(step, [self.nx])

    def _upper(self, fn, c, budget=300_000):
        # thin feasible sets can slip between coarse nodes, so densify until hit
        m = self.mc
        while True:
            pts, _ = _grid(c, [self.wide] * len(c), m)
            U = float(np.min(fn(pts)))
            if np.isfinite(U) or (2 * m - 1) ** len(c) > budget:
                return U
            m = 2 * m - 1

    def _sum_norm(self, Z, x, p):
        return np.linalg.norm(Z[:, :self.nx] - x, axis=1) + np.linalg.norm(Z[:, self.nx:] - p, axis=1)

    def graph_distance(self, x, p, y):
        x, p, y = (np.asarray(v, float) for v in (x, p, y))
        b0 = self.base(x[None], p[None])[0]
        U = float(cone_distance_faces(self.A, (y - b0)[None])[0])
        if U == 0.0:
            return 0.0, 0.0

        def fn(Z):
            inner = cone_distance_faces(self.A, y - self.base(Z[:, :self.nx], Z[:, self.nx:]))
            return self._sum_norm(Z, x, p) + inner

        val, step = _zoom(fn, np.concatenate([x, p]), [U] * (self.nx + self.np_), self.m)
        return min(val, U), _cell(step, [self.nx, self.np_])

    def solution_graph_distance(self, x, p):
        x, p = np.asarray(x, float), np.asarray(p, float)
        c = np.concatenate([x, p])
        k = self.nx + self.np_

        def fn(Z):
            ok = self.feasible(Z[:, :self.nx], Z[:, self.nx:])
            return np.where(ok, self._sum_norm(Z, x, p), np.inf)

        U = self._upper(fn, c)
        if U in (0.0, np.inf):
            return U, 0.0
        val, step = _zoom(fn, c, [U] * k, self.m)
        return min(val, U), _cell(step, [self.nx, self.np_])


def dominated_on_grid(values, tol=0.0):
    """Boolean mask of rows strictly dominated (componentwise) by another row."""
    V = np.asarray(values, float)
    return np.array([np.any(np.all(V < v - tol, axis=1)) for v in V])


def box_points(lower, upper, m):
    axes = [np.linspace(lo, hi, m) for lo, hi in zip(lower, upper)]
    return np.array(list(product(*axes)))
