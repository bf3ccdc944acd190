"""Constraint maps ``H : X x P ⇉ Y`` and the distances between their pieces.

Three representations share one interface:

* :class:`AffineConeMap` -- ``H(x, p) = T_x x + T_p p + b + C``; every distance
  is an exact convex program.
* :class:`EpigraphicalMap` -- ``H(x, p) = F(x, p) + C`` with smooth ``F``;
  ``d(y, H(x, p))`` is exact, the others come from a grid over a declared box.
* :class:`SampledGraphMap` -- a finite cloud of graph points.

Orderings follow the usual conventions: graph points of ``H`` are
``(x, p, y)``, graph points of the solution map ``S(p) = {x : 0 in H(x, p)}``
are ``(p, x)``.  Distances on products use the sum of Euclidean norms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import cvxpy as cp
import numpy as np

from .cones import TOL_FEAS, PolyhedralCone
from ._pattern import compass_search

__all__ = [
    "INFINITE_DISTANCE",
    "AffineConeMap",
    "Box",
    "EpigraphicalMap",
    "SampledGraphMap",
    "SetValuedMap",
    "UnsupportedMapError",
]

INFINITE_DISTANCE = math.inf
_SOLVER_OPTS = dict(solver=cp.CLARABEL, tol_gap_abs=1e-11, tol_gap_rel=1e-11,
                    tol_feas=1e-11, tol_ktratio=1e-9)


class UnsupportedMapError(TypeError):
    """The operation needs a representation the given map does not have."""


@dataclass(frozen=True)
class Box:
    """Axis-aligned box with a grid resolution (points per axis, >= 2)."""

    lower: tuple
    upper: tuple
    resolution: tuple = field(default=None)

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lower))
        hi = tuple(float(v) for v in np.atleast_1d(self.upper))
        if len(lo) != len(hi):
            raise ValueError("lower/upper length mismatch")
        if any(a > b for a, b in zip(lo, hi)):
            raise ValueError("lower must not exceed upper")
        res = self.resolution
        if res is None:
            res = (11,) * len(lo)
        elif np.ndim(res) == 0:
            res = (int(res),) * len(lo)
        res = tuple(int(r) for r in res)
        if len(res) != len(lo) or any(r < 2 for r in res):
            raise ValueError("resolution needs >= 2 points on every axis")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        object.__setattr__(self, "resolution", res)

    @classmethod
    def around(cls, center, half_width=0.5, resolution=11):
        c = np.atleast_1d(np.asarray(center, float))
        return cls(tuple(c - half_width), tuple(c + half_width), resolution)

    @property
    def dim(self) -> int:
        return len(self.lower)

    def axes(self):
        return [np.linspace(a, b, n) for a, b, n in zip(self.lower, self.upper, self.resolution)]

    def grid(self) -> np.ndarray:
        """All grid points in lexicographic order, shape (N, dim)."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def steps(self) -> np.ndarray:
        return (np.array(self.upper) - np.array(self.lower)) / (np.array(self.resolution) - 1)

    def cell_diameter(self, split=None) -> float:
        """Diameter of one grid cell.

        ``split`` lists the block sizes of a product space (sum norm over
        blocks, Euclidean inside each); default is one Euclidean block.
        """
        h = self.steps()
        if split is None:
            return float(np.linalg.norm(h))
        out, i = 0.0, 0
        for k in split:
            out += float(np.linalg.norm(h[i:i + k]))
            i += k
        return out

    def contains(self, z, tol=1e-12) -> bool:
        z = np.asarray(z, float)
        return bool(np.all(z >= np.array(self.lower) - tol) and np.all(z <= np.array(self.upper) + tol))

    def slice(self, start, stop) -> "Box":
        return Box(self.lower[start:stop], self.upper[start:stop], self.resolution[start:stop])

    def to_record(self):
        return {"lower": list(self.lower), "upper": list(self.upper),
                "resolution": list(self.resolution)}


def _vec(v, n, name):
    v = np.atleast_1d(np.asarray(v, dtype=float)).reshape(-1)
    if v.shape[0] != n:
        raise ValueError(f"{name} has dimension {v.shape[0]}, expected {n}")
    return v


class SetValuedMap:
    """Common interface; subclasses set ``nx``, ``np_``, ``ny`` and ``exact``."""

    nx: int
    np_: int
    ny: int
    exact: bool = False
    resolution: float = 0.0

    def _split(self, x, p, y=None):
        x = _vec(x, self.nx, "x")
        p = _vec(p, self.np_, "p")
        if y is None:
            return x, p
        return x, p, _vec(y, self.ny, "y")

    def contains(self, x, p, y, tol: float = TOL_FEAS) -> bool:
        return self.value_distance(x, p, y) <= tol

    def is_feasible(self, x, p, tol: float = TOL_FEAS) -> bool:
        """``0 in H(x, p)``, i.e. ``x in S(p)``."""
        return self.value_distance(x, p, np.zeros(self.ny)) <= tol

    def value_distance(self, x, p, y) -> float:
        raise NotImplementedError

    def solution_distance(self, x, p) -> float:
        raise NotImplementedError

    def graph_distance(self, x, p, y) -> float:
        raise NotImplementedError

    def solution_graph_distance(self, x, p) -> float:
        raise NotImplementedError

    def image_distance(self, x, p, rho, q) -> float:
        """``d(q, H_p(B[x, rho]))`` for the closed ball of radius ``rho``."""
        raise NotImplementedError


class AffineConeMap(SetValuedMap):
    """``H(x, p) = T_x x + T_p p + b + C`` with a polyhedral cone ``C``."""

    exact = True

    def __init__(self, Tx, Tp, b, cone: PolyhedralCone):
        self.Tx = np.atleast_2d(np.asarray(Tx, float))
        self.ny, self.nx = self.Tx.shape
        Tp = np.asarray(Tp, float)
        self.Tp = Tp.reshape(self.ny, -1) if Tp.size else np.zeros((self.ny, 0))
        self.np_ = self.Tp.shape[1]
        self.b = _vec(b, self.ny, "b")
        if cone.dim != self.ny:
            raise ValueError("cone dimension must match Y")
        self.cone = cone
        self._A = cone.halfspaces

    def __repr__(self):
        return (f"AffineConeMap(Tx={self.Tx.tolist()}, Tp={self.Tp.tolist()}, "
                f"b={self.b.tolist()}, C={self.cone.halfspaces.tolist()})")

    def base(self, x, p) -> np.ndarray:
        """The single-valued part ``T_x x + T_p p + b``."""
        x, p = self._split(x, p)
        return self.Tx @ x + self.Tp @ p + self.b

    def slack(self, x, p, y) -> np.ndarray:
        """Constraint values ``a_i . (y - base)``; all >= 0 on the graph."""
        x, p, y = self._split(x, p, y)
        return self._A @ (y - self.Tx @ x - self.Tp @ p - self.b)

    def value_distance(self, x, p, y) -> float:
        x, p, y = self._split(x, p, y)
        return self.cone.distance(y - self.Tx @ x - self.Tp @ p - self.b)

    def _solve(self, prob, param, value):
        param.value = value
        prob.solve(**_SOLVER_OPTS)
        if prob.status in ("infeasible", "infeasible_inaccurate"):
            return INFINITE_DISTANCE
        if prob.status not in ("optimal", "optimal_inaccurate"):
            raise RuntimeError(f"conic solver returned status {prob.status}")
        return max(0.0, float(prob.value))

    @cached_property
    def _solution_problem(self):
        xv = cp.Variable(self.nx)
        x0 = cp.Parameter(self.nx)
        q = cp.Parameter(len(self._A))
        cons = [self._A @ (self.Tx @ xv) + q <= 0] if len(self._A) else []
        return cp.Problem(cp.Minimize(cp.norm(xv - x0, 2)), cons), x0, q

    def solution_distance(self, x, p) -> float:
        x, p = self._split(x, p)
        if len(self._A) == 0 or np.all(self.slack(x, p, np.zeros(self.ny)) >= 0):
            return 0.0
        prob, x0, q = self._solution_problem
        x0.value = x
        return self._solve(prob, q, self._A @ (self.Tp @ p + self.b))

    @cached_property
    def _graph_problem(self):
        dx, dp, dy = cp.Variable(self.nx), cp.Variable(self.np_), cp.Variable(self.ny)
        q = cp.Parameter(len(self._A))
        move = dy - self.Tx @ dx - (self.Tp @ dp if self.np_ else 0)
        obj = cp.norm(dx, 2) + cp.norm(dy, 2) + (cp.norm(dp, 2) if self.np_ else 0)
        return cp.Problem(cp.Minimize(obj), [self._A @ move + q >= 0]), q

    def graph_distance(self, x, p, y) -> float:
        x, p, y = self._split(x, p, y)
        s = self.slack(x, p, y)
        if len(self._A) == 0 or np.all(s >= 0):
            return 0.0
        prob, q = self._graph_problem
        return self._solve(prob, q, s)

    @cached_property
    def _solution_graph_problem(self):
        dx, dp = cp.Variable(self.nx), cp.Variable(self.np_)
        q = cp.Parameter(len(self._A))
        move = self.Tx @ dx + (self.Tp @ dp if self.np_ else 0)
        obj = cp.norm(dx, 2) + (cp.norm(dp, 2) if self.np_ else 0)
        return cp.Problem(cp.Minimize(obj), [self._A @ move + q <= 0]), q

    def solution_graph_distance(self, x, p) -> float:
        x, p = self._split(x, p)
        if len(self._A) == 0 or np.all(self.slack(x, p, np.zeros(self.ny)) >= 0):
            return 0.0
        prob, q = self._solution_graph_problem
        return self._solve(prob, q, self._A @ (self.Tx @ x + self.Tp @ p + self.b))

    @cached_property
    def _image_problem(self):
        xv, c = cp.Variable(self.nx), cp.Variable(self.ny)
        x0, w, rho = cp.Parameter(self.nx), cp.Parameter(self.ny), cp.Parameter(nonneg=True)
        cons = [cp.norm(xv - x0, 2) <= rho]
        if len(self._A):
            cons.append(self._A @ c >= 0)
        return cp.Problem(cp.Minimize(cp.norm(w - self.Tx @ xv - c, 2)), cons), x0, w, rho

    def image_distance(self, x, p, rho, q) -> float:
        x, p, q = self._split(x, p, q)
        prob, x0, w, r = self._image_problem
        x0.value = x
        r.value = float(rho)
        return self._solve(prob, w, q - self.Tp @ p - self.b)


class EpigraphicalMap(SetValuedMap):
    """``H(x, p) = F(x, p) + C`` for a smooth single-valued ``F``.

    Parameters
    ----------
    F : callable
        ``F(x, p) -> ndarray (ny,)``.
    cone : PolyhedralCone
        The cone ``C`` in ``Y``.
    box : Box
        Grid over ``X x P`` used by the approximate distances.
    nx : int
        Dimension of ``X``; the parameter dimension is ``box.dim - nx``.
    jacobian : callable, optional
        ``jacobian(x, p) -> (J_x, J_p)``; forward differences when omitted.
    """

    exact = False

    def __init__(self, F, cone: PolyhedralCone, box: Box, nx: int, jacobian=None):
        self.F = F
        self.cone = cone
        self.box = box
        self.nx = int(nx)
        self.np_ = box.dim - self.nx
        self.ny = cone.dim
        self._jac = jacobian
        self.resolution = box.cell_diameter(split=(self.nx, self.np_))

    def __call__(self, x, p):
        return np.atleast_1d(np.asarray(self.F(x, p), dtype=float))

    def jacobian(self, x, p):
        x, p = self._split(x, p)
        if self._jac is not None:
            Jx, Jp = self._jac(x, p)
            return (np.atleast_2d(np.asarray(Jx, float)).reshape(self.ny, self.nx),
                    np.asarray(Jp, float).reshape(self.ny, self.np_))
        h = 1e-7
        f0 = self(x, p)
        Jx = np.column_stack([(self(x + h * ei, p) - f0) / h for ei in np.eye(self.nx)])
        Jp = (np.column_stack([(self(x, p + h * ei) - f0) / h for ei in np.eye(self.np_)])
              if self.np_ else np.zeros((self.ny, 0)))
        return Jx, Jp

    def value_distance(self, x, p, y) -> float:
        x, p, y = self._split(x, p, y)
        return self.cone.distance(y - self(x, p))

    @cached_property
    def _grid(self):
        pts = self.box.grid()
        vals = np.array([self(z[:self.nx], z[self.nx:]) for z in pts])
        feasible = self.cone.distance_many(-vals) <= TOL_FEAS
        return pts, vals, feasible

    def solution_distance(self, x, p) -> float:
        """Grid search over the X-slice of the box at the given ``p``."""
        x, p = self._split(x, p)
        if self.is_feasible(x, p):
            return 0.0
        xs = self.box.slice(0, self.nx).grid()
        vals = np.array([self(xx, p) for xx in xs])
        ok = self.cone.distance_many(-vals) <= TOL_FEAS
        if not ok.any():
            return INFINITE_DISTANCE
        return float(np.min(np.linalg.norm(xs[ok] - x, axis=1)))

    def graph_distance(self, x, p, y) -> float:
        x, p, y = self._split(x, p, y)
        if self.contains(x, p, y):
            return 0.0
        pts, vals, _ = self._grid
        move = (np.linalg.norm(pts[:, :self.nx] - x, axis=1)
                + np.linalg.norm(pts[:, self.nx:] - p, axis=1))
        return float(np.min(move + self.cone.distance_many(y - vals)))

    def solution_graph_distance(self, x, p) -> float:
        x, p = self._split(x, p)
        if self.is_feasible(x, p):
            return 0.0
        pts, _, feasible = self._grid
        if not feasible.any():
            return INFINITE_DISTANCE
        q = pts[feasible]
        return float(np.min(np.linalg.norm(q[:, :self.nx] - x, axis=1)
                            + np.linalg.norm(q[:, self.nx:] - p, axis=1)))

    def image_distance(self, x, p, rho, q, n_ball: int = 41) -> float:
        """Grid over the ball followed by a compass-search polish."""
        x, p, q = self._split(x, p, q)
        ball = Box.around(x, rho, n_ball)
        pts = ball.grid()
        pts = pts[np.linalg.norm(pts - x, axis=1) <= rho * (1 + 1e-12)]

        def obj(z):
            if np.linalg.norm(z - x) > rho:
                return math.inf
            return self.value_distance(z, p, q)

        vals = np.array([obj(z) for z in pts])
        best = pts[int(np.argmin(vals))]
        if vals.min() <= TOL_FEAS:
            return float(vals.min())
        res = compass_search(obj, best, ball, step=ball.steps().max(), tol=1e-10)
        return float(min(vals.min(), res.fun))


class SampledGraphMap(SetValuedMap):
    """Finite graph cloud ``{(x_k, p_k, y_k)}``.

    Query points are matched to stored ``(x, p)`` pairs within ``snap`` (half
    the smallest pairwise sum-norm spacing); ``y`` values count as zero within
    ``zero_tol`` (same rule over the stored ``y`` values).
    """

    exact = False

    def __init__(self, xs, ps, ys, snap=None, zero_tol=None):
        self.xs = np.atleast_2d(np.asarray(xs, float))
        n = len(self.xs)
        self.ps = np.asarray(ps, float).reshape(n, -1)
        self.ys = np.asarray(ys, float).reshape(n, -1)
        self.nx, self.np_, self.ny = self.xs.shape[1], self.ps.shape[1], self.ys.shape[1]
        self.snap = _half_min_spacing(np.hstack([self.xs, self.ps]), (self.nx, self.np_)) if snap is None else snap
        self.zero_tol = _half_min_spacing(self.ys, (self.ny,)) if zero_tol is None else zero_tol
        self.resolution = 2 * self.snap

    @classmethod
    def from_map(cls, H: SetValuedMap, box: Box, tol: float = TOL_FEAS):
        """Discretize ``H`` on a grid over ``X x P x Y``."""
        pts = box.grid()
        nx, np_ = H.nx, H.np_
        keep = [z for z in pts if H.value_distance(z[:nx], z[nx:nx + np_], z[nx + np_:]) <= tol]
        keep = np.array(keep)
        return cls(keep[:, :nx], keep[:, nx:nx + np_], keep[:, nx + np_:])

    def _xp_dist(self, x, p):
        return np.linalg.norm(self.xs - x, axis=1) + np.linalg.norm(self.ps - p, axis=1)

    def value_distance(self, x, p, y) -> float:
        x, p, y = self._split(x, p, y)
        m = self._xp_dist(x, p) <= self.snap
        if not m.any():
            return INFINITE_DISTANCE
        return float(np.min(np.linalg.norm(self.ys[m] - y, axis=1)))

    def _zeros(self):
        return np.linalg.norm(self.ys, axis=1) <= self.zero_tol

    def solution_distance(self, x, p) -> float:
        x, p = self._split(x, p)
        m = self._zeros() & (np.linalg.norm(self.ps - p, axis=1) <= self.snap)
        if not m.any():
            return INFINITE_DISTANCE
        return float(np.min(np.linalg.norm(self.xs[m] - x, axis=1)))

    def graph_distance(self, x, p, y) -> float:
        x, p, y = self._split(x, p, y)
        return float(np.min(self._xp_dist(x, p) + np.linalg.norm(self.ys - y, axis=1)))

    def solution_graph_distance(self, x, p) -> float:
        x, p = self._split(x, p)
        m = self._zeros()
        if not m.any():
            return INFINITE_DISTANCE
        return float(np.min(self._xp_dist(x, p)[m]))

    def image_distance(self, x, p, rho, q) -> float:
        x, p, q = self._split(x, p, q)
        m = (np.linalg.norm(self.ps - p, axis=1) <= self.snap) & (np.linalg.norm(self.xs - x, axis=1) <= rho + self.snap)
        if not m.any():
            return INFINITE_DISTANCE
        return float(np.min(np.linalg.norm(self.ys[m] - q, axis=1)))


def _half_min_spacing(Z, split):
    Z = np.unique(np.asarray(Z, float), axis=0)
    if len(Z) < 2:
        return TOL_FEAS
    best = math.inf
    for i in range(len(Z) - 1):
        d = np.zeros(len(Z) - i - 1)
        j = 0
        for k in split:
            d += np.linalg.norm(Z[i + 1:, j:j + k] - Z[i, j:j + k], axis=1)
            j += k
        best = min(best, float(d.min()))
    return 0.5 * best
