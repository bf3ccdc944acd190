"""Weak solutions of parametric vector problems and their necessary conditions.

The problem is ``min g(x, p) s.t. 0 in H(x, p)`` with ``g`` ordered by a
pointed solid cone ``K``.  Besides brute-force weak-minimality checks on
grids, this module certifies the coderivative multiplier rules

    0 in grad_x (z* . g)(x̄, p) + D*H_p(x̄, 0)(y*)                (parametric)
    (0, 0) in grad (z* . g)(x̄, p̄) + D*H(x̄, p̄, 0)(y*)            (joint)

with ``z* in K*``, ``z* . e = 1``, by linear-programming feasibility.  For
smooth ``g`` the subdifferential of ``z* . g`` is its gradient, and for an
affine-plus-cone ``H`` the coderivative comes from the convex normal cone of
the graph, so both rules are finite linear systems.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .cones import TOL_FEAS, PolyhedralCone, is_weak_minimal
from .penalty import minimize_local
from .regularity import graph_normal_cone
from .scalarize import GerstewitzFunctional
from .setmaps import AffineConeMap, Box, SetValuedMap, UnsupportedMapError

__all__ = [
    "OptimalityCertificate",
    "VectorProblem",
    "WeakSolutionCheck",
    "is_local_weak_solution",
    "is_weak_solution_wrt_M",
    "necessary_condition_joint",
    "necessary_condition_parametric",
    "scalar_necessary_condition",
    "scalarized_penalized_solve",
    "weak_front_oracle",
]

_HIGHS = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}


class InfeasibleReferenceError(ValueError):
    """The reference point violates the constraint at some parameter."""


@dataclass
class VectorProblem:
    """Smooth vector objective under a constraint map.

    ``objective(x, p) -> (nz,)``; ``jacobian(x, p) -> (J_x, J_p)`` with shapes
    ``(nz, nx)`` and ``(nz, np)``.  ``region`` is a box over ``X x P`` and
    ``lipschitz`` a Lipschitz constant of ``g`` there.
    """

    objective: object
    jacobian: object
    H: SetValuedMap
    cone: PolyhedralCone
    direction: np.ndarray
    region: Box
    lipschitz: float = 1.0

    def __post_init__(self):
        self.direction = np.asarray(self.direction, float)
        self.scalarizer = GerstewitzFunctional(self.cone, self.direction)
        if not self.cone.is_pointed:
            raise ValueError("ordering cone must be pointed")

    def g(self, x, p):
        return np.atleast_1d(np.asarray(self.objective(np.atleast_1d(x), np.atleast_1d(p)), float))

    def jac(self, x, p):
        Jx, Jp = self.jacobian(np.atleast_1d(x), np.atleast_1d(p))
        nz = self.cone.dim
        return (np.asarray(Jx, float).reshape(nz, self.H.nx),
                np.asarray(Jp, float).reshape(nz, self.H.np_))

    def with_direction(self, e) -> "VectorProblem":
        return VectorProblem(self.objective, self.jacobian, self.H, self.cone, e, self.region, self.lipschitz)

    @property
    def x_region(self) -> Box:
        return self.region.slice(0, self.H.nx)


@dataclass
class WeakSolutionCheck:
    ok: bool
    witnesses: list = field(default_factory=list)
    n_checked: int = 0

    def __bool__(self):
        return self.ok


@dataclass
class OptimalityCertificate:
    """Multipliers for a coderivative multiplier rule and their residual.

    ``status`` is ``"feasible"`` when the linear system holds up to
    ``TOL_FEAS`` with ``z*`` in ``K*`` and ``z* . e = 1``.
    """

    status: str
    residual: float
    z_star: np.ndarray | None
    y_star: np.ndarray | None
    x_star: np.ndarray | None
    point: list = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return self.status == "feasible"

    def to_record(self):
        def lst(v):
            # + 0.0 folds -0.0 so reports do not depend on LP sign noise
            return None if v is None else (np.asarray(v, float) + 0.0).tolist()
        return {"status": self.status, "residual": self.residual, "z_star": lst(self.z_star),
                "y_star": lst(self.y_star), "x_star": lst(self.x_star), "point": self.point}


# -- grid checks ---------------------------------------------------------------

def _ball_points(center, radius, box: Box):
    pts = box.grid()
    return pts[np.linalg.norm(pts - center, axis=1) <= radius + 1e-12]


def is_weak_solution_wrt_M(prob: VectorProblem, xbar, M, radius: float, resolution: int = 41,
                           tol: float = TOL_FEAS) -> WeakSolutionCheck:
    """Grid check of weak minimality of ``xbar`` at every ``p`` in ``M``.

    For each ``p`` the closed ball ``B[xbar, radius]`` is gridded at
    ``resolution`` points per axis, intersected with ``S(p)``, and the image
    differences ``g(x, p) - g(xbar, p)`` are tested against ``-int K``.
    """
    xbar = np.atleast_1d(np.asarray(xbar, float))
    box = Box.around(xbar, radius, resolution)
    out = WeakSolutionCheck(True)
    for p in M:
        p = np.atleast_1d(np.asarray(p, float))
        if prob.H.solution_distance(xbar, p) > tol:
            raise InfeasibleReferenceError(f"reference point infeasible at p={p.tolist()}")
        gbar = prob.g(xbar, p)
        for x in _ball_points(xbar, radius, box):
            if not prob.H.is_feasible(x, p, tol):
                continue
            out.n_checked += 1
            if not is_weak_minimal([prob.g(x, p)], gbar, prob.cone):
                out.ok = False
                out.witnesses.append({"x": x.tolist(), "p": p.tolist()})
    return out


def is_local_weak_solution(prob: VectorProblem, xbar, pbar, radii, resolution: int = 21,
                           tol: float = TOL_FEAS) -> WeakSolutionCheck:
    """Grid check of joint local weak minimality over ``U x W`` boxes."""
    xbar = np.atleast_1d(np.asarray(xbar, float))
    pbar = np.atleast_1d(np.asarray(pbar, float))
    if not prob.H.is_feasible(xbar, pbar, tol):
        raise InfeasibleReferenceError("reference point infeasible")
    rx, rp = radii
    out = WeakSolutionCheck(True)
    if rx <= 0 and rp <= 0:
        return out
    c = np.concatenate([xbar, pbar])
    half = np.concatenate([np.full(len(xbar), rx), np.full(len(pbar), rp)])
    box = Box(tuple(c - half), tuple(c + half), resolution)
    gbar = prob.g(xbar, pbar)
    nx = len(xbar)
    for z in box.grid():
        x, p = z[:nx], z[nx:]
        if not prob.H.is_feasible(x, p, tol):
            continue
        out.n_checked += 1
        if not is_weak_minimal([prob.g(x, p)], gbar, prob.cone):
            out.ok = False
            out.witnesses.append({"x": x.tolist(), "p": p.tolist()})
    return out


def weak_front_oracle(prob: VectorProblem, p, box: Box | None = None, tol: float = TOL_FEAS):
    """Feasible grid points of the X-box whose images no other grid image
    strictly dominates.  Exact on the grid; returns ``(points, images)``."""
    p = np.atleast_1d(np.asarray(p, float))
    box = prob.x_region if box is None else box
    pts = np.array([x for x in box.grid() if prob.H.is_feasible(x, p, tol)])
    if len(pts) == 0:
        return np.zeros((0, box.dim)), np.zeros((0, prob.cone.dim))
    imgs = np.array([prob.g(x, p) for x in pts])
    keep = np.ones(len(pts), bool)
    for i in range(len(pts)):
        keep[i] = not np.any(prob.cone.contains_interior(imgs[i] - imgs))
    return pts[keep], imgs[keep]


def scalarized_penalized_solve(prob: VectorProblem, anchor, p, r: float, tol: float = 1e-8):
    """Minimize ``s_e(g(x, p) - g(anchor, p)) + L L_e r d(0, H(x, p))`` from ``anchor``.

    Returns the compass-search result; its ``fun`` is ``>= -tol`` whenever
    ``anchor`` is a weak solution and the constants are valid.
    """
    anchor = np.atleast_1d(np.asarray(anchor, float))
    p = np.atleast_1d(np.asarray(p, float))
    s = prob.scalarizer
    ga = prob.g(anchor, p)
    w = prob.lipschitz * s.lipschitz * r
    zero = np.zeros(prob.H.ny)

    def phi(x):
        return s.evaluate(prob.g(x, p) - ga) + w * prob.H.value_distance(x, p, zero)

    return minimize_local(phi, anchor, prob.x_region, tol=tol)


# -- multiplier rules ----------------------------------------------------------

def _solve_rule(grad_T, normals, K: PolyhedralCone | None, e, tol=TOL_FEAS):
    """Find ``z in K*, e.z = 1, mu >= 0`` with ``grad_T z + normals^T mu = 0``.

    ``grad_T`` has shape ``(n, nz)`` (columns = gradients of the components),
    ``normals`` is ``(m, n)`` (x-parts of the normal-cone generators).  With
    ``K`` None the objective is scalar and ``z = 1`` is fixed.
    """
    n = grad_T.shape[0]
    m = len(normals)
    scalar = K is None
    nz = 0 if scalar else grad_T.shape[1]
    # variables: z (free), mu >= 0, s+ >= 0, s- >= 0
    nv = nz + m + 2 * n
    c = np.concatenate([np.zeros(nz + m), np.ones(2 * n)])
    A_eq = np.zeros((n, nv))
    b_eq = np.zeros(n)
    if scalar:
        b_eq = -grad_T[:, 0]
    else:
        A_eq[:, :nz] = grad_T
    if m:
        A_eq[:, nz:nz + m] = normals.T
    A_eq[:, nz + m:nz + m + n] = np.eye(n)
    A_eq[:, nz + m + n:] = -np.eye(n)
    A_ub = b_ub = None
    if not scalar:
        A_eq = np.vstack([A_eq, np.concatenate([e, np.zeros(nv - nz)])])
        b_eq = np.append(b_eq, 1.0)
        G = K.generators  # halfspaces of K*
        A_ub = np.hstack([-G, np.zeros((len(G), nv - nz))])
        b_ub = np.zeros(len(G))
    bounds = [(None, None)] * nz + [(0, None)] * (m + 2 * n)
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds,
                  method="highs", options=_HIGHS)
    if res.status != 0:
        return None, None, np.inf
    z = np.array([1.0]) if scalar else res.x[:nz]
    mu = res.x[nz:nz + m]
    z, mu = _polish(grad_T, normals, z, mu, K, e)
    defect = grad_T @ z + (normals.T @ mu if m else 0.0)
    resid = float(np.linalg.norm(defect))
    if not scalar:
        resid = max(resid, abs(float(e @ z) - 1.0))
    return z, mu, resid


def _polish(grad_T, normals, z, mu, K, e):
    """Re-solve the equalities on the LP support by least squares.

    Removes LP rounding; the polished point replaces the LP point only if it
    still satisfies the sign constraints and has a smaller defect.
    """
    m = len(normals)
    support = np.nonzero(mu > 1e-12)[0]
    scalar = K is None
    cols = [] if scalar else [grad_T]
    if len(support):
        cols.append(normals[support].T)
    n = grad_T.shape[0]
    if not cols:
        return z, mu
    A = np.hstack(cols)
    rhs = -grad_T[:, 0] if scalar else np.zeros(n)
    if not scalar:
        A = np.vstack([A, np.concatenate([e, np.zeros(len(support))])])
        rhs = np.append(rhs, 1.0)
    sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    nz = 0 if scalar else len(z)
    z_new = z if scalar else sol[:nz]
    mu_new = np.zeros(m)
    mu_new[support] = sol[nz:]
    if np.any(mu_new < -1e-12):
        return z, mu
    if not scalar and not K.dual().contains(z_new, tol=1e-12):
        return z, mu

    def defect(zz, mm):
        d = grad_T @ zz + (normals.T @ mm if m else 0.0)
        return np.linalg.norm(d) + (0.0 if scalar else abs(e @ zz - 1.0))

    if defect(z_new, np.maximum(mu_new, 0)) <= defect(z, mu):
        return z_new, np.maximum(mu_new, 0)
    return z, mu


def _certificate(z, mu, resid, gens_y, gens_x, point, K, e, tol=TOL_FEAS):
    if z is None:
        return OptimalityCertificate("infeasible", float("inf"), None, None, None, point)
    ystar = gens_y.T @ mu if len(mu) else np.zeros(gens_y.shape[1])
    xstar = gens_x.T @ mu if len(mu) else np.zeros(gens_x.shape[1])
    ok = resid <= tol
    if K is not None:
        ok = ok and bool(K.dual().contains(z, tol=tol)) and abs(float(e @ z) - 1.0) <= tol
    return OptimalityCertificate("feasible" if ok else "infeasible", resid, z, ystar, xstar, point)


def _affine(H):
    if not isinstance(H, AffineConeMap):
        raise UnsupportedMapError("multiplier certificates need an AffineConeMap")


def necessary_condition_parametric(prob: VectorProblem, xbar, p) -> OptimalityCertificate:
    """LP certificate for ``0 in grad_x(z*.g)(xbar, p) + D*H_p(xbar, 0)(y*)``."""
    _affine(prob.H)
    xbar = np.atleast_1d(np.asarray(xbar, float))
    p = np.atleast_1d(np.asarray(p, float))
    zero = np.zeros(prob.H.ny)
    N = graph_normal_cone(prob.H, xbar, p, zero)
    gx, gy = N[:, :prob.H.nx], -N[:, prob.H.nx:]
    Jx, _ = prob.jac(xbar, p)
    z, mu, resid = _solve_rule(Jx.T, gx, prob.cone, prob.direction)
    return _certificate(z, mu, resid, gy, gx, [xbar.tolist(), p.tolist()], prob.cone, prob.direction)


def necessary_condition_joint(prob: VectorProblem, xbar, pbar) -> OptimalityCertificate:
    """LP certificate for ``(0,0) in grad(z*.g)(xbar, pbar) + D*H(xbar, pbar, 0)(y*)``."""
    _affine(prob.H)
    xbar = np.atleast_1d(np.asarray(xbar, float))
    pbar = np.atleast_1d(np.asarray(pbar, float))
    zero = np.zeros(prob.H.ny)
    N = graph_normal_cone(prob.H, xbar, pbar, zero, joint=True)
    k = prob.H.nx + prob.H.np_
    gxp, gy = N[:, :k], -N[:, k:]
    Jx, Jp = prob.jac(xbar, pbar)
    J = np.hstack([Jx, Jp])
    z, mu, resid = _solve_rule(J.T, gxp, prob.cone, prob.direction)
    return _certificate(z, mu, resid, gy, gxp, [xbar.tolist(), pbar.tolist()], prob.cone, prob.direction)


def scalar_necessary_condition(gradient, H: SetValuedMap, xbar, pbar) -> OptimalityCertificate:
    """LP certificate for ``(0,0) in grad f(xbar, pbar) + D*H(xbar, pbar, 0)(y*)``.

    ``gradient(x, p)`` returns the stacked gradient ``(df/dx, df/dp)``.
    """
    _affine(H)
    xbar = np.atleast_1d(np.asarray(xbar, float))
    pbar = np.atleast_1d(np.asarray(pbar, float))
    N = graph_normal_cone(H, xbar, pbar, np.zeros(H.ny), joint=True)
    k = H.nx + H.np_
    gxp, gy = N[:, :k], -N[:, k:]
    grad = np.asarray(gradient(xbar, pbar), float).reshape(k, 1)
    z, mu, resid = _solve_rule(grad, gxp, None, None)
    return _certificate(z, mu, resid, gy, gxp, [xbar.tolist(), pbar.tolist()], None, None)
