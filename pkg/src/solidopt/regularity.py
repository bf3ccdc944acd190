"""Openness, metric and graphical regularity of constraint maps.

Three kinds of evidence are produced, all packed in a
:class:`RegularityCertificate`:

* exact moduli for affine-plus-cone maps (openness rate and coderivative
  rate both reduce to the smallest gain of a linear map on the unit sphere of
  a polyhedral cone, computed by face enumeration);
* grid sweeps of the inequalities ``d(x, S(p)) <= r d(0, H(x, p))`` and
  ``d((p, x), Gr S) <= r d((x, p, 0), Gr H)``;
* finite coverings for the ball inclusions of linear openness.

Grid results are reported as ``verified_on_grid``: they say nothing between
grid points.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.linalg import null_space

from .cones import TOL_FEAS, PolyhedralCone
from .setmaps import AffineConeMap, Box, EpigraphicalMap, SetValuedMap, UnsupportedMapError

__all__ = [
    "RegularityCertificate",
    "coderivative_rate",
    "epigraphical_radius",
    "estimate_openness_rate",
    "graph_normal_cone",
    "min_gain_on_cone",
    "verify_epigraphical_openness",
    "verify_graphical_regularity",
    "verify_metric_regularity",
]

VERIFIED_EXACT = "verified_exact"
VERIFIED_ON_GRID = "verified_on_grid"
REFUTED = "refuted"


@dataclass
class RegularityCertificate:
    """Outcome of a regularity estimate or check.

    ``modulus`` is the openness rate ``L``, the metric / graphical modulus
    (empirical sup of the ratio), or the coderivative rate ``c``, depending on
    ``kind``.  A refuted certificate stores the offending point in
    ``worst_witness`` together with its violation.
    """

    kind: str
    modulus: float
    status: str
    region: Box | None = None
    grid: dict = field(default_factory=dict)
    worst_witness: dict | None = None
    tolerance: float = 0.0
    n_checked: int = 0
    n_skipped: int = 0
    notes: list = field(default_factory=list)

    @property
    def verified(self) -> bool:
        return self.status in (VERIFIED_EXACT, VERIFIED_ON_GRID)

    def to_record(self) -> dict:
        return {
            "kind": self.kind,
            "modulus": _num(self.modulus),
            "status": self.status,
            "region": None if self.region is None else self.region.to_record(),
            "grid": self.grid,
            "worst_witness": self.worst_witness,
            "tolerance": self.tolerance,
            "n_checked": self.n_checked,
            "n_skipped": self.n_skipped,
            "notes": list(self.notes),
        }


def _num(v):
    v = float(v)
    return "inf" if math.isinf(v) else v


# -- exact moduli for polyhedral data ----------------------------------------

def min_gain_on_cone(M, cone: PolyhedralCone):
    """``min ||M y||`` over unit vectors ``y`` of a polyhedral cone.

    Every minimizer lies in the relative interior of some face, where it is
    an eigenvector of ``M^T M`` compressed to the face's span; enumerating the
    faces (subsets of active halfspaces) and their eigenvectors is exact.
    Returns ``(inf, None)`` for the zero cone.
    """
    M = np.atleast_2d(np.asarray(M, float))
    n = cone.dim
    A = cone.halfspaces
    best, arg = math.inf, None
    seen = set()
    for k in range(len(A) + 1):
        for rows in combinations(range(len(A)), k):
            U = null_space(A[list(rows)], rcond=1e-10) if rows else np.eye(n)
            if U.shape[1] == 0:
                continue
            key = tuple(np.round(U @ U.T, 8).ravel())
            if key in seen:
                continue
            seen.add(key)
            Q = U.T @ M.T @ M @ U
            _, vecs = np.linalg.eigh(Q)
            for w in vecs.T:
                for s in (1.0, -1.0):
                    y = s * (U @ w)
                    y /= np.linalg.norm(y)
                    if cone.contains(y, tol=1e-10):
                        g = float(np.linalg.norm(M @ y))
                        if g < best - 1e-15:
                            best, arg = g, y
    # rays are faces too; keep them explicit in case the eigenbasis misses them
    for y in cone.generators:
        g = float(np.linalg.norm(M @ y))
        if g < best - 1e-15:
            best, arg = g, y
    return best, arg


def _require_affine(H):
    if not isinstance(H, AffineConeMap):
        raise UnsupportedMapError("exact computation needs an AffineConeMap")


def _reference(H, at):
    x, p, y = (np.atleast_1d(np.asarray(v, float)) for v in at)
    if H.value_distance(x, p, y) > 1e-8:
        raise ValueError("reference point is not on the graph")
    return x, p, y


def graph_normal_cone(H: AffineConeMap, x, p, y, joint: bool = False, tol: float = 1e-9):
    """Generators of the normal cone to the graph at a graph point.

    With ``joint=False`` the cone lives in ``X x Y`` (graph of ``H_p``), with
    ``joint=True`` in ``X x P x Y``.  For the constraints
    ``a_i . (y - T_x x - T_p p - b) >= 0`` the generators are
    ``(T_x^T a_i, [T_p^T a_i,] -a_i)`` over the active rows.  An empty
    result means the normal cone is ``{0}``.
    """
    _require_affine(H)
    s = H.slack(x, p, y)
    if np.any(s < -1e-8):
        raise ValueError("point is not on the graph")
    A = H.cone.halfspaces
    active = A[s <= tol]
    parts = [active @ H.Tx]
    if joint:
        parts.append(active @ H.Tp)
    parts.append(-active)
    width = H.nx + (H.np_ if joint else 0) + H.ny
    return np.hstack(parts) if len(active) else np.zeros((0, width))


def estimate_openness_rate(H: SetValuedMap, at, region: Box | None = None, radii=None,
                           n_directions: int = 64, tol: float = 1e-6):
    """Linear openness rate of ``H`` in ``x`` uniformly in ``p``.

    Affine-plus-cone maps get the exact rate
    ``L = min { ||T_x^T y*|| : y* in C*, ||y*|| = 1 }``: the set
    ``T_x B + C`` contains the ball of radius ``L`` and no larger one, and
    graph points other than ``T_x x + T_p p + b`` only have more room.

    Other maps, or any map when ``radii`` is given, are estimated by
    covering: for each grid graph point ``(x, p, F(x, p))`` of ``region`` and
    each ``rho`` in ``radii``, bisect the largest ``t`` with ``y + t u`` in
    ``H_p(B[x, rho])`` along sampled unit directions ``u``.
    """
    x0, p0, y0 = _reference(H, at)
    if isinstance(H, AffineConeMap) and radii is None:
        L, ystar = min_gain_on_cone(H.Tx.T, H.cone.dual())
        L = 0.0 if math.isinf(L) else L
        cert = RegularityCertificate("openness", L, VERIFIED_EXACT, region=region)
        if ystar is not None:
            cert.worst_witness = {"dual_direction": ystar.tolist()}
        return cert
    if region is None:
        region = Box.around(np.concatenate([x0, p0]), 0.5, 3)
    if radii is None:
        radii = [0.05, 0.1]
    dirs = _sphere(H.ny, n_directions)
    worst, witness = math.inf, None
    n = 0
    for z in region.grid():
        x, p = z[:H.nx], z[H.nx:]
        y = _graph_point(H, x, p)
        if y is None:
            continue
        for rho in radii:
            for u in dirs:
                t = _max_step(H, x, p, rho, y, u, tol)
                n += 1
                if t / rho < worst - 1e-15:
                    worst, witness = t / rho, {"x": x.tolist(), "p": p.tolist(), "y": y.tolist(),
                                               "rho": rho, "direction": u.tolist()}
    cert = RegularityCertificate("openness", 0.0 if math.isinf(worst) else worst, VERIFIED_ON_GRID,
                                 region=region, grid={"radii": list(radii), "directions": len(dirs)},
                                 worst_witness=witness, tolerance=tol, n_checked=n)
    if n == 0:
        cert.notes.append("no graph points in region; vacuous")
    return cert


def _graph_point(H, x, p):
    if isinstance(H, AffineConeMap):
        return H.base(x, p)
    if isinstance(H, EpigraphicalMap):
        return H(x, p)
    # sampled: any stored value at (x, p)
    m = H._xp_dist(x, p) <= H.snap
    return H.ys[m][0] if m.any() else None


def _max_step(H, x, p, rho, y, u, tol, cap=1e3):
    hi = rho
    while H.image_distance(x, p, rho, y + hi * u) <= tol and hi < cap * rho:
        hi *= 2
    if hi >= cap * rho:
        return hi
    lo = 0.0
    while hi - lo > tol * rho:
        mid = 0.5 * (lo + hi)
        if H.image_distance(x, p, rho, y + mid * u) <= tol:
            lo = mid
        else:
            hi = mid
    return lo


def _sphere(dim, n):
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        t = 2 * np.pi * np.arange(n) / n
        return np.column_stack([np.cos(t), np.sin(t)])
    # fixed-seed random directions; the covering is approximate anyway
    rng = np.random.default_rng(12345)
    V = rng.normal(size=(n * dim, dim))
    return V / np.linalg.norm(V, axis=1, keepdims=True)


# -- grid sweeps of the regularity inequalities ------------------------------

def _sweep(kind, lhs_fn, rhs_fn, region, r, tol, denom_tol):
    worst_ratio, worst_pt = 0.0, None
    violation, bad_pt = 0.0, None
    n_checked = n_skipped = 0
    for z in region.grid():
        lhs, rhs = lhs_fn(z), rhs_fn(z)
        n_checked += 1
        if 0.0 < rhs < denom_tol:
            n_skipped += 1
            continue
        if math.isinf(lhs) and not math.isinf(rhs):
            gap = math.inf
        else:
            gap = lhs - r * rhs
        if gap > tol and gap > violation:
            violation, bad_pt = gap, {"point": z.tolist(), "lhs": _num(lhs), "rhs": _num(rhs),
                                      "violation": _num(gap)}
        if rhs >= denom_tol:
            ratio = lhs / rhs
            if ratio > worst_ratio + 1e-15:
                worst_ratio, worst_pt = ratio, {"point": z.tolist(), "lhs": _num(lhs), "rhs": _num(rhs)}
    status = REFUTED if bad_pt is not None else VERIFIED_ON_GRID
    cert = RegularityCertificate(kind, worst_ratio, status, region=region,
                                 grid={"resolution": list(region.resolution)},
                                 worst_witness=bad_pt if bad_pt is not None else worst_pt,
                                 tolerance=tol, n_checked=n_checked, n_skipped=n_skipped)
    cert.notes.append(f"tested modulus r={r:g}")
    if n_checked == 0:
        cert.notes.append("empty grid; verified vacuously")
    return cert


def verify_metric_regularity(H: SetValuedMap, region: Box, r: float, tol: float = 1e-7,
                             denom_tol: float = 1e-6) -> RegularityCertificate:
    """Check ``d(x, S(p)) <= r d(0, H(x, p))`` at every grid point of ``region``.

    ``region`` is a box over ``X x P``.  The returned modulus is the largest
    observed ratio over points with ``d(0, H(x, p)) >= denom_tol``; points with
    a positive denominator below ``denom_tol`` are skipped and counted.
    """
    if r <= 0:
        raise ValueError("modulus must be positive")
    zero = np.zeros(H.ny)
    return _sweep("metric",
                  lambda z: H.solution_distance(z[:H.nx], z[H.nx:]),
                  lambda z: H.value_distance(z[:H.nx], z[H.nx:], zero),
                  region, r, tol, denom_tol)


def verify_graphical_regularity(H: SetValuedMap, region: Box, r: float, tol: float = 1e-7,
                                denom_tol: float = 1e-6) -> RegularityCertificate:
    """Check ``d((p, x), Gr S) <= r d((x, p, 0), Gr H)`` on the grid of ``region``."""
    if r <= 0:
        raise ValueError("modulus must be positive")
    zero = np.zeros(H.ny)
    return _sweep("graphical",
                  lambda z: H.solution_graph_distance(z[:H.nx], z[H.nx:]),
                  lambda z: H.graph_distance(z[:H.nx], z[H.nx:], zero),
                  region, r, tol, denom_tol)


# -- coderivative conditions ---------------------------------------------------

def coderivative_rate(H: SetValuedMap, at, variant: str = "graph", region: Box | None = None,
                      n_directions: int = 2048) -> RegularityCertificate:
    """Coderivative rate ``c`` at a graph point.

    ``variant="graph"`` (affine-plus-cone maps only): the normal cone to
    ``Gr H_p`` is generated by ``(T_x^T a_i, -a_i)`` over the active rows, so
    ``c = min ||T_x^T y*||`` over unit ``y*`` in the cone of active ``a_i``.
    Nearby graph points have fewer active rows, so the reference point is the
    worst case.  No active rows means the normal cone is ``{0}`` and the
    condition is vacuous (``c = inf``).

    ``variant="epigraphical"`` treats the map as ``F + C`` and returns the
    largest ``c`` with ``c ||w|| <= ||J^T w||`` for every
    ``w in (C* ∩ unit sphere) + 2c * open ball``, ``J`` the x-Jacobian of ``F``
    (``T_x`` for affine maps).  The bound refers to ``c`` itself, so it is
    solved by bisection to 1e-6.  With ``region`` given, Jacobians at every
    region grid point are included.
    """
    x, p, y = _reference(H, at)
    if variant == "graph":
        _require_affine(H)
        N = graph_normal_cone(H, x, p, y)
        if len(N) == 0:
            cert = RegularityCertificate("coderivative_rate", math.inf, VERIFIED_EXACT)
            cert.notes.append("normal cone is {0}; condition vacuous")
            return cert
        ystar_cone = PolyhedralCone.from_generators(-N[:, H.nx:])
        c, ystar = min_gain_on_cone(H.Tx.T, ystar_cone)
        cert = RegularityCertificate("coderivative_rate", c, VERIFIED_EXACT,
                                     worst_witness={"y_star": ystar.tolist()})
        return cert
    if variant != "epigraphical":
        raise ValueError(f"unknown variant {variant!r}")
    if isinstance(H, AffineConeMap):
        jacs = [H.Tx]
    elif isinstance(H, EpigraphicalMap):
        pts = [np.concatenate([x, p])] if region is None else list(region.grid())
        jacs = [H.jacobian(z[:H.nx], z[H.nx:])[0] for z in pts]
    else:
        raise UnsupportedMapError("epigraphical rate needs an affine or epigraphical map")
    dual = H.cone.dual()
    U = _sphere(H.ny, n_directions)
    dist = np.array([dual.distance(u) for u in U])
    gains = np.min(np.stack([np.linalg.norm(U @ J, axis=1) for J in jacs]), axis=0)

    def g(c):
        mask = dist < 2 * c
        return float(np.min(gains[mask])) if mask.any() else math.inf

    lo, hi = 0.0, float(np.max(gains)) + 1.0
    while hi - lo > 1e-7:
        mid = 0.5 * (lo + hi)
        if g(mid) >= mid:
            lo = mid
        else:
            hi = mid
    exact = isinstance(H, AffineConeMap) and H.ny == 1
    cert = RegularityCertificate("coderivative_rate", lo, VERIFIED_EXACT if exact else VERIFIED_ON_GRID,
                                 region=region, grid={"directions": len(U)}, tolerance=1e-6)
    cert.notes.append("epigraphical variant")
    return cert


def epigraphical_radius(c, a, r):
    """Radius ``min(((c/(c+1)) - a/(a+1)) / 2, r/(a+1))`` for the epigraphical
    openness inclusion; exact for :class:`fractions.Fraction` input."""
    if not (0 < a < c):
        raise ValueError("need 0 < a < c")
    if r <= 0:
        raise ValueError("need r > 0")
    return min((c / (c + 1) - a / (a + 1)) / 2, r / (a + 1))


def verify_epigraphical_openness(G: SetValuedMap, at, a: float, certificate_c: float, r: float,
                                 n_rho: int = 10, resolution: float = 1e-3,
                                 tol: float | None = None) -> RegularityCertificate:
    """Covering check of ``B(y, rho a) ⊂ G(B(x, rho)) + C`` for ``rho`` in ``(0, eps]``.

    ``eps = epigraphical_radius(certificate_c, a, r)`` and the radii are
    ``eps * k / n_rho`` for ``k = 1..n_rho``.  Each open ball in ``Y`` is covered
    by a grid of spacing ``resolution``; a grid point counts as covered when
    its distance to the image is at most ``tol`` (default ``resolution``).
    The parameter stays fixed at the reference value.
    """
    x, p, y = _reference(G, at)
    eps = float(epigraphical_radius(certificate_c, a, r))
    tol = resolution if tol is None else tol
    radii = [eps * k / n_rho for k in range(1, n_rho + 1)]
    worst, bad = 0.0, None
    n = 0
    for rho in radii:
        for q in _ball_grid(y, rho * a, resolution):
            d = G.image_distance(x, p, rho, q)
            n += 1
            if d > worst:
                worst = d
                if d > tol and bad is None:
                    bad = {"rho": rho, "q": q.tolist(), "distance": _num(d)}
    status = REFUTED if bad is not None else VERIFIED_ON_GRID
    cert = RegularityCertificate("openness", a, status,
                                 grid={"radii": radii, "resolution": resolution},
                                 worst_witness=bad, tolerance=tol, n_checked=n)
    cert.notes.append(f"epsilon={eps!r}; max uncovered distance {worst:.3e}")
    return cert


def _ball_grid(center, radius, h):
    """Grid points of spacing ``h`` inside the open ball, center included."""
    m = int(np.floor(radius / h))
    ax = np.arange(-m, m + 1) * h
    mesh = np.meshgrid(*([ax] * len(center)), indexing="ij")
    pts = np.stack([g.ravel() for g in mesh], axis=1)
    pts = pts[np.linalg.norm(pts, axis=1) < radius]
    return pts + center
