"""Polyhedral convex cones and the polytopes cut out of their duals.

A :class:`PolyhedralCone` ``K`` in ``R^n`` is stored by its halfspace
normals (``K = {z : a_i . z >= 0}``) and/or its generating rays
(``K = cone(g_j)``).  Whichever description is missing is computed on demand
by brute-force extreme-ray enumeration, which is exact and cheap at the
dimensions this package targets (n <= 6 or so).

Duality is a representation swap: the halfspace normals of ``K`` generate
``K*`` and the generators of ``K`` are halfspace normals of ``K*``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import linprog, nnls

__all__ = [
    "TOL_FEAS",
    "TOL_STRICT",
    "ConeError",
    "EuclideanSpace",
    "PolyhedralCone",
    "Polytope",
    "dual_cone",
    "extreme_rays",
    "is_weak_minimal",
    "nonnegative_orthant",
]

TOL_FEAS = 1e-9
TOL_STRICT = 1e-9
_RANK_TOL = 1e-10


class ConeError(ValueError):
    """Raised for invalid cone input or a query outside an operation's domain."""


@dataclass(frozen=True)
class EuclideanSpace:
    """``R^dim`` with the Euclidean norm; products use the sum of norms."""

    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be positive")

    def norm(self, v) -> float:
        return float(np.linalg.norm(np.asarray(v, dtype=float)))

    @staticmethod
    def product_norm(*parts) -> float:
        """Sum norm of a point of a product space given its components."""
        return float(sum(np.linalg.norm(np.atleast_1d(np.asarray(q, float))) for q in parts))


def _as_rows(M, dim):
    M = np.asarray(M if M is not None else np.zeros((0, dim)), dtype=float)
    if M.size == 0:
        return np.zeros((0, dim))
    M = np.atleast_2d(M)
    if M.shape[1] != dim:
        raise ConeError(f"rows have length {M.shape[1]}, expected {dim}")
    return M


def _normalize_rows(M, tol=1e-12):
    """Scale rows to unit length, drop zero rows and duplicates (order kept)."""
    if len(M) == 0:
        return M
    norms = np.linalg.norm(M, axis=1)
    M = M[norms > tol] / norms[norms > tol, None]
    M[np.abs(M) < 1e-14] = 0.0  # rounding residue from null-space bases
    keep = []
    for i, row in enumerate(M):
        if not any(np.allclose(row, M[j], atol=1e-9) for j in keep):
            keep.append(i)
    return M[keep]


def _nullspace(M, n):
    if len(M) == 0:
        return np.eye(n)
    return null_space(M, rcond=_RANK_TOL)


def extreme_rays(A, dim: int, tol: float = 1e-10) -> np.ndarray:
    """Generators of ``{z in R^dim : A z >= 0}``.

    The lineality space enters as a ± pair per basis vector.  The pointed part
    is enumerated by taking every set of ``d - 1`` rows (``d`` the dimension
    of the orthogonal complement of the lineality space) and keeping the
    one-dimensional kernels that satisfy all inequalities.
    """
    A = _normalize_rows(_as_rows(A, dim))
    lin = _nullspace(A, dim)
    gens = [v for v in lin.T] + [-v for v in lin.T]
    d = dim - lin.shape[1]
    if d > 0:
        B = lin.T
        for rows in combinations(range(len(A)), d - 1):
            M = np.vstack([A[list(rows)], B]) if (rows or len(B)) else np.zeros((0, dim))
            N = _nullspace(M, dim)
            if N.shape[1] != 1:
                continue
            v = N[:, 0]
            for s in (v, -v):
                if np.all(A @ s >= -tol):
                    gens.append(s)
                    break
    if not gens:
        return np.zeros((0, dim))
    return _normalize_rows(np.array(gens))


class PolyhedralCone:
    """Closed convex polyhedral cone ``{z : a_i . z >= 0}`` = ``cone(g_j)``.

    Parameters
    ----------
    dim : int
        Ambient dimension.
    halfspaces : array_like, shape (m, dim), optional
        Inward normals ``a_i``.  An empty array means the whole space.
    generators : array_like, shape (k, dim), optional
        Rays ``g_j``.  An empty array means the cone ``{0}``.

    At least one description must be given.  When both are supplied they are
    kept as given; :meth:`consistency_violations` reports disagreements.
    Rows are rescaled to unit length.
    """

    def __init__(self, dim: int, halfspaces=None, generators=None):
        if dim < 1:
            raise ConeError("dimension must be positive")
        if halfspaces is None and generators is None:
            raise ConeError("need halfspaces or generators")
        self.dim = int(dim)
        self._h = None if halfspaces is None else _normalize_rows(_as_rows(halfspaces, dim))
        self._g = None if generators is None else _normalize_rows(_as_rows(generators, dim))

    @classmethod
    def from_halfspaces(cls, A):
        A = np.atleast_2d(np.asarray(A, float))
        return cls(A.shape[1], halfspaces=A)

    @classmethod
    def from_generators(cls, G, dim=None):
        G = np.asarray(G, float)
        if G.size == 0:
            if dim is None:
                raise ConeError("dim required for an empty generator list")
            return cls(dim, generators=np.zeros((0, dim)))
        G = np.atleast_2d(G)
        return cls(G.shape[1], generators=G)

    @classmethod
    def whole_space(cls, dim):
        return cls(dim, halfspaces=np.zeros((0, dim)))

    @classmethod
    def zero(cls, dim):
        return cls(dim, generators=np.zeros((0, dim)))

    def __repr__(self):
        return f"PolyhedralCone(dim={self.dim}, halfspaces={self.halfspaces.tolist()})"

    @cached_property
    def halfspaces(self) -> np.ndarray:
        if self._h is not None:
            return self._h
        # H-rep of cone(G) = generators of its dual {h : G h >= 0}
        return extreme_rays(self._g, self.dim)

    @cached_property
    def generators(self) -> np.ndarray:
        if self._g is not None:
            return self._g
        return extreme_rays(self._h, self.dim)

    # -- structural flags ---------------------------------------------------

    @cached_property
    def is_solid(self) -> bool:
        """Interior nonempty iff some ``z`` has ``a_i . z >= 1`` for all i."""
        A = self.halfspaces
        if len(A) == 0:
            return True
        res = linprog(np.zeros(self.dim), A_ub=-A, b_ub=-np.ones(len(A)),
                      bounds=[(None, None)] * self.dim, method="highs")
        return res.status == 0

    @cached_property
    def is_pointed(self) -> bool:
        """``K ∩ -K = {0}``, i.e. the halfspace normals span the space."""
        A = self.halfspaces
        if len(A) == 0:
            return False
        return np.linalg.matrix_rank(A, tol=_RANK_TOL) == self.dim

    # -- queries --------------------------------------------------------------

    def _check(self, z):
        z = np.asarray(z, dtype=float)
        if z.shape[-1] != self.dim:
            raise ConeError(f"point of dimension {z.shape[-1]} for a cone in R^{self.dim}")
        return z

    def contains(self, z, tol: float = TOL_FEAS):
        """Membership ``a_i . z >= -tol``.  Accepts a point or a stack of points."""
        z = self._check(z)
        A = self.halfspaces
        if len(A) == 0:
            return True if z.ndim == 1 else np.ones(z.shape[:-1], bool)
        return np.all(z @ A.T >= -tol, axis=-1)

    def contains_interior(self, z, tol: float = TOL_STRICT):
        """Strict membership ``a_i . z > tol * ||z||``; the boundary is excluded."""
        if not self.is_solid:
            raise ConeError("cone has empty interior")
        z = self._check(z)
        A = self.halfspaces
        scale = tol * np.linalg.norm(z, axis=-1)
        if len(A) == 0:
            return True if z.ndim == 1 else np.ones(z.shape[:-1], bool)
        return np.all(z @ A.T > scale[..., None], axis=-1)

    def dual(self) -> "PolyhedralCone":
        """``K* = {y : y . z >= 0 for all z in K}`` by representation swap."""
        return PolyhedralCone(self.dim, halfspaces=self.generators, generators=self.halfspaces)

    def distance_to_boundary(self, e) -> float:
        """``d(e, bd K)`` for an interior point ``e``.

        For a point inside a polyhedron this is the smallest distance to a
        bounding hyperplane; redundant rows never undercut it.
        """
        e = self._check(e)
        if not self.contains_interior(e):
            raise ConeError("point is not in the interior of the cone")
        A = self.halfspaces
        if len(A) == 0:
            return float("inf")
        return float(np.min(A @ e))

    def project(self, w) -> np.ndarray:
        """Euclidean projection onto the cone (NNLS over the generators)."""
        w = self._check(w)
        G = self.generators
        if len(G) == 0:
            return np.zeros(self.dim)
        if len(self.halfspaces) == 0:
            return w.copy()
        mu, _ = nnls(G.T, w)
        return G.T @ mu

    def distance(self, w) -> float:
        """Euclidean distance from ``w`` to the cone."""
        w = self._check(w)
        if self.dim == 1:
            return _distance_1d(self, float(w[0]))
        if np.all(w @ self.halfspaces.T >= 0):
            return 0.0
        return float(np.linalg.norm(w - self.project(w)))

    def distance_many(self, W) -> np.ndarray:
        W = np.atleast_2d(self._check(W))
        if self.dim == 1:
            lo, hi = _interval_1d(self)
            return np.maximum(np.maximum(lo - W[:, 0], W[:, 0] - hi), 0.0)
        return np.array([self.distance(w) for w in W])

    def sample(self, n: int, rng) -> np.ndarray:
        """Random members: nonnegative combinations of the generators."""
        G = self.generators
        if len(G) == 0:
            return np.zeros((n, self.dim))
        return rng.exponential(size=(n, len(G))) @ G

    def consistency_violations(self, rng=None, n_samples: int = 200, tol: float = 1e-7):
        """Disagreements between user-supplied H- and V-representations.

        Returns a list of human-readable messages; empty when consistent or
        when only one description was given.
        """
        if self._h is None or self._g is None:
            return []
        out = []
        for j, g in enumerate(self._g):
            bad = np.nonzero(self._h @ g < -tol)[0]
            if len(bad):
                out.append(f"generator {j} {g.round(6).tolist()} violates halfspace {int(bad[0])}")
        if rng is None:
            rng = np.random.default_rng(0)
        # sampled H-rep members must be nonnegative combinations of generators
        pts = _sample_hrep(self._h, self.dim, n_samples, rng)
        for z in pts:
            if len(self._g) == 0:
                resid = np.linalg.norm(z)
            else:
                _, resid = nnls(self._g.T, z)
            if resid > tol * max(1.0, np.linalg.norm(z)):
                out.append(f"halfspace member {z.round(6).tolist()} is not generated (residual {resid:.2e})")
                break
        return out


def _interval_1d(cone):
    lo, hi = -np.inf, np.inf
    for a in cone.halfspaces[:, 0]:
        if a > 0:
            lo = max(lo, 0.0)
        else:
            hi = min(hi, 0.0)
    return lo, hi


def _distance_1d(cone, w):
    lo, hi = _interval_1d(cone)
    return float(max(lo - w, w - hi, 0.0))


def _sample_hrep(A, dim, n, rng):
    """Points of ``{A z >= 0}`` by rejection from the sphere, topped up with rays."""
    Z = rng.normal(size=(max(20 * n, 200), dim))
    if len(A):
        Z = Z[np.all(Z @ A.T >= 0, axis=1)]
    extra = extreme_rays(A, dim)
    pts = np.vstack([Z[:n], extra]) if len(extra) else Z[:n]
    return pts


def dual_cone(cone: PolyhedralCone) -> PolyhedralCone:
    return cone.dual()


def nonnegative_orthant(dim: int) -> PolyhedralCone:
    return PolyhedralCone(dim, halfspaces=np.eye(dim), generators=np.eye(dim))


def is_weak_minimal(R, r, cone: PolyhedralCone) -> bool:
    """True iff ``(R - r) ∩ -int K`` is empty."""
    R = np.asarray(R, dtype=float)
    if R.size == 0:
        return True
    R = np.atleast_2d(R)
    r = np.asarray(r, dtype=float)
    return not bool(np.any(cone.contains_interior(r - R)))


class Polytope:
    """Bounded polyhedron ``{v : G v >= h, E v = f}`` with tolerant equalities.

    Equality rows may be dependent or (within ``eq_tol``) redundant; vertex
    enumeration works on an orthonormal basis of their row space.
    """

    def __init__(self, G, h, E, f, eq_tol: float = TOL_FEAS):
        self.G = np.atleast_2d(np.asarray(G, float))
        self.h = np.asarray(h, float).reshape(-1)
        self.E = np.atleast_2d(np.asarray(E, float))
        self.f = np.asarray(f, float).reshape(-1)
        self.dim = self.G.shape[1] if self.G.size else self.E.shape[1]
        self.eq_tol = eq_tol

    def contains(self, v, tol: float = TOL_FEAS) -> bool:
        v = np.asarray(v, float)
        ok_in = np.all(self.G @ v >= self.h - tol) if len(self.G) else True
        return bool(ok_in and np.all(np.abs(self.E @ v - self.f) <= max(tol, self.eq_tol)))

    def vertices(self, tol: float = 1e-9) -> np.ndarray:
        n = self.dim
        v0, *_ = np.linalg.lstsq(self.E, self.f, rcond=None)
        if np.any(np.abs(self.E @ v0 - self.f) > max(self.eq_tol, tol) * 10):
            return np.zeros((0, n))
        U, s, Vt = np.linalg.svd(self.E)
        rank = int(np.sum(s > _RANK_TOL * max(1.0, s[0] if len(s) else 1.0)))
        Eb = Vt[:rank]
        fb = Eb @ v0
        k = n - rank
        found = []
        G = self.G if len(self.G) else np.zeros((0, n))
        for rows in combinations(range(len(G)), k):
            M = np.vstack([Eb, G[list(rows)]])
            rhs = np.concatenate([fb, self.h[list(rows)]])
            if np.linalg.matrix_rank(M, tol=_RANK_TOL) < n:
                continue
            v = np.linalg.solve(M, rhs) if M.shape[0] == n else np.linalg.lstsq(M, rhs, rcond=None)[0]
            if self.contains(v, tol=1e-8):
                if not any(np.allclose(v, w, atol=1e-9) for w in found):
                    found.append(v)
        if k == 0 and self.contains(v0, tol=1e-8):
            found = [v0]
        return np.array(found) if found else np.zeros((0, n))
