"""Gerstewitz (Tammer--Weidner) scalarizing functional for a solid cone.

For a solid cone ``K`` and a direction ``e`` in its interior,

    s_e(z) = min { lam : lam * e - z in K }.

With ``K = {w : a_i . w >= 0}`` the constraint reads ``lam * (a_i . e) >= a_i . z``
and every ``a_i . e`` is positive, so the minimum is the largest ratio
``(a_i . z) / (a_i . e)``.  The rows attaining it are exactly the active
constraints of the linear program, which is what the subdifferential uses.
"""
from __future__ import annotations

import numpy as np

from .cones import TOL_FEAS, ConeError, PolyhedralCone, Polytope

__all__ = ["GerstewitzFunctional", "ScalarizationError"]


class ScalarizationError(RuntimeError):
    """Internal inconsistency (empty subdifferential, unbounded functional)."""


class GerstewitzFunctional:
    """The functional ``s_e`` for a pair (K, e).

    Parameters
    ----------
    cone : PolyhedralCone
        Ordering cone ``K``; must be solid.
    direction : array_like
        ``e`` with ``e`` in ``int K``.

    Attributes
    ----------
    lipschitz : float
        ``L_e = 1 / d(e, bd K)``.
    """

    def __init__(self, cone: PolyhedralCone, direction):
        e = np.asarray(direction, dtype=float)
        if not cone.is_solid:
            raise ConeError("ordering cone must be solid")
        if not cone.contains_interior(e):
            raise ConeError("direction must lie in the interior of the cone")
        if len(cone.halfspaces) == 0:
            raise ScalarizationError("s_e is identically -inf on the whole space")
        self.cone = cone
        self.direction = e
        self._A = cone.halfspaces
        self._Ae = self._A @ e
        self.lipschitz = 1.0 / cone.distance_to_boundary(e)

    def __repr__(self):
        return f"GerstewitzFunctional(e={self.direction.tolist()}, L_e={self.lipschitz:.6g})"

    def __call__(self, z):
        return self.evaluate(z)

    def evaluate(self, z):
        """``s_e(z)``; a stack of points gives a vector of values."""
        z = np.asarray(z, dtype=float)
        if z.shape[-1] != self.cone.dim:
            raise ConeError("dimension mismatch")
        vals = np.max((z @ self._A.T) / self._Ae, axis=-1)
        return float(vals) if np.ndim(vals) == 0 else vals

    def active_rows(self, u, tol: float = TOL_FEAS) -> np.ndarray:
        ratios = (self._A @ np.asarray(u, float)) / self._Ae
        return np.nonzero(ratios >= ratios.max() - tol)[0]

    def subdifferential(self, u) -> Polytope:
        """``{v in K* : v . e = 1, v . u = s_e(u)}`` as a tolerant H-polytope.

        ``K*`` is described by the generators of ``K`` as halfspace normals.
        """
        u = np.asarray(u, dtype=float)
        s = self.evaluate(u)
        G = self.cone.generators
        E = np.vstack([self.direction, u])
        P = Polytope(G, np.zeros(len(G)), E, [1.0, s], eq_tol=TOL_FEAS * max(1.0, np.linalg.norm(u)))
        if len(P.vertices()) == 0:
            raise ScalarizationError("empty subdifferential; tolerance problem")
        return P

    def lipschitz_constant(self) -> float:
        return self.lipschitz

    def nonneg_on_set(self, A, tol: float = TOL_FEAS) -> bool:
        """True iff ``s_e(a) >= -tol`` for every row ``a`` of ``A``."""
        A = np.asarray(A, dtype=float)
        if A.size == 0:
            return True
        return bool(np.min(self.evaluate(np.atleast_2d(A))) >= -tol)
