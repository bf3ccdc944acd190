"""Clarke exact penalization of constrained problems ``min f s.t. 0 in H(x, p)``.

With ``f`` L-Lipschitz near a local solution and a regularity modulus ``r``
for the constraint map, the constraint can be traded for the penalty
``L * r * d(0, H(x, p))`` (parametric, ``p`` fixed) or
``L * r * d((x, p, 0), Gr H)`` (joint in ``(x, p)``).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._pattern import SearchResult, compass_search
from .setmaps import Box, SetValuedMap

__all__ = [
    "PenalizedProblem",
    "PenaltyReport",
    "check_exact_penalty",
    "minimize_local",
    "minimize_multistart",
    "penalize_joint",
    "penalize_parametric",
    "validate_lipschitz",
]

PARAMETRIC = "parametric"
JOINT = "joint"


@dataclass
class PenalizedProblem:
    """Objective, constraint map and the constants that make a penalty exact.

    ``region`` is a box over ``X x P``; in parametric mode only its X-slice
    is used.  ``weight`` overrides the default penalty weight ``L * r``.
    """

    objective: object
    lipschitz: float
    H: SetValuedMap
    modulus: float
    region: Box
    mode: str = PARAMETRIC
    weight: float | None = None

    def __post_init__(self):
        if self.lipschitz <= 0 or self.modulus <= 0:
            raise ValueError("Lipschitz constant and modulus must be positive")
        if self.mode not in (PARAMETRIC, JOINT):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.region.dim != self.H.nx + self.H.np_:
            raise ValueError("region must live in X x P")

    @property
    def penalty_weight(self) -> float:
        return self.lipschitz * self.modulus if self.weight is None else self.weight

    @property
    def x_region(self) -> Box:
        return self.region.slice(0, self.H.nx)

    def f(self, x, p) -> float:
        return float(self.objective(np.atleast_1d(x), np.atleast_1d(p)))


def penalize_parametric(prob: PenalizedProblem, p, weight=None):
    """``x -> f(x, p) + w * d(0, H(x, p))`` with ``w = L * r`` by default."""
    w = prob.penalty_weight if weight is None else weight
    p = np.atleast_1d(np.asarray(p, float))
    zero = np.zeros(prob.H.ny)

    def phi(x):
        return prob.f(x, p) + w * prob.H.value_distance(x, p, zero)

    return phi


def penalize_joint(prob: PenalizedProblem, weight=None):
    """``v -> f(x, p) + w * d((x, p, 0), Gr H)`` for the stacked ``v = (x, p)``."""
    w = prob.penalty_weight if weight is None else weight
    nx = prob.H.nx
    zero = np.zeros(prob.H.ny)

    def phi(v):
        v = np.asarray(v, float)
        return prob.f(v[:nx], v[nx:]) + w * prob.H.graph_distance(v[:nx], v[nx:], zero)

    return phi


def minimize_local(fn, start, region: Box, tol: float = 1e-6, max_evals: int = 100_000) -> SearchResult:
    """Derivative-free compass search from ``start`` inside ``region``.

    The step starts at half the widest side of the box and halves after each
    unsuccessful poll until it falls below ``tol``.  ``converged`` is False
    when ``max_evals`` runs out first.
    """
    start = np.atleast_1d(np.asarray(start, float))
    if not region.contains(start):
        raise ValueError("start point outside the region")
    return compass_search(fn, start, region, tol=tol, max_evals=max_evals)


def minimize_multistart(fn, starts, region: Box, tol: float = 1e-6) -> SearchResult:
    """Best of several local searches; ties go to the lexicographically smaller point."""
    results = [minimize_local(fn, s, region, tol) for s in starts]
    return min(results, key=lambda r: (r.fun, tuple(r.x)))


@dataclass
class PenaltyReport:
    ok: bool
    reference_value: float
    max_violation: float
    witness: list | None
    n_checked: int
    weight: float
    notes: list = field(default_factory=list)

    def to_record(self):
        return {"ok": self.ok, "reference_value": self.reference_value,
                "max_violation": self.max_violation, "witness": self.witness,
                "n_checked": self.n_checked, "weight": self.weight, "notes": list(self.notes)}


def check_exact_penalty(prob: PenalizedProblem, solution, p=None, weight=None,
                        tol: float = 1e-9) -> PenaltyReport:
    """Check ``f(solution) <= penalized(z)`` at every grid point of the region.

    Parametric mode (``p`` given): ``solution`` is ``x̄`` and the grid is the
    X-slice of the region.  Joint mode (``p`` None): ``solution`` is the
    stacked ``(x̄, p̄)`` and the grid is the whole region.
    """
    w = prob.penalty_weight if weight is None else weight
    nx = prob.H.nx
    solution = np.atleast_1d(np.asarray(solution, float))
    if p is not None:
        if not prob.H.is_feasible(solution, p):
            raise ValueError("reference point is not feasible")
        ref = prob.f(solution, p)
        phi = penalize_parametric(prob, p, w)
        grid = prob.x_region.grid()
    else:
        if not prob.H.is_feasible(solution[:nx], solution[nx:]):
            raise ValueError("reference point is not feasible")
        ref = prob.f(solution[:nx], solution[nx:])
        phi = penalize_joint(prob, w)
        grid = prob.region.grid()
    worst, witness = 0.0, None
    for z in grid:
        v = ref - phi(z)
        if v > worst:
            worst, witness = v, z.tolist()
    ok = worst <= tol
    return PenaltyReport(ok, ref, worst, None if ok else witness, len(grid), w)


def validate_lipschitz(fn, lipschitz: float, region: Box, nx: int, joint: bool = False,
                       n_samples: int = 2000, rng=None, slack: float = 0.01):
    """Sampled difference quotients against a declared Lipschitz constant.

    ``fn(x, p)`` may be scalar or vector valued (Euclidean norm on values).
    By default pairs share ``p`` and only ``x`` varies; with ``joint=True``
    both vary and distances use the sum norm on ``X x P``.  Returns ``None``
    or the worst pair ``(z1, z2, quotient)`` exceeding ``(1 + slack) * L``.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    lo, hi = np.array(region.lower), np.array(region.upper)
    worst = None
    for _ in range(n_samples):
        z1 = rng.uniform(lo, hi)
        z2 = rng.uniform(lo, hi)
        if not joint:
            z2[nx:] = z1[nx:]
        den = np.linalg.norm(z1[:nx] - z2[:nx]) + np.linalg.norm(z1[nx:] - z2[nx:])
        if den < 1e-12:
            continue
        num = np.linalg.norm(np.atleast_1d(fn(z1[:nx], z1[nx:])) - np.atleast_1d(fn(z2[:nx], z2[nx:])))
        q = num / den
        if q > lipschitz * (1 + slack) and (worst is None or q > worst[2]):
            worst = (z1.tolist(), z2.tolist(), float(q))
    return worst
