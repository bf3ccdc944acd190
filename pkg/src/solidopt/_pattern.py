"""Deterministic compass (coordinate pattern) search inside a box."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class SearchResult:
    x: np.ndarray
    fun: float
    nfev: int
    converged: bool
    step: float

    def to_record(self):
        return {"x": self.x.tolist(), "fun": self.fun, "nfev": self.nfev,
                "converged": self.converged, "final_step": self.step}


def poll_directions(n):
    """Coordinate directions ``±e_i`` followed by the diagonals ``±e_i ± e_j``.

    The diagonals let the search slide along kinks such as ``x + p = c`` that
    stall a purely coordinate poll.
    """
    eye = np.eye(n)
    dirs = [s * eye[i] for i in range(n) for s in (1.0, -1.0)]
    for i in range(n):
        for j in range(i + 1, n):
            for si in (1.0, -1.0):
                for sj in (1.0, -1.0):
                    dirs.append(si * eye[i] + sj * eye[j])
    return np.array(dirs)


def compass_search(fn, start, box, step=None, tol=1e-6, max_evals=100_000):
    """Minimize ``fn`` by polling ``x + step * d`` over :func:`poll_directions`.

    The first strict decrease is accepted; a failed full poll halves the step.
    Points outside ``box`` are not evaluated.  Stops once the step drops
    below ``tol`` (converged) or after ``max_evals`` evaluations (not
    converged).  The result is stationary only in the pattern-search sense.
    """
    x = np.array(start, dtype=float)
    lo, hi = np.array(box.lower), np.array(box.upper)
    if step is None:
        step = float(np.max(hi - lo)) / 2
    fx = float(fn(x))
    nfev = 1
    dirs = poll_directions(len(x))
    while step >= tol:
        if nfev >= max_evals:
            return SearchResult(x, fx, nfev, False, step)
        moved = False
        for d in dirs:
            y = x + step * d
            if np.any(y < lo - 1e-15) or np.any(y > hi + 1e-15):
                continue
            fy = float(fn(y))
            nfev += 1
            if fy < fx:
                x, fx, moved = y, fy, True
                break
            if nfev >= max_evals:
                return SearchResult(x, fx, nfev, False, step)
        if not moved:
            step /= 2
    return SearchResult(x, fx, nfev, True, step)
