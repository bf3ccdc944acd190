"""
Exact penalization
==================

Minimize ``x^2 + p^2`` under ``x + p >= 1``.  Adding the distance to the
feasible set, weighted by the Lipschitz constant times the regularity
modulus, makes the problem unconstrained without moving its local minimizers.
"""
from solidopt import (Box, PenalizedProblem, check_exact_penalty, load_fixture, minimize_local,
                      penalize_joint, penalize_parametric)
from solidopt.penalty import JOINT

fx = load_fixture("L1")
square = Box((-1.0, -1.0), (1.0, 1.0), 21)


def f(x, p):
    return float(fx.f(x, p)[0])


# %%
# Parametric mode: ``p`` is fixed and only ``x`` moves.
par = PenalizedProblem(f, fx.lipschitz, fx.H, 1.0, square)
print("weight L*r =", par.penalty_weight)
res = minimize_local(penalize_parametric(par, [1.0]), [0.9], par.x_region, tol=1e-7)
print("minimizer at p=1:", res.x)

# %%
# Joint mode: ``(x, p)`` move together and the minimizer sits on the line.
joint = PenalizedProblem(f, fx.lipschitz, fx.H, 1.0, square, mode=JOINT)
res = minimize_local(penalize_joint(joint), [0.9, 0.9], joint.x_region, tol=1e-7)
print("joint minimizer:", res.x)
print("check at (1/2, 1/2):", check_exact_penalty(joint, [0.5, 0.5]).ok)

# %%
# With a quarter of the weight the penalized function dips below the
# constrained minimum, so the penalty is no longer exact.
under = check_exact_penalty(joint, [0.5, 0.5], weight=fx.lipschitz / 4)
print("weight L/4:", under.ok, "violation", under.max_violation, "at", under.witness)
