"""
Weak minimizers and multiplier certificates
===========================================

Two objectives ``x^2`` and ``(x - 1)^2`` under the constraint of fixture V1.
A grid oracle finds the weakly minimal points, and an LP produces a
multiplier certificate at each of them.  The certificates do not depend on
the scalarization direction.
"""
import numpy as np

from solidopt import VectorProblem, load_fixture, necessary_condition_parametric, weak_front_oracle

fx = load_fixture("V1")

for e in ([1.0, 1.0], [3.0, 1.0]):
    prob = VectorProblem(fx.g, fx.g.jacobian, fx.H, fx.K, np.array(e), fx.region, fx.lipschitz)
    front, _ = weak_front_oracle(prob, [1.0])
    print(f"e={e}: {len(front)} weak minimizers in [{front.min():.2f}, {front.max():.2f}]")

# %%
# Inside the front the multiplier rule holds; at ``x = 2`` the LP is
# infeasible and serves as a refutation.
for x in ([0.5], [2.0]):
    cert = necessary_condition_parametric(prob, x, [1.0])
    print(x, cert.status, "residual", cert.residual)
