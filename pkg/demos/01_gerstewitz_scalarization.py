"""
Scalarizing a cone order
========================

A solid cone ``K`` and a direction ``e`` in its interior turn vector
comparisons into a single real function ``s_e``.  Here we evaluate it for the
orthant and a skewed cone, look at its subdifferential at a kink and check
that it is monotone along the order.
"""
import numpy as np

from solidopt import GerstewitzFunctional, PolyhedralCone, nonnegative_orthant

# %%
# For the orthant with ``e = (1, 1)`` the functional is the largest coordinate.
s = GerstewitzFunctional(nonnegative_orthant(2), [1.0, 1.0])
Z = np.array([[1.0, -2.0], [0.5, 0.5], [-1.0, -3.0]])
print("s_e(z) =", s(Z))
print("Lipschitz constant:", s.lipschitz)

# %%
# A cone generated by (1, 0) and (1, 1) is not self-dual.  Its dual is
# computed by swapping representations.
K = PolyhedralCone.from_generators([[1.0, 0.0], [1.0, 1.0]])
print(K)
print("dual generators:\n", K.dual().generators)

se = GerstewitzFunctional(K, [2.0, 1.0])
print("distance from e to the boundary:", K.distance_to_boundary(se.direction))

# %%
# At a point where several halfspace rows are active the subdifferential is
# a polytope.  Its vertices are subgradients ``v`` with ``<v, e> = 1``.
u = np.zeros(2)
for v in se.subdifferential(u).vertices():
    print("vertex", v, " <v, e> =", v @ se.direction)

# %%
# Strict monotonicity: ``s_e(u) < s_e(u + k)`` whenever ``k`` is interior to ``K``.
rng = np.random.default_rng(0)
U = rng.normal(size=(1000, 2))
inc = rng.uniform(0.01, 1, size=(1000, 2)) @ K.generators
print("max s(u) - s(u + k):", np.max(se(U) - se(U + inc)))
