"""
Regularity of a constraint map
==============================

The map ``H(x, p) = 1 - x - p + R_+`` describes the constraint ``x + p >= 1``.
We estimate its openness rate at a reference point, then verify metric and
graphical regularity on a grid of the square ``[-1, 1]^2``.
"""
from solidopt import (Box, coderivative_rate, estimate_openness_rate, load_fixture,
                      verify_graphical_regularity, verify_metric_regularity)

fx = load_fixture("L1")
H = fx.H
at = ([0.0], [1.0], [0.0])

# %%
# The openness rate is computed exactly for affine cone maps.
cert = estimate_openness_rate(H, at)
print("openness:", cert.modulus, cert.status)
print("coderivative rate:", coderivative_rate(H, at).modulus)

# %%
# Grid sweeps bound the moduli from below.  A certificate is only
# ``verified_on_grid``; nothing is claimed between nodes.
square = Box((-1.0, -1.0), (1.0, 1.0), 21)
metric = verify_metric_regularity(H, square, 1.0)
graph = verify_graphical_regularity(H, square, 1.0)
print("metric:", metric.modulus, metric.status)
print("graphical:", graph.modulus, graph.status,
      "(cell", square.cell_diameter(split=(1, 1)), ")")

# %%
# A modulus that is too small is refuted with a witness.
bad = verify_metric_regularity(H, square, 0.5)
print(bad.status, bad.worst_witness)
