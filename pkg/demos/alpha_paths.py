"""
Alpha-paths of a geometric Liu process
======================================

Each confidence level alpha gives a deterministic path.  For the geometric
model dV = mu V dt + sigma V dC the paths are known in closed form; a generic
RK4 solve of the same equation should land on them.
"""

import numpy as np

from uwarrant import (
    GeometricLiuSpec,
    alpha_path_family,
    expected_monotone_functional,
    inverse_distribution_at,
    solve_alpha_path,
)

spec = GeometricLiuSpec(v0=5000.0, mu=0.02, sigma=0.04)
times = np.linspace(0.0, 3.0, 7)

closed = alpha_path_family(spec, times, [0.05, 0.5, 0.95])
for path in closed:
    print(f"alpha={path.alpha:4.2f}:", np.round(path.values, 2))

# same equation, solved numerically
numeric = solve_alpha_path(spec.as_ude(), 5000.0, 3.0, 0.95, steps=2000)
print("RK4 terminal value   :", numeric.values[-1])
print("closed terminal value:", closed[-1].values[-1])

# the paths sampled over alpha act as the inverse distribution at time t
family = alpha_path_family(spec, [0.0, 3.0], np.arange(1, 100) / 100)
print("Phi_3^-1(0.9) ~", inverse_distribution_at(family, 0.9, t=3.0))

# E[V_3] from the alpha-paths, against V0 e^{mu t} pi c / sin(pi c)
c = spec.c(3.0)
print("E[V_3] from paths:", expected_monotone_functional(spec, 3.0, lambda x: x))
print("E[V_3] closed    :", 5000.0 * np.exp(0.06) * np.pi * c / np.sin(np.pi * c))
