"""
Normal uncertain variables
==========================

Distribution, inverse distribution and expected value of a normal
uncertain variable, computed two ways.
"""

import numpy as np

from uwarrant import (
    NormalUncertainVariable,
    expected_value_from_distribution,
    expected_value_from_quantile,
    inv_normal,
    normal_distribution,
)

v = NormalUncertainVariable(e=2.0, sigma=3.0)

# the distribution is a logistic curve centred on e
xs = np.linspace(-10, 14, 7)
for x, p in zip(xs, normal_distribution(v, xs)):
    print(f"Phi({x:6.2f}) = {p:.6f}")

# inverse distribution: alpha -> x, closed form
for alpha in (0.1, 0.5, 0.9):
    print(f"Phi^-1({alpha}) = {inv_normal(v, alpha):.6f}")

# expected value through the quantile integral and through the two tail integrals
print("E via quantile     :", expected_value_from_quantile(v.quantile()))
print("E via distribution :", expected_value_from_distribution(lambda x: normal_distribution(v, x)))
