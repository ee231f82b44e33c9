"""
Solving a mixed LS/TLS problem
==============================

Some columns of a regression matrix are known exactly (an intercept, a
designed input) while the rest are measured with noise. ``solve`` treats
the first ``n1`` columns as exact and the remaining ones, together with
the right-hand side, as noisy.
"""

import numpy as np

from mtlscond import MtlsProblem, genericity_gap, solve, stationarity_residual, stationarity_tolerance

rng = np.random.default_rng(0)

# A straight line y = 0.5 + 2 t observed with noise in both t and y.
t_true = np.linspace(0, 1, 40)
t = t_true + 0.02 * rng.standard_normal(40)
y = 0.5 + 2.0 * t_true + 0.02 * rng.standard_normal(40)
A = np.column_stack([np.ones_like(t), t])

# n1 = 1: the column of ones is exact.
problem = MtlsProblem(A, y, n1=1)
sol = solve(problem)
print("intercept, slope:", sol.x)
print("sigma^2:", sol.sigma2)
print("genericity gap:", genericity_gap(problem))

# Ordinary least squares for comparison (n1 = n) ...
print("LS:", solve(MtlsProblem(A, y, n1=2)).x)
# ... and total least squares with every column noisy (n1 = 0).
print("TLS:", solve(MtlsProblem(A, y, n1=0)).x)

# The solution satisfies the stationarity condition up to rounding.
print("stationarity residual / tolerance:",
      stationarity_residual(sol) / stationarity_tolerance(sol))

# Three tiny instances have closed-form answers.
golden = solve(MtlsProblem(np.array([[2.0], [0.0]]), np.array([1.0, 1.0]), 0))
print("golden TLS:", golden.x[0], "vs", (np.sqrt(5) - 1) / 2)
