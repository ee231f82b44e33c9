"""
First-order perturbation map
============================

``jacobian_new`` returns the matrix ``K`` with ``dx ~ K vec([dA, db])``.
Comparing the true change of the solution with ``K`` applied to the data
change shows the error shrinking like ``eps**2``.
"""

import numpy as np

from mtlscond import jacobian_new, jacobian_zy, predict_delta_x, solve
from mtlscond.experiments import finite_difference_jacobian, gen_transfer_function, loglog_slope

# Lagged input/output regression with noisy outputs: 10 exact input columns,
# 10 noisy output columns.
problem = gen_transfer_function(m=30, n1=10, n2=10, noise_var=0.01, seed=0)
base = solve(problem)
K = jacobian_new(base)
print("K shape:", K.shape)

# An older closed form of the same derivative agrees to rounding.
print("max |K - K_ZY| / max |K|:", np.abs(K - jacobian_zy(base)).max() / np.abs(K).max())

rng = np.random.default_rng(1)
U = rng.random(problem.Ab.shape)
epsilons = np.array([1e-2, 1e-3, 1e-4, 1e-5, 1e-6])
eta = []
for eps in epsilons:
    dAb = eps * U * problem.Ab
    dA, db = dAb[:, :-1], dAb[:, -1]
    dx = solve(problem.perturbed(dA, db)).x - base.x
    eta.append(np.linalg.norm(dx - predict_delta_x(K, dA, db)))
    print(f"eps={eps:.0e}  ||dx||={np.linalg.norm(dx):.3e}  residual={eta[-1]:.3e}")
print("log-log slope:", loglog_slope(epsilons, eta))

# Central differences on a small instance give an independent check.
small = gen_transfer_function(m=12, n1=2, n2=2, noise_var=0.05, seed=1)
K_small = jacobian_new(solve(small))
K_fd = finite_difference_jacobian(small, h=1e-6)
print("finite-difference relative error:", np.linalg.norm(K_fd - K_small) / np.linalg.norm(K_small))
