"""
Grey wolf optimizer on standard test functions
==============================================
"""

# %%
import numpy as np

from solarkd import GwoConfig, gwo_optimize


def sphere(X):
    return np.sum(X * X, axis=1)


def rastrigin(X):
    return 10 * X.shape[1] + np.sum(X * X - 10 * np.cos(2 * np.pi * X), axis=1)


def rosenbrock(X):
    return np.sum(100 * (X[:, 1:] - X[:, :-1] ** 2) ** 2 + (1 - X[:, :-1]) ** 2, axis=1)


# %%
for name, f, bound in (("sphere", sphere, 10.0), ("rastrigin", rastrigin, 5.12),
                       ("rosenbrock", rosenbrock, 30.0)):
    cfg = GwoConfig(population=30, iterations=500, lower_bound=-bound, upper_bound=bound, seed=0)
    res = gwo_optimize(f, cfg, dim=10, vectorized=True)
    print(f"{name:<11} best {res.fitness:.3e}")

# %%
# The exploration coefficient a falls linearly from 2 to 0; the alpha
# fitness never increases because leaders only move when improved upon.
res = gwo_optimize(sphere, GwoConfig(30, 50, -10, 10, seed=3), dim=10, vectorized=True)
for t in (0, 10, 25, 49):
    print(t, round(res.a_values[t], 3), f"{res.trace[t]:.3e}")
