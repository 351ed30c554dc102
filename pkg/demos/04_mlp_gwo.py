"""
Perceptron weights found by the grey wolf optimizer
===================================================

Each wolf is a flat vector of all 7h+1 network parameters and its cost is
the training MSE.
"""

# %%
from solarkd import (GwoConfig, compute_metrics, generate_surrogate, mlp_forward,
                     normalize_dataset, normalize_fit, split_train_test, train_mlp_gwo)

split = split_train_test(generate_surrogate(2000, seed=1))
norm = normalize_fit(split.train)
train, test = normalize_dataset(split.train, norm), normalize_dataset(split.test, norm)

# %%
cfg = GwoConfig(population=100, iterations=400, lower_bound=-5.0, upper_bound=5.0, seed=0)
params, result = train_mlp_gwo(20, train, cfg)
print("alpha MSE every 100 iterations:", result.trace[::100].round(5))

# %%
m = compute_metrics(test.targets, mlp_forward(params, test.features))
print(f"test MAE {m.mae:.4f}  RMSE {m.rmse:.4f}")
