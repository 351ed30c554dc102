"""
Takagi-Sugeno ANFIS with four membership families
=================================================

Two membership functions per input give a 32-rule grid. Training alternates
a least-squares solve for the linear consequents with a gradient step on the
membership parameters.
"""

# %%
import numpy as np

from solarkd import (AnfisTrainConfig, MF_KINDS, anfis_forward, anfis_init_grid, anfis_predict,
                     compute_metrics, generate_surrogate, normalize_dataset, normalize_fit,
                     split_train_test, train_anfis_hybrid)

split = split_train_test(generate_surrogate(2000, seed=1))
norm = normalize_fit(split.train)
train, test = normalize_dataset(split.train, norm), normalize_dataset(split.test, norm)

# %%
# Initial grid: centres at one and two thirds of each input range.
model = anfis_init_grid(train, "gaussian")
print(model.premise[3])
out, firing, normalized, starved = anfis_forward(model, train.features[0])
print("normalized firing sums to", normalized.sum(), "starved:", starved)

# %%
for kind in MF_KINDS:
    fitted, trace = train_anfis_hybrid(anfis_init_grid(train, kind), train, AnfisTrainConfig(epochs=30))
    m = compute_metrics(test.targets, anfis_predict(fitted, test.features))
    print(f"{kind:<12} train MSE {trace[-1]:.2e}  test RMSE {m.rmse:.4f}")

# %%
# Far outside the support of the triangles no rule fires; the row is flagged.
tri = anfis_init_grid(train, "triangular")
print(anfis_forward(tri, np.full(5, 4.0))[3])
