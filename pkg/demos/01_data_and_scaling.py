"""
Data layout, chronological split and [-1, 1] scaling
====================================================

Draw a synthetic table in the six-column irradiance layout, split it in
time order and fit min-max scaling on the training rows only.
"""

# %%
import numpy as np

from solarkd import (denormalize, generate_surrogate, normalize_apply, normalize_dataset,
                     normalize_fit, split_train_test)

data = generate_surrogate(n=1000, seed=0)
print(data.columns)
print(data.table()[:3].round(3))

# %%
# The first 80 % of the rows train, the remaining 20 % test. No shuffling.
split = split_train_test(data, ratio=0.8)
print(split.train.n, split.test.n)

# %%
# Scaling is fitted on the training partition. Test rows outside its range
# map linearly beyond [-1, 1] rather than being clipped.
norm = normalize_fit(split.train)
train = normalize_dataset(split.train, norm)
test = normalize_dataset(split.test, norm)
print("train range", train.features.min(), train.features.max())
print("test range ", test.features.min().round(3), test.features.max().round(3))

# %%
kt = split.test.features[:, 3]
back = denormalize(normalize_apply(kt, "kt", norm), "kt", norm)
print("round-trip max error", np.max(np.abs(back - kt)))
