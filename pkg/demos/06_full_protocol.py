"""
Sweeps and final comparison at reduced scale
============================================

The same protocol as ``solarkd all``: a hidden-size sweep, a membership
family sweep, a GWO population sweep at the winning size, and a test-set
comparison of the three winners. Sizes are cut down to run in seconds.
"""

# %%
from solarkd.config import ExperimentConfig
from solarkd.experiments import prepare_data, run_all, write_outputs

cfg = ExperimentConfig(surrogate_n=1000, mlp_epochs=300, gwo_populations=(20, 40, 60, 80),
                       gwo_iterations=40, anfis_epochs=20)
prep = prepare_data(cfg)
report = run_all(cfg, prep)
print(report.format_table())

# %%
w = report.winner
print("winners:", w.neurons, "neurons,", w.population, "wolves,", w.mf)

# %%
for path in write_outputs(report, "demo_results"):
    print(path)
