"""Diffuse-fraction regression with an MLP, a GWO-trained MLP and a grid-partition ANFIS."""

from .anfis import (MF_KINDS, AnfisModel, AnfisTrainConfig, MembershipFunction, anfis_forward,
                    anfis_init_grid, anfis_predict, lse_consequents, mf_eval,
                    premise_gradient_step, train_anfis_hybrid)
from .dataio import (SCHEMA, Dataset, NormalizationParams, denormalize, load_csv,
                     denormalize_targets, normalize_apply, normalize_dataset, normalize_fit,
                     split_train_test)
from .gwo import GwoConfig, coefficient_schedule, gwo_optimize, leader_step, train_mlp_gwo
from .metrics import Metrics, compute_metrics
from .mlp import (Activation, MlpParams, TrainConfig, activation_eval, backprop_gradient,
                  mlp_forward, mlp_init, param_to_vector, train_mlp_best_of, train_mlp_gd,
                  vector_to_param)
from .surrogate import generate_surrogate

__version__ = "0.1.0"
