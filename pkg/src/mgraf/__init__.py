"""Joint low-rank logistic factorization of replicated binary networks."""
from . import _kernels
from .core import (
    CiseRunner,
    FitReport,
    MgrafModel,
    cise_fit,
    deviance_matrices,
    edge_prob_matrix,
    edge_prob_stack,
    fit_variant,
    joint_log_likelihood,
    load_model,
    logit,
    save_model,
    sigmoid,
    trace_surrogate,
    update_Q_step,
)
from .netdata import NetworkStack, devectorize, load_stack, mean_adjacency, save_stack, vectorize_lower
from .variants import fit_shared_lambda, fit_shared_q, greedy_Q_update, project_new_network

__version__ = "0.1.0"
BACKEND = _kernels.BACKEND_NAME

__all__ = [
    "BACKEND",
    "CiseRunner",
    "FitReport",
    "MgrafModel",
    "NetworkStack",
    "cise_fit",
    "devectorize",
    "deviance_matrices",
    "edge_prob_matrix",
    "edge_prob_stack",
    "fit_shared_lambda",
    "fit_shared_q",
    "fit_variant",
    "greedy_Q_update",
    "joint_log_likelihood",
    "load_model",
    "load_stack",
    "logit",
    "mean_adjacency",
    "project_new_network",
    "save_model",
    "save_stack",
    "sigmoid",
    "trace_surrogate",
    "update_Q_step",
    "vectorize_lower",
]
