"""Minimal differentiable layer stack in numpy (float64 throughout).

Each layer is a pure forward function returning (output, cache) and a
matching backward function returning input/parameter gradients. No general
autodiff: the networks that compose these layers spell out their backward
passes explicitly, and every parameter is covered by finite-difference
checks.
"""

from flexrank.nn.layers import (
    cosine_embed_backward,
    cosine_embed_forward,
    dense_backward,
    dense_forward,
    dueling_backward,
    dueling_combine,
    gat_backward,
    gat_forward,
    graph_pool,
    gru_backward,
    gru_step,
)
from flexrank.nn.losses import quantile_huber_grad, quantile_huber_loss
from flexrank.nn.optim import Adam
from flexrank.nn.gradcheck import numeric_gradient_check
from flexrank.nn.init import uniform_init
from flexrank.nn.checkpoint import load_params, save_params

__all__ = [
    "Adam",
    "cosine_embed_backward",
    "cosine_embed_forward",
    "dense_backward",
    "dense_forward",
    "dueling_backward",
    "dueling_combine",
    "gat_backward",
    "gat_forward",
    "graph_pool",
    "gru_backward",
    "gru_step",
    "load_params",
    "numeric_gradient_check",
    "quantile_huber_grad",
    "quantile_huber_loss",
    "save_params",
    "uniform_init",
]
