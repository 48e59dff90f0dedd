"""Quantile-weighted Huber loss for distributional TD errors."""

from __future__ import annotations

import numpy as np


def _huber(delta: np.ndarray, kappa: float):
    a = np.abs(delta)
    quad = a <= kappa
    H = np.where(quad, 0.5 * delta ** 2, kappa * (a - 0.5 * kappa))
    dH = np.where(quad, delta, kappa * np.sign(delta))
    return H, dH


def quantile_huber_loss(delta: np.ndarray, tau: np.ndarray, kappa: float) -> float:
    """mean-over-target-samples sum-over-quantiles of the asymmetric Huber.

    ``delta`` is (K, K') with row k the TD errors of the online quantile at
    level tau_k against each of K' target samples; the asymmetric weight is
    |tau_k - 1{delta < 0}| and the Huber term is scaled by 1/kappa.
    """
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    H, _ = _huber(delta, kappa)
    w = np.abs(tau[:, None] - (delta < 0))
    return float((w * H / kappa).sum() / delta.shape[1])


def quantile_huber_grad(delta: np.ndarray, tau: np.ndarray, kappa: float) -> np.ndarray:
    """d(loss)/d(delta), same shape as delta."""
    _, dH = _huber(delta, kappa)
    w = np.abs(tau[:, None] - (delta < 0))
    return w * dH / kappa / delta.shape[1]
