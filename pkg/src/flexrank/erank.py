"""Effective rank of a complex channel matrix.

The effective rank is exp(H(sigma_tilde)) where H is the Shannon entropy of
the singular values normalized to sum to one. It is invariant to scalar
scaling of the matrix and ranges from 1 to min(M, N), with the upper bound
attained exactly when all singular values are equal.
"""

from __future__ import annotations

import numpy as np

# Singular values below this fraction of the largest are treated as exact
# zeros before normalization, keeping the 0*ln(0) = 0 convention stable.
_RELATIVE_ZERO_TOL = 1e-12


def singular_values(H: np.ndarray) -> np.ndarray:
    """Singular values of H in descending order.

    Raises ValueError on non-finite entries.
    """
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] < 1 or H.shape[1] < 1:
        raise ValueError(f"expected a 2D matrix, got shape {H.shape}")
    if not np.all(np.isfinite(H.real)) or not np.all(np.isfinite(H.imag)):
        raise ValueError("channel matrix contains non-finite entries")
    return np.linalg.svd(H.astype(np.complex128, copy=False), compute_uv=False)


def effective_rank(H: np.ndarray) -> float:
    """exp of the entropy of the normalized singular value distribution.

    Raises ValueError for an all-zero matrix (the normalization is undefined).
    """
    s = singular_values(H)
    if s[0] == 0.0:
        raise ValueError("effective rank is undefined for an all-zero matrix")
    s = np.where(s < _RELATIVE_ZERO_TOL * s[0], 0.0, s)
    p = s / s.sum()
    nz = p[p > 0.0]
    return float(np.exp(-(nz * np.log(nz)).sum()))
