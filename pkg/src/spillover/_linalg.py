"""Small dense linear-algebra helpers shared by the estimators."""

from __future__ import annotations

import numpy as np

# relative pivot size below which a design is treated as rank deficient;
# leaves room for condition numbers around 1e8-1e10
_RANK_TOL = 1e-11


class SingularMatrixError(np.linalg.LinAlgError):
    """Design or covariance matrix is (numerically) singular."""


def lstsq_qr(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Least-squares coefficients via a thin QR factorization.

    Works on a single design ``(m, k)`` or a stack ``(..., m, k)``; ``Y`` may
    hold several right-hand sides in its last axis.
    """
    Q, R = np.linalg.qr(X)
    d = np.abs(np.diagonal(R, axis1=-2, axis2=-1))
    scale = np.max(d, axis=-1, keepdims=True)
    if np.any(d <= _RANK_TOL * np.where(scale > 0, scale, 1.0)) or np.any(scale == 0):
        raise SingularMatrixError("design matrix is rank deficient")
    vec = Y.ndim == X.ndim - 1
    if vec:
        Y = Y[..., None]
    B = np.linalg.solve(R, np.swapaxes(Q, -1, -2) @ Y)
    return B[..., 0] if vec else B


def repair_spsd(S: np.ndarray) -> tuple[np.ndarray, bool]:
    """Symmetrize and clamp negative eigenvalues at zero.

    Accepts a single matrix or a stack. Returns the repaired matrix and a
    flag (per stacked matrix) telling whether any eigenvalue was clamped.
    """
    S = 0.5 * (S + np.swapaxes(S, -1, -2))
    w, V = np.linalg.eigh(S)
    clamped = np.any(w < 0, axis=-1)
    if not np.any(clamped):
        return S, clamped
    fixed = (V * np.clip(w, 0.0, None)[..., None, :]) @ np.swapaxes(V, -1, -2)
    fixed = 0.5 * (fixed + np.swapaxes(fixed, -1, -2))
    if S.ndim == 2:
        return fixed, clamped
    return np.where(clamped[..., None, None], fixed, S), clamped


def cov_to_corr(S: np.ndarray) -> np.ndarray:
    sd = np.sqrt(np.diag(S))
    if np.any(sd == 0):
        raise SingularMatrixError("zero variance on the diagonal")
    C = S / np.outer(sd, sd)
    np.fill_diagonal(C, 1.0)
    return np.clip(C, -1.0, 1.0)
