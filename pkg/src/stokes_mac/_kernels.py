"""Stencil kernels with a numba path and a pure-numpy path.

The numba path is used when numba imports cleanly and the environment
variable ``STOKES_MAC_NUMBA`` is not ``"0"``.  Both paths compute the same
values; the numpy versions are also what the tests use as the reference.
"""
from __future__ import annotations

import os

import numpy as np

try:  # pragma: no cover - exercised implicitly
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False


def numba_enabled() -> bool:
    return HAVE_NUMBA and os.environ.get("STOKES_MAC_NUMBA", "1") != "0"


# --- pure numpy -----------------------------------------------------------


def neg_laplacian_np(full: np.ndarray, inv_h2: float) -> np.ndarray:
    """-Delta_h at every point of ``full`` that has four neighbours.

    Returns an array of shape ``(nx - 2, ny - 2)``.
    """
    c = full[1:-1, 1:-1]
    return (
        4.0 * c - full[:-2, 1:-1] - full[2:, 1:-1] - full[1:-1, :-2] - full[1:-1, 2:]
    ) * inv_h2


def divergence_np(u1: np.ndarray, u2: np.ndarray, inv_h: float) -> np.ndarray:
    """Backward-difference divergence onto cell centres.

    ``u1`` has shape (N+1, N) (x-nodes 0..N, cell rows), ``u2`` has shape
    (N, N+1).
    """
    return (u1[1:, :] - u1[:-1, :] + u2[:, 1:] - u2[:, :-1]) * inv_h


def gradient_np(p: np.ndarray, inv_h: float) -> tuple[np.ndarray, np.ndarray]:
    """Forward differences of cell-centred ``p`` onto interior edges."""
    return (p[1:, :] - p[:-1, :]) * inv_h, (p[:, 1:] - p[:, :-1]) * inv_h


# --- numba ----------------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True)
    def neg_laplacian_nb(full, inv_h2):
        nx, ny = full.shape
        out = np.empty((nx - 2, ny - 2))
        for i in range(1, nx - 1):
            for j in range(1, ny - 1):
                out[i - 1, j - 1] = (
                    4.0 * full[i, j]
                    - full[i - 1, j]
                    - full[i + 1, j]
                    - full[i, j - 1]
                    - full[i, j + 1]
                ) * inv_h2
        return out

    @njit(cache=True)
    def divergence_nb(u1, u2, inv_h):
        n0, n1 = u2.shape[0], u1.shape[1]
        out = np.empty((n0, n1))
        for i in range(n0):
            for j in range(n1):
                out[i, j] = (u1[i + 1, j] - u1[i, j] + u2[i, j + 1] - u2[i, j]) * inv_h
        return out

    @njit(cache=True)
    def gradient_nb(p, inv_h):
        nx, ny = p.shape
        gx = np.empty((nx - 1, ny))
        gy = np.empty((nx, ny - 1))
        for i in range(nx - 1):
            for j in range(ny):
                gx[i, j] = (p[i + 1, j] - p[i, j]) * inv_h
        for i in range(nx):
            for j in range(ny - 1):
                gy[i, j] = (p[i, j + 1] - p[i, j]) * inv_h
        return gx, gy


def neg_laplacian(full: np.ndarray, inv_h2: float) -> np.ndarray:
    if numba_enabled():
        return neg_laplacian_nb(np.ascontiguousarray(full), inv_h2)
    return neg_laplacian_np(full, inv_h2)


def divergence(u1: np.ndarray, u2: np.ndarray, inv_h: float) -> np.ndarray:
    if numba_enabled():
        return divergence_nb(np.ascontiguousarray(u1), np.ascontiguousarray(u2), inv_h)
    return divergence_np(u1, u2, inv_h)


def gradient(p: np.ndarray, inv_h: float) -> tuple[np.ndarray, np.ndarray]:
    if numba_enabled():
        return gradient_nb(np.ascontiguousarray(p), inv_h)
    return gradient_np(p, inv_h)
