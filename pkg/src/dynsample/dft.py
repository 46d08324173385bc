"""Unitary DFT for N-periodic sequences with values in C^d.

A periodic sequence is stored as one period, an array of shape ``(N, d)``
whose row ``n`` is ``q(n)``.  The spectrum has the same shape, row ``k``
holding ``q_hat(k) = N^{-1/2} sum_n q(n) exp(-2 pi i n k / N)``.
"""

from __future__ import annotations

import numpy as np


def _as_sequence(q) -> np.ndarray:
    q = np.asarray(q, dtype=complex)
    if q.ndim == 1:
        q = q[:, None]
    if q.ndim != 2 or q.shape[0] < 1 or q.shape[1] < 1:
        raise ValueError(f"periodic sequence must have shape (N, d) with N, d >= 1, got {q.shape}")
    if not np.all(np.isfinite(q)):
        raise ValueError("periodic sequence has non-finite entries")
    return q


def fourier_matrix(N: int) -> np.ndarray:
    """The unitary N x N matrix with entries exp(-2 pi i k n / N) / sqrt(N)."""
    if N < 1:
        raise ValueError(f"period must be >= 1, got {N}")
    k = np.arange(N)
    # reduce k*n mod N first so large N does not lose phase accuracy
    return np.exp(-2j * np.pi * (np.outer(k, k) % N) / N) / np.sqrt(N)


def dft(q) -> np.ndarray:
    q = _as_sequence(q)
    return fourier_matrix(q.shape[0]) @ q


def idft(q_hat) -> np.ndarray:
    q_hat = _as_sequence(q_hat)
    return fourier_matrix(q_hat.shape[0]).conj().T @ q_hat


def fourier_block_apply(direction: str, x) -> np.ndarray:
    """Apply F_N (``"forward"``) or F_N^* (``"inverse"``) blockwise on H^N.

    Same result as :func:`dft` / :func:`idft`, but computed on the stacked
    vector in H^N = C^{N d} with the Kronecker matrix ``F_N (x) I_d``.
    """
    x = _as_sequence(x)
    N, d = x.shape
    F = fourier_matrix(N)
    if direction == "forward":
        pass
    elif direction == "inverse":
        F = F.conj().T
    else:
        raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")
    stacked = np.kron(F, np.eye(d)) @ x.reshape(N * d)
    return stacked.reshape(N, d)
