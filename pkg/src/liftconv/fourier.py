"""Unitary discrete Fourier transform helpers.

Everything downstream states its algebra in terms of the unitary DFT
matrix F with entries exp(-2i*pi*j*k/n)/sqrt(n). numpy's fft is the
unnormalized variant, so these wrappers carry the 1/sqrt(n) factors.
"""

from __future__ import annotations

import numpy as np

__all__ = ["fftu", "ifftu", "dft_matrix"]


def fftu(x: np.ndarray, axis: int = -1) -> np.ndarray:
    """Unitary forward DFT along one axis: F @ x."""
    n = x.shape[axis]
    return np.fft.fft(x, axis=axis) / np.sqrt(n)


def ifftu(x: np.ndarray, axis: int = -1) -> np.ndarray:
    """Unitary inverse DFT along one axis: F* @ x."""
    n = x.shape[axis]
    return np.fft.ifft(x, axis=axis) * np.sqrt(n)


def dft_matrix(n: int) -> np.ndarray:
    """Dense unitary DFT matrix. Symmetric: F.T == F."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    j = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(j, j) / n) / np.sqrt(n)
