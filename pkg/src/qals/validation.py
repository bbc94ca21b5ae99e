"""Input validation helpers shared across the package."""

from __future__ import annotations

import numpy as np


def make_rng(seed=None) -> np.random.Generator:
    """Coerce ``seed`` into a numpy Generator.

    Accepts an existing Generator (returned unchanged), an integer seed, or
    None. Fresh generators are backed by MT19937; the permutation machinery
    relies on a generator with a very long period.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.MT19937(seed))


def check_square_matrix(m, name: str = "matrix") -> np.ndarray:
    """Validate a finite square 2-D array and return it as float64."""
    arr = np.asarray(m, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be square, got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise ValueError(f"{name} must have at least one row")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def check_bits(x, n: int | None = None) -> np.ndarray:
    """Validate a 0/1 vector, returning it as an int8 array."""
    arr = np.asarray(x)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-D bit vector, got shape {arr.shape}")
    if not np.isin(arr, (0, 1)).all():
        raise ValueError("bit vector entries must be 0 or 1")
    if n is not None and arr.shape[0] != n:
        raise ValueError(f"expected {n} bits, got {arr.shape[0]}")
    return arr.astype(np.int8)


def check_spins(z, n: int | None = None) -> np.ndarray:
    """Validate a -1/+1 vector, returning it as an int8 array."""
    arr = np.asarray(z)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-D spin vector, got shape {arr.shape}")
    if not np.isin(arr, (-1, 1)).all():
        raise ValueError("spin vector entries must be -1 or +1")
    if n is not None and arr.shape[0] != n:
        raise ValueError(f"expected {n} spins, got {arr.shape[0]}")
    return arr.astype(np.int8)


def check_permutation(perm) -> np.ndarray:
    """Validate that ``perm`` is a permutation of 0..n-1."""
    arr = np.asarray(perm, dtype=np.intp)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("permutation must be a non-empty 1-D integer vector")
    seen = np.zeros(arr.size, dtype=bool)
    if arr.min() < 0 or arr.max() >= arr.size:
        raise ValueError("permutation entries out of range")
    seen[arr] = True
    if not seen.all():
        raise ValueError("permutation entries are not distinct")
    return arr
