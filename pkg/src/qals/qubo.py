"""QUBO and Ising problem representations.

A QUBO instance is stored in canonical upper-triangular form: the objective is

    f(x) = sum_i Q[i, i] * x_i + sum_{i < j} Q[i, j] * x_i * x_j,   x_i in {0, 1}

with every entry strictly below the diagonal equal to zero. Symmetric or mixed
matrices can be folded into this form with :meth:`QuboProblem.from_dense`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import TextIO

import numpy as np

from .validation import check_bits, check_spins, check_square_matrix

MAX_BRUTE_FORCE_VARS = 24

# Enumeration block size for brute force: 2**16 assignments per numpy batch.
_CHUNK_BITS = 16


@dataclass
class QuboProblem:
    """A QUBO instance in canonical upper-triangular form.

    Parameters
    ----------
    coeffs : ndarray of shape (n, n)
        Coefficient matrix. Diagonal entries are linear terms, entries above
        the diagonal are pairwise terms, and everything strictly below the
        diagonal must be zero.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = check_square_matrix(self.coeffs, "coeffs")
        lower = np.tril(coeffs, -1)
        if np.any(lower != 0.0):
            raise ValueError(
                "coeffs must be upper-triangular; use QuboProblem.from_dense "
                "to fold a symmetric matrix"
            )
        self.coeffs = coeffs

    @property
    def n(self) -> int:
        return self.coeffs.shape[0]

    @classmethod
    def from_dense(cls, matrix) -> "QuboProblem":
        """Fold an arbitrary square matrix into canonical form.

        Each strictly-lower entry M[j, i] is added onto its mirror M[i, j],
        which leaves x^T M x unchanged for binary x.
        """
        m = check_square_matrix(matrix, "matrix")
        return cls(np.triu(m) + np.triu(m.T, 1))


def as_qubo(problem) -> QuboProblem:
    """Coerce a problem-like object into a ``QuboProblem``.

    Accepts a ``QuboProblem`` (returned as-is) or any square array-like,
    which is folded via :meth:`QuboProblem.from_dense`.
    """
    if isinstance(problem, QuboProblem):
        return problem
    return QuboProblem.from_dense(problem)


@dataclass
class IsingWeights:
    """Linear and quadratic Ising coefficients over +-1 spins.

    The energy convention is

        E(z) = sum_i linear[i] * z_i + sum_{i < j} quadratic[(i, j)] * z_i * z_j.

    Quadratic keys are normalized to i < j.
    """

    linear: dict[int, float] = field(default_factory=dict)
    quadratic: dict[tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self):
        for (i, j) in self.quadratic:
            if i >= j:
                raise ValueError(f"quadratic key ({i}, {j}) must satisfy i < j")


def evaluate_qubo(q: QuboProblem, x) -> float:
    """Objective value f(x) = x^T Q x for a 0/1 assignment."""
    bits = check_bits(x, q.n).astype(float)
    return float(bits @ q.coeffs @ bits)


def evaluate_ising(weights: IsingWeights, z) -> float:
    """Ising energy of a +-1 spin vector under ``weights``.

    Nodes without an explicit entry contribute zero.
    """
    spins = check_spins(z)
    total = 0.0
    for i, h in weights.linear.items():
        if i >= spins.size:
            raise ValueError(f"linear weight on node {i} outside spin vector")
        total += h * spins[i]
    for (i, j), w in weights.quadratic.items():
        if j >= spins.size:
            raise ValueError(f"quadratic weight on pair ({i}, {j}) outside spin vector")
        total += w * spins[i] * spins[j]
    return float(total)


def qubo_to_ising(q: QuboProblem, complete: bool = False) -> tuple[IsingWeights, float]:
    """Convert a QUBO to Ising weights via x = (z + 1) / 2.

    Returns ``(weights, offset)`` with
    ``evaluate_qubo(q, x) == evaluate_ising(weights, 2 x - 1) + offset``.

    With ``complete=True`` every pair (i, j), i < j, gets an explicit
    quadratic entry even when its coefficient is zero.
    """
    n = q.n
    linear = {i: q.coeffs[i, i] / 2.0 for i in range(n)}
    quadratic: dict[tuple[int, int], float] = {}
    offset = float(np.trace(q.coeffs)) / 2.0
    for i in range(n):
        for j in range(i + 1, n):
            c = q.coeffs[i, j]
            if c != 0.0 or complete:
                quadratic[(i, j)] = c / 4.0
            linear[i] += c / 4.0
            linear[j] += c / 4.0
            offset += c / 4.0
    return IsingWeights(linear=linear, quadratic=quadratic), offset


def brute_force_qubo(q: QuboProblem, cap: int = MAX_BRUTE_FORCE_VARS) -> tuple[np.ndarray, float]:
    """Exact minimum of a QUBO by exhaustive enumeration.

    Returns ``(x, value)``. Among degenerate minima the lexicographically
    smallest bit string wins. The result does not depend on how the
    enumeration is internally partitioned into blocks.

    Raises ``ValueError`` when ``q.n`` exceeds ``cap`` (default 24).
    """
    n = q.n
    if n > cap:
        raise ValueError(f"brute force capped at {cap} variables, got {n}")
    u = q.coeffs

    # Assignments are enumerated as integers v = 0 .. 2^n - 1 with bit i of x
    # taken from position n-1-i, so ascending v is ascending lexicographic
    # order of the bit string and the first strict minimum is the smallest.
    low_bits = min(n, _CHUNK_BITS)
    high_bits = n - low_bits
    shifts = np.arange(low_bits - 1, -1, -1)
    low = ((np.arange(1 << low_bits)[:, None] >> shifts) & 1).astype(float)

    best_val = np.inf
    best_v = -1
    for h in range(1 << high_bits):
        if high_bits:
            hi = (h >> np.arange(high_bits - 1, -1, -1)) & 1
            x = np.empty((low.shape[0], n))
            x[:, :high_bits] = hi
            x[:, high_bits:] = low
        else:
            x = low
        energies = np.einsum("ki,ij,kj->k", x, u, x)
        idx = int(np.argmin(energies))
        val = float(energies[idx])
        if val < best_val:
            best_val = val
            best_v = (h << low_bits) + idx
    bits = (best_v >> np.arange(n - 1, -1, -1)) & 1
    return bits.astype(np.int8), best_val


def save_qubo(q: QuboProblem, path) -> None:
    """Write a QUBO to a text file: first line n, then ``i j value`` triples."""
    with open(path, "w") as fh:
        fh.write(f"{q.n}\n")
        for i in range(q.n):
            for j in range(i, q.n):
                value = float(q.coeffs[i, j])
                if value != 0.0:
                    fh.write(f"{i} {j} {value!r}\n")


def load_qubo(source) -> QuboProblem:
    """Read a QUBO from a path or text stream in the ``save_qubo`` format.

    Lines may carry ``#`` comments. Indices are 0-based and must satisfy
    i <= j; duplicate entries are rejected with their line number.
    """
    if isinstance(source, (str, Path)):
        with open(source) as fh:
            return _parse_qubo(fh)
    return _parse_qubo(source)


def _parse_qubo(fh: TextIO) -> QuboProblem:
    n = None
    coeffs = None
    seen: set[tuple[int, int]] = set()
    for lineno, raw in enumerate(fh, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if n is None:
            try:
                n = int(line)
            except ValueError:
                raise ValueError(f"line {lineno}: expected variable count, got {line!r}")
            if n < 1:
                raise ValueError(f"line {lineno}: variable count must be >= 1")
            coeffs = np.zeros((n, n))
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"line {lineno}: expected 'i j value', got {line!r}")
        try:
            i, j, value = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            raise ValueError(f"line {lineno}: malformed entry {line!r}")
        if not (0 <= i <= j < n):
            raise ValueError(f"line {lineno}: indices ({i}, {j}) out of range for n={n}")
        if not np.isfinite(value):
            raise ValueError(f"line {lineno}: non-finite value")
        if (i, j) in seen:
            raise ValueError(f"line {lineno}: duplicate entry for ({i}, {j})")
        seen.add((i, j))
        coeffs[i, j] = value
    if n is None:
        raise ValueError("empty QUBO file")
    return QuboProblem(coeffs)
