"""Linear-algebra and allocation primitives shared by the rest of the simulator.

Everything here is pure and reentrant: functions take values, return new
values, and keep no internal state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Relative tolerance for algebraic identities (orthonormality, reconstruction).
REL_TOL_ALGEBRA = 1e-9
# Tolerance for rate comparisons, in bits.
RATE_TOL_BITS = 1e-6


class InfeasibleAllocationError(ValueError):
    """Raised when an allocation problem has no feasible solution."""


def db_to_linear(value_db: float) -> float:
    """Convert a power ratio from decibels to linear scale."""
    return 10.0 ** (value_db / 10.0)


def linear_to_db(value: float) -> float:
    """Convert a positive linear power ratio to decibels."""
    if value <= 0:
        raise ValueError("linear power ratio must be positive")
    return 10.0 * math.log10(value)


@dataclass(frozen=True)
class SvdResult:
    """Full singular value decomposition ``A = U diag(s) V^H``.

    ``left_vectors`` is square (m x m) and ``right_vectors`` is square
    (n x n), so the right factor also spans any null-space directions of
    the input.  ``singular_values`` has ``min(m, n)`` entries, sorted
    nonincreasing.
    """

    left_vectors: np.ndarray
    singular_values: np.ndarray
    right_vectors: np.ndarray


def svd(matrix: np.ndarray) -> SvdResult:
    """Full SVD of a dense matrix.

    Raises ``ValueError`` for empty or non-finite input.  Ties between
    singular values keep LAPACK's deterministic ordering, so identical
    inputs always produce identical factors.
    """
    m = np.asarray(matrix)
    if m.ndim != 2 or m.shape[0] == 0 or m.shape[1] == 0:
        raise ValueError(f"expected a nonempty 2-d matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix contains non-finite entries")
    left, values, right_h = np.linalg.svd(m, full_matrices=True)
    return SvdResult(left, values, right_h.conj().T)


def orthogonal_complement(basis: np.ndarray, ambient_dim: int) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of ``span(basis)``.

    ``basis`` must have orthonormal columns living in a space of dimension
    ``ambient_dim``; the result has ``ambient_dim - k`` orthonormal columns,
    each orthogonal to every input column.  An empty basis yields a full
    unitary matrix.
    """
    q = np.asarray(basis, dtype=complex)
    if q.size == 0:
        return np.eye(ambient_dim, dtype=complex)
    if q.ndim != 2 or q.shape[0] != ambient_dim:
        raise ValueError(f"basis shape {q.shape} does not match ambient dimension {ambient_dim}")
    k = q.shape[1]
    if k > ambient_dim:
        raise ValueError("basis has more columns than the ambient dimension")
    gram = q.conj().T @ q
    if not np.allclose(gram, np.eye(k), atol=REL_TOL_ALGEBRA):
        raise ValueError("basis columns are not orthonormal")
    left = np.linalg.svd(q, full_matrices=True)[0]
    return np.asarray(left[:, k:], dtype=complex)


@dataclass(frozen=True)
class WaterfillResult:
    """Optimal allocation over parallel channels.

    Active channels share one water level: ``power + noise/gain`` equals
    ``water_level`` wherever ``power > 0``, and inactive channels sit above
    it.  ``rate_bits`` is the resulting sum capacity.
    """

    powers: np.ndarray
    water_level: float
    rate_bits: float


def waterfill(gains: np.ndarray, budget: float, noise_power: float) -> WaterfillResult:
    """Maximize ``sum(log2(1 + g_i p_i / noise))`` with ``sum(p_i) = budget``.

    The water level is found analytically from the sorted inverse gains, so
    the KKT conditions hold to machine precision rather than to an iteration
    tolerance.
    """
    g = np.asarray(gains, dtype=float)
    if g.ndim != 1:
        raise ValueError("gains must be a 1-d sequence")
    if np.any(g <= 0) or not np.all(np.isfinite(g)):
        raise ValueError("all channel gains must be finite and positive")
    if not math.isfinite(budget) or budget < 0:
        raise ValueError("budget must be finite and nonnegative")
    if noise_power <= 0:
        raise ValueError("noise power must be positive")
    if g.size == 0:
        if budget > 0:
            raise InfeasibleAllocationError("positive budget but no channels to carry it")
        return WaterfillResult(np.zeros(0), math.inf, 0.0)

    floors = noise_power / g
    if budget == 0:
        return WaterfillResult(np.zeros_like(g), float(floors.min()), 0.0)

    order = np.argsort(floors, kind="stable")
    sorted_floors = floors[order]
    prefix = np.cumsum(sorted_floors)
    # Largest k whose candidate level clears the k-th floor; k = 1 always does.
    active = 1
    for k in range(2, g.size + 1):
        if (budget + prefix[k - 1]) / k > sorted_floors[k - 1]:
            active = k
    level = (budget + prefix[active - 1]) / active

    alloc = np.zeros_like(g)
    alloc[:active] = level - sorted_floors[:active]
    powers = np.zeros_like(g)
    powers[order] = alloc
    rate = float(np.sum(np.log2(level / sorted_floors[:active])))
    return WaterfillResult(powers, float(level), rate)
