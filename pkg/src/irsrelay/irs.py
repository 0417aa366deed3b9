"""Reflection model of the reconfigurable surface.

Each element applies a phase shift chosen from a discrete codebook; the
reflection amplitude is not free but follows the phase through a smooth
device curve, so "bad" phases also attenuate the reflected signal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class IrsModelParams:
    """Device parameters of the surface.

    ``a_min`` is the lowest reachable amplitude, ``zeta`` (radians) shifts
    the phase at which the amplitude peaks, and ``nu`` controls the
    steepness of the amplitude curve.  ``resolution_bits`` is the number of
    control bits per element; zero bits means the surface is frozen at the
    fixed pi phase.
    """

    a_min: float
    zeta: float
    nu: float
    element_count: int
    resolution_bits: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.a_min <= 1.0:
            raise ValueError("a_min must lie in [0, 1]")
        if self.zeta < 0:
            raise ValueError("zeta must be nonnegative")
        if self.nu < 0:
            raise ValueError("nu must be nonnegative")
        if self.element_count < 1:
            raise ValueError("element_count must be positive")
        if self.resolution_bits < 0:
            raise ValueError("resolution_bits must be nonnegative")


@dataclass(frozen=True)
class IrsConfiguration:
    """Per-element codebook indices for one transmission stage."""

    phase_indices: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "phase_indices", np.asarray(self.phase_indices, dtype=np.int64))


def codebook(resolution_bits: int) -> np.ndarray:
    """The ``2**b`` equally spaced phases starting at zero, in radians."""
    if resolution_bits < 1:
        raise ValueError("codebook needs at least one resolution bit")
    size = 2 ** resolution_bits
    return 2.0 * np.pi * np.arange(size) / size


def phase_set(resolution_bits: int) -> np.ndarray:
    """Selectable phases for a given resolution.

    Zero bits is the degenerate fixed configuration: a single phase of pi.
    Using a one-entry set keeps candidate encoding and evaluation uniform
    across resolutions.
    """
    if resolution_bits == 0:
        return np.array([np.pi])
    return codebook(resolution_bits)


def amplitude(theta, params: IrsModelParams):
    """Reflection amplitude as a function of the applied phase shift.

    Smooth, 2*pi-periodic, bounded in [a_min, 1]; equals 1 exactly at
    ``theta = zeta + pi/2`` (mod 2*pi).  Accepts scalars or arrays.
    """
    base = (np.sin(theta - params.zeta) + 1.0) / 2.0
    return (1.0 - params.a_min) * base ** params.nu + params.a_min


def reflection_coefficients(config: IrsConfiguration, params: IrsModelParams) -> np.ndarray:
    """Complex per-element coefficients ``A(theta_n) * exp(j theta_n)``."""
    phases = phase_set(params.resolution_bits)
    indices = config.phase_indices
    if indices.shape != (params.element_count,):
        raise ValueError(
            f"expected {params.element_count} phase indices, got shape {indices.shape}"
        )
    if np.any(indices < 0) or np.any(indices >= phases.size):
        raise ValueError("phase index outside the codebook range")
    theta = phases[indices]
    return amplitude(theta, params) * np.exp(1j * theta)


def reflection_matrix(config: IrsConfiguration, params: IrsModelParams) -> np.ndarray:
    """Diagonal reflection matrix for one stage."""
    return np.diag(reflection_coefficients(config, params))


def irs_off(element_count: int) -> np.ndarray:
    """Reflection matrix of a switched-off surface: all-zero, no reflection."""
    return np.zeros((element_count, element_count), dtype=complex)
