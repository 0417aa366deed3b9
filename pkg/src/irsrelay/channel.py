"""Geometric mmWave channel sampling for the two-stage relay/surface topology.

Every link is a sparse sum of a few plane-wave paths: a complex Gaussian
gain per path, a distance-dependent amplitude, and array steering vectors
at both endpoints.  Sampling is driven by counter-based substreams derived
from (master seed, drop index, stream ids), so drops can be generated in
any order, or in parallel, and still come out bit-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import db_to_linear

ULA = "ula"
UPA = "upa"

# Substream tags; schemes.py reserves further tags for phase draws and
# search seeding so no two consumers ever share a stream.
CHANNEL_STREAM = 0

_LINK_ORDER = ("h_si", "h_sr", "h_ri", "h_rd", "h_id")


def substream(master_seed: int, *key: int) -> np.random.Generator:
    """Independent generator for the substream identified by ``key``."""
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=tuple(key)))


@dataclass(frozen=True)
class ArraySpec:
    """Antenna array of a node: a line of elements or a square grid."""

    kind: str
    element_count: int

    def __post_init__(self) -> None:
        if self.kind not in (ULA, UPA):
            raise ValueError(f"array kind must be '{ULA}' or '{UPA}', got {self.kind!r}")
        if self.element_count < 1:
            raise ValueError("element_count must be positive")
        if self.kind == UPA and self.grid_side ** 2 != self.element_count:
            raise ValueError("a planar array needs a perfect-square element count")

    @property
    def grid_side(self) -> int:
        return math.isqrt(self.element_count)


@dataclass(frozen=True)
class NodeGeometry:
    """Positions of source, relay, destination, and surface, in meters."""

    position_s: np.ndarray
    position_r: np.ndarray
    position_d: np.ndarray
    position_i: np.ndarray

    def __post_init__(self) -> None:
        for name in ("position_s", "position_r", "position_d", "position_i"):
            value = np.asarray(getattr(self, name), dtype=float)
            if value.shape != (3,):
                raise ValueError(f"{name} must be a 3-vector")
            object.__setattr__(self, name, value)
        points = [self.position_s, self.position_r, self.position_d, self.position_i]
        for i in range(len(points)):
            for j in range(i + 1, len(points)):
                if np.linalg.norm(points[i] - points[j]) <= 0:
                    raise ValueError("node positions must be pairwise distinct")

    def distance(self, a: str, b: str) -> float:
        """Euclidean distance between two nodes named 's', 'r', 'd', 'i'."""
        pa = getattr(self, f"position_{a}")
        pb = getattr(self, f"position_{b}")
        return float(np.linalg.norm(pa - pb))


@dataclass(frozen=True)
class PathLossParams:
    """Distance law constants: loss at the reference distance plus an exponent."""

    k0_db: float
    reference_distance_m: float
    exponent: float

    def __post_init__(self) -> None:
        if self.reference_distance_m <= 0:
            raise ValueError("reference distance must be positive")


@dataclass(frozen=True)
class PathRealization:
    """One sampled propagation path: complex gain plus endpoint angles."""

    gain: complex
    tx_azimuth: float
    tx_elevation: float
    rx_azimuth: float
    rx_elevation: float


@dataclass(frozen=True)
class ChannelSet:
    """All six link matrices of one channel drop.

    The surface-to-relay link is the exact elementwise transpose of the
    relay-to-surface link; it is never sampled separately.
    """

    h_si: np.ndarray
    h_sr: np.ndarray
    h_ri: np.ndarray
    h_rd: np.ndarray
    h_id: np.ndarray
    h_ir: np.ndarray

    def __post_init__(self) -> None:
        for name in ("h_si", "h_sr", "h_ri", "h_rd", "h_id", "h_ir"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"{name} contains non-finite entries")
        if not np.array_equal(self.h_ir, self.h_ri.T):
            raise ValueError("h_ir must be the exact transpose of h_ri")


def path_loss(distance: float, reference_distance: float, k0_db: float, exponent: float) -> float:
    """Amplitude attenuation at ``distance``: ``k0 * (d / d0) ** (-exponent / 2)``.

    ``k0_db`` states the power loss at the reference distance, so the
    amplitude factor is its square root.
    """
    if distance <= 0:
        raise ValueError("distance must be positive")
    k0_amplitude = math.sqrt(db_to_linear(k0_db))
    return k0_amplitude * (distance / reference_distance) ** (-exponent / 2.0)


def array_response(spec: ArraySpec, azimuth: float, elevation: float) -> np.ndarray:
    """Steering vector of an array toward the given direction.

    Entry for element offset (x, y) is ``exp(j pi (x sin(el) cos(az) +
    y sin(el) sin(az)))``; a linear array has y = 0.  The first entry is
    exactly 1 and all entries have unit modulus.
    """
    sin_el = math.sin(elevation)
    if spec.kind == ULA:
        offsets = np.arange(spec.element_count)
        phase = np.pi * offsets * sin_el * math.cos(azimuth)
    else:
        side = spec.grid_side
        x = np.repeat(np.arange(side), side)
        y = np.tile(np.arange(side), side)
        phase = np.pi * sin_el * (x * math.cos(azimuth) + y * math.sin(azimuth))
    return np.exp(1j * phase)


def _draw_angles(spec: ArraySpec, rng: np.random.Generator) -> tuple[float, float]:
    # Elevation is spread over the full circle at every node; azimuth is
    # spread only at the planar surface and fixed to zero at linear arrays.
    elevation = float(rng.uniform(0.0, 2.0 * np.pi))
    if spec.kind == UPA:
        azimuth = float(rng.uniform(0.0, np.pi / 2.0))
    else:
        azimuth = 0.0
    return azimuth, elevation


def sample_paths(
    tx_spec: ArraySpec,
    rx_spec: ArraySpec,
    path_count: int,
    rng: np.random.Generator,
) -> list[PathRealization]:
    """Draw the per-path gains and endpoint angles for one link."""
    if path_count < 1:
        raise ValueError("path_count must be at least 1")
    paths = []
    for _ in range(path_count):
        gain = complex(rng.standard_normal() + 1j * rng.standard_normal()) / math.sqrt(2.0)
        tx_azimuth, tx_elevation = _draw_angles(tx_spec, rng)
        rx_azimuth, rx_elevation = _draw_angles(rx_spec, rng)
        paths.append(PathRealization(gain, tx_azimuth, tx_elevation, rx_azimuth, rx_elevation))
    return paths


def sample_channel(
    tx_spec: ArraySpec,
    rx_spec: ArraySpec,
    distance: float,
    path_count: int,
    rng: np.random.Generator,
    loss: PathLossParams,
) -> np.ndarray:
    """One link matrix of shape (rx elements, tx elements), rank at most ``path_count``."""
    rho = path_loss(distance, loss.reference_distance_m, loss.k0_db, loss.exponent)
    matrix = np.zeros((rx_spec.element_count, tx_spec.element_count), dtype=complex)
    for path in sample_paths(tx_spec, rx_spec, path_count, rng):
        a_tx = array_response(tx_spec, path.tx_azimuth, path.tx_elevation)
        a_rx = array_response(rx_spec, path.rx_azimuth, path.rx_elevation)
        matrix += path.gain * np.outer(a_rx, a_tx.conj())
    return (rho / math.sqrt(path_count)) * matrix


def sample_channel_set(scenario, master_seed: int, drop_index: int = 0) -> ChannelSet:
    """Sample all links of one drop from per-link substreams.

    ``scenario`` provides geometry, the four array specs, ``path_count``,
    and ``path_loss``; identical (scenario, seed, drop) always yields a
    bit-identical set.
    """
    geometry = scenario.geometry
    links = {
        "h_si": (scenario.array_s, scenario.array_i, geometry.distance("s", "i")),
        "h_sr": (scenario.array_s, scenario.array_r, geometry.distance("s", "r")),
        "h_ri": (scenario.array_r, scenario.array_i, geometry.distance("r", "i")),
        "h_rd": (scenario.array_r, scenario.array_d, geometry.distance("r", "d")),
        "h_id": (scenario.array_i, scenario.array_d, geometry.distance("i", "d")),
    }
    sampled = {}
    for link_index, name in enumerate(_LINK_ORDER):
        tx_spec, rx_spec, distance = links[name]
        rng = substream(master_seed, drop_index, CHANNEL_STREAM, link_index)
        sampled[name] = sample_channel(
            tx_spec, rx_spec, distance, scenario.path_count, rng, scenario.path_loss
        )
    return ChannelSet(h_ir=sampled["h_ri"].T, **sampled)
