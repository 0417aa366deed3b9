"""Stage-1 block-diagonal precoding and stage-2 eigenmode decomposition.

Stage 1 carries two simultaneous sub-messages from the source: one toward
the destination (through the surface) and one toward the relay.  Each
precoder is confined to the orthogonal complement of the other link's
selected right-singular subspace, and the receive filters are fixed from
the raw effective channels, so neither receiver sees the other stream set.
Stage 2 is a plain single-link eigenmode decomposition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class InfeasibleSelectionError(ValueError):
    """Raised when a stream selection cannot be carried by the arrays."""


@dataclass(frozen=True)
class StreamSelection:
    """How many spatial streams each stage-1 link gets.

    ``rd_count`` is accepted for completeness but stage 2 always uses every
    available direction (``None``); waterfilling zeroes the weak ones, so an
    explicit stage-2 subset search would be redundant.
    """

    sd_count: int
    sr_count: int
    rd_count: int | None = None


def validate_selection(selection: StreamSelection, n_s: int, n_r: int, n_d: int) -> None:
    """Check a selection against the array sizes; raise if it cannot be built."""
    sd, sr = selection.sd_count, selection.sr_count
    if sd < 0 or sr < 0:
        raise InfeasibleSelectionError("stream counts must be nonnegative")
    if sd + sr == 0:
        raise InfeasibleSelectionError("at least one stream must be selected")
    if sd + sr > n_s:
        raise InfeasibleSelectionError(
            f"{sd} + {sr} streams exceed the {n_s} source antennas"
        )
    if sd > min(n_d, n_s):
        raise InfeasibleSelectionError(f"{sd} destination streams exceed min(N_D, N_S)")
    if sr > min(n_r, n_s):
        raise InfeasibleSelectionError(f"{sr} relay streams exceed min(N_R, N_S)")


@dataclass(frozen=True)
class Stage1Decomposition:
    """Parallelized stage-1 links after block diagonalization.

    Gains are squared singular values of each receive-filtered,
    complement-projected channel, sorted nonincreasing.  Precoders and
    receive filters have orthonormal columns; transmit power is carried by
    the allocation, never by the precoder.
    """

    sd_gains: np.ndarray
    sr_gains: np.ndarray
    precoder_sd: np.ndarray
    precoder_sr: np.ndarray
    receive_filter_d: np.ndarray
    receive_filter_r: np.ndarray


@dataclass(frozen=True)
class Stage2Decomposition:
    """Eigenmodes of the stage-2 relay-to-destination effective channel."""

    rd_gains: np.ndarray
    precoder_rd: np.ndarray


def effective_sd(channels, phi1: np.ndarray) -> np.ndarray:
    """Source-to-destination effective channel: the pure surface cascade."""
    return (channels.h_id @ phi1) @ channels.h_si


def effective_sr(channels, phi1: np.ndarray) -> np.ndarray:
    """Source-to-relay effective channel: direct link plus surface cascade."""
    return channels.h_sr + (channels.h_ir @ phi1) @ channels.h_si


def effective_rd(channels, phi2: np.ndarray) -> np.ndarray:
    """Relay-to-destination effective channel: direct link plus surface cascade."""
    return channels.h_rd + (channels.h_id @ phi2) @ channels.h_ri


class Stage1Factorization:
    """Cached SVDs of both stage-1 effective channels.

    Factorizing once and decomposing for many stream selections is the hot
    pattern in candidate search, where the channels are fixed and only the
    counts vary.
    """

    def __init__(self, g_sd: np.ndarray, g_sr: np.ndarray):
        g_sd = np.asarray(g_sd, dtype=complex)
        g_sr = np.asarray(g_sr, dtype=complex)
        if g_sd.ndim != 2 or g_sr.ndim != 2 or g_sd.shape[1] != g_sr.shape[1]:
            raise ValueError("effective channels must share the source dimension")
        self.g_sd = g_sd
        self.g_sr = g_sr
        self.n_d, self.n_s = g_sd.shape
        self.n_r = g_sr.shape[0]
        self._left_d, self.singular_values_sd, right_h_d = np.linalg.svd(g_sd, full_matrices=True)
        self._right_d = right_h_d.conj().T
        self._left_r, self.singular_values_sr, right_h_r = np.linalg.svd(g_sr, full_matrices=True)
        self._right_r = right_h_r.conj().T

    def decompose(self, selection: StreamSelection) -> Stage1Decomposition:
        validate_selection(selection, self.n_s, self.n_r, self.n_d)
        sd, sr = selection.sd_count, selection.sr_count
        # Complements of the selected right-singular subspaces; the leftover
        # columns of each full right factor are exactly those directions.
        null_sd = self._right_d[:, sd:]
        null_sr = self._right_r[:, sr:]

        sr_gains, precoder_sr, filter_r = self._branch(
            self.g_sr, self._left_r, null_sd, sr, self.n_r
        )
        sd_gains, precoder_sd, filter_d = self._branch(
            self.g_sd, self._left_d, null_sr, sd, self.n_d
        )
        return Stage1Decomposition(
            sd_gains=sd_gains,
            sr_gains=sr_gains,
            precoder_sd=precoder_sd,
            precoder_sr=precoder_sr,
            receive_filter_d=filter_d,
            receive_filter_r=filter_r,
        )

    def _branch(self, g, left, other_null, count, n_rx):
        if count == 0:
            return (
                np.zeros(0),
                np.zeros((self.n_s, 0), dtype=complex),
                np.zeros((n_rx, 0), dtype=complex),
            )
        # Receive filter from the raw channel, precoder inside the other
        # link's complement: the filtered channel's row space lies in the
        # selected right-singular subspace, whose kernel contains the
        # complement, so cross-link interference is exactly nulled.
        receive = left[:, :count]
        projected = (receive.conj().T @ g) @ other_null
        inner_left, inner_values, inner_right_h = np.linalg.svd(projected, full_matrices=False)
        precoder = other_null @ inner_right_h[:count].conj().T
        return (
            inner_values[:count] ** 2,
            precoder,
            receive @ inner_left[:, :count],
        )


def block_diagonalize(
    g_sd: np.ndarray, g_sr: np.ndarray, selection: StreamSelection
) -> Stage1Decomposition:
    """Zero-interference stage-1 decomposition for one stream selection."""
    return Stage1Factorization(g_sd, g_sr).decompose(selection)


def stage2_decompose(h_rd_eff: np.ndarray) -> Stage2Decomposition:
    """Parallel channels of stage 2: squared singular values plus precoder."""
    h = np.asarray(h_rd_eff, dtype=complex)
    if not np.all(np.isfinite(h)):
        raise ValueError("effective channel contains non-finite entries")
    _, values, right_h = np.linalg.svd(h, full_matrices=False)
    return Stage2Decomposition(rd_gains=values ** 2, precoder_rd=right_h.conj().T)
