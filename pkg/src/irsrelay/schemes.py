"""The five compared transmission strategies, evaluated on one channel drop.

Hybrid schemes use both stages and pay the half-rate factor; surface-only
schemes transmit in a single stage with the whole power cap at the source
and no halving; the relay-only scheme runs both stages with the surface
switched off.

Random draws and search seeding come from substreams keyed by (master
seed, drop, purpose), so paired schemes see identical randomness: the
optimized variants inject the corresponding random-configuration optimum
into their initial population and can therefore never fall below it.
"""

from __future__ import annotations

import enum
import math
from dataclasses import replace

import numpy as np

from . import irs, optimizer, power, precoding
from .channel import substream
from .numerics import waterfill
from .power import RateBreakdown

# Substream tags within a drop (tag 0 belongs to channel sampling).
_PHASE_STREAM = 1
_SEARCH_STREAM = 2


class Scheme(enum.Enum):
    HYBRID_OPTIMIZED = "hybrid_opt"
    HYBRID_RANDOM_IRS = "hybrid_rand"
    IRS_OPTIMIZED = "irs_opt"
    IRS_RANDOM = "irs_rand"
    RELAY_ONLY = "relay"


_SEARCH_TAG = {Scheme.HYBRID_OPTIMIZED: 0, Scheme.IRS_OPTIMIZED: 1}


def draw_configuration(params: irs.IrsModelParams, rng: np.random.Generator) -> np.ndarray:
    """Uniform per-element codebook indices for one stage."""
    size = irs.phase_set(params.resolution_bits).size
    return rng.integers(0, size, params.element_count)


def _random_stage_indices(scenario, master_seed: int, drop_index: int, stage: int) -> np.ndarray:
    rng = substream(master_seed, drop_index, _PHASE_STREAM, stage)
    return draw_configuration(scenario.irs, rng)


def _derived_ga_settings(scenario, master_seed: int, drop_index: int, scheme: Scheme):
    sequence = np.random.SeedSequence(
        master_seed, spawn_key=(drop_index, _SEARCH_STREAM, _SEARCH_TAG[scheme])
    )
    return replace(scenario.ga, seed=int(sequence.generate_state(1)[0]))


def _effective_rank(singular_values: np.ndarray) -> int:
    if singular_values.size == 0 or singular_values[0] == 0:
        return 0
    return int(np.sum(singular_values > 1e-9 * singular_values[0]))


def optimize_given_phases(
    channels, scenario, phi1_indices: np.ndarray, phi2_indices: np.ndarray
) -> tuple[optimizer.SolutionCandidate, RateBreakdown]:
    """Best stream counts and relay draw for fixed surface configurations.

    The inner problems are convex, so for frozen phases the remaining
    search space is small enough to enumerate exactly.  Stream counts
    beyond a link's effective rank are skipped: the extra streams carry
    zero gain while shrinking the other link's null space, so they can
    never win.
    """
    evaluator = optimizer.CandidateEvaluator(channels, scenario)
    factorization = precoding.Stage1Factorization(*evaluator.stage1_channels(phi1_indices))
    rd_gains = evaluator.stage2_gains(phi2_indices)

    budget = evaluator.budget
    grid = evaluator.grid
    stage2_by_level = [
        power.solve_stage2(rd_gains, float(p_r_eff), budget.noise_power) for p_r_eff in grid
    ]

    sd_limit = min(
        min(scenario.array_d.element_count, scenario.array_s.element_count),
        max(_effective_rank(factorization.singular_values_sd), 1),
    )
    sr_limit = min(
        min(scenario.array_r.element_count, scenario.array_s.element_count),
        max(_effective_rank(factorization.singular_values_sr), 1),
    )
    n_s = scenario.array_s.element_count
    pairs = [
        (sd, sr)
        for sd in range(sd_limit + 1)
        for sr in range(sr_limit + 1)
        if 0 < sd + sr <= n_s
    ]

    best = None
    best_fit = -math.inf
    for pair in pairs:
        stage1 = factorization.decompose(precoding.StreamSelection(*pair))
        for level, (powers_rd, c_rd_star) in enumerate(stage2_by_level):
            split = power.split_budget(budget, float(grid[level]))
            alloc = power.solve_stage1(
                stage1.sd_gains, stage1.sr_gains, split.p_s_eff, c_rd_star, budget.noise_power
            )
            objective = alloc.c_sd + alloc.c_sr
            if objective > best_fit:
                best_fit = objective
                best = (pair, level, alloc, powers_rd, c_rd_star)

    assert best is not None
    pair, level, alloc, powers_rd, c_rd_star = best
    candidate = optimizer.SolutionCandidate(phi1_indices, phi2_indices, pair[0], pair[1], level)
    breakdown = RateBreakdown(
        c_sd=alloc.c_sd,
        c_sr=alloc.c_sr,
        c_rd=c_rd_star,
        achievable_rate=power.total_rate(alloc, c_rd_star),
        powers_sd=alloc.powers_sd,
        powers_sr=alloc.powers_sr,
        powers_rd=powers_rd,
    )
    return candidate, breakdown


def _single_stage_breakdown(channels, scenario, phi1: np.ndarray) -> RateBreakdown:
    # Surface-only transmission: one stage, no halving, and the whole cap
    # available at the source since no relay shares it.
    gains = np.linalg.svd(precoding.effective_sd(channels, phi1), compute_uv=False) ** 2
    budget = scenario.power_budget()
    powers = np.zeros_like(gains)
    c_sd = 0.0
    positive = gains > 0
    if positive.any():
        result = waterfill(gains[positive], budget.p_max, budget.noise_power)
        powers[positive] = result.powers
        c_sd = result.rate_bits
    return RateBreakdown(
        c_sd=c_sd,
        c_sr=0.0,
        c_rd=0.0,
        achievable_rate=c_sd,
        powers_sd=powers,
        powers_sr=np.zeros(0),
        powers_rd=np.zeros(0),
    )


def _single_stage_rate(channels, budget, phi_values: np.ndarray, indices: np.ndarray) -> float:
    # Fitness for the surface-only search; avoids rebuilding full matrices.
    cascade = channels.h_id @ (phi_values[indices][:, None] * channels.h_si)
    gains = np.linalg.svd(cascade, compute_uv=False) ** 2
    positive = gains > 0
    if not positive.any():
        return 0.0
    return waterfill(gains[positive], budget.p_max, budget.noise_power).rate_bits


def _evaluate_relay_only(channels, scenario) -> RateBreakdown:
    off = irs.irs_off(scenario.irs.element_count)
    g_sd = precoding.effective_sd(channels, off)
    g_sr = precoding.effective_sr(channels, off)
    sr_count = min(scenario.array_r.element_count, scenario.array_s.element_count)
    stage1 = precoding.block_diagonalize(g_sd, g_sr, precoding.StreamSelection(0, sr_count))
    rd_gains = np.linalg.svd(precoding.effective_rd(channels, off), compute_uv=False) ** 2

    budget = scenario.power_budget()
    grid = power.relay_power_grid(budget, scenario.relay_power_levels)
    best = None
    best_rate = -math.inf
    for p_r_eff in grid:
        split = power.split_budget(budget, float(p_r_eff))
        powers_rd, c_rd_star = power.solve_stage2(rd_gains, split.p_r_eff, budget.noise_power)
        alloc = power.solve_stage1(
            stage1.sd_gains, stage1.sr_gains, split.p_s_eff, c_rd_star, budget.noise_power
        )
        rate = power.total_rate(alloc, c_rd_star)
        if rate > best_rate:
            best_rate = rate
            best = (alloc, powers_rd, c_rd_star)

    assert best is not None
    alloc, powers_rd, c_rd_star = best
    return RateBreakdown(
        c_sd=alloc.c_sd,
        c_sr=alloc.c_sr,
        c_rd=c_rd_star,
        achievable_rate=best_rate,
        powers_sd=alloc.powers_sd,
        powers_sr=alloc.powers_sr,
        powers_rd=powers_rd,
    )


def _evaluate_irs_optimized(channels, scenario, master_seed: int, drop_index: int) -> RateBreakdown:
    params = scenario.irs
    theta = irs.phase_set(params.resolution_bits)
    phi_values = irs.amplitude(theta, params) * np.exp(1j * theta)
    budget = scenario.power_budget()
    random_indices = _random_stage_indices(scenario, master_seed, drop_index, 0)

    def fitness_fn(genes: np.ndarray) -> float:
        return _single_stage_rate(channels, budget, phi_values, genes)

    settings = _derived_ga_settings(scenario, master_seed, drop_index, Scheme.IRS_OPTIMIZED)
    rng = np.random.default_rng(settings.seed)
    sizes = np.full(params.element_count, theta.size, dtype=np.int64)
    best_genes, _, _ = optimizer.evolve(sizes, fitness_fn, settings, rng, [random_indices])
    phi1 = irs.reflection_matrix(irs.IrsConfiguration(best_genes), params)
    return _single_stage_breakdown(channels, scenario, phi1)


def evaluate(scheme: Scheme, channels, scenario, master_seed: int, drop_index: int = 0) -> RateBreakdown:
    """Achievable-rate breakdown of one scheme on one channel drop."""
    if scheme is Scheme.RELAY_ONLY:
        return _evaluate_relay_only(channels, scenario)

    if scheme is Scheme.IRS_RANDOM:
        indices = _random_stage_indices(scenario, master_seed, drop_index, 0)
        phi1 = irs.reflection_matrix(irs.IrsConfiguration(indices), scenario.irs)
        return _single_stage_breakdown(channels, scenario, phi1)

    if scheme is Scheme.IRS_OPTIMIZED:
        return _evaluate_irs_optimized(channels, scenario, master_seed, drop_index)

    phi1_indices = _random_stage_indices(scenario, master_seed, drop_index, 0)
    phi2_indices = _random_stage_indices(scenario, master_seed, drop_index, 1)
    seed_candidate, random_breakdown = optimize_given_phases(
        channels, scenario, phi1_indices, phi2_indices
    )
    if scheme is Scheme.HYBRID_RANDOM_IRS:
        return random_breakdown

    if scheme is Scheme.HYBRID_OPTIMIZED:
        settings = _derived_ga_settings(scenario, master_seed, drop_index, scheme)
        result = optimizer.run_ga(channels, scenario, settings, [seed_candidate])
        return result.rate_breakdown

    raise ValueError(f"unknown scheme: {scheme!r}")
