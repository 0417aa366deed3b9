"""Discrete search over surface configurations, stream counts, and relay draw.

The outer problem is combinatorial: per-element phase indices for both
stages, two stream counts, and a quantized relay power share.  A candidate
is scored by running the full evaluation pipeline (reflection matrices,
effective channels, block diagonalization, both power solvers) and summing
the two stage-1 link rates.  An elitist genetic algorithm searches the
space; an exhaustive enumerator doubles as the optimality oracle on tiny
instances.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import irs, power, precoding


class SearchSpaceTooLargeError(ValueError):
    """Raised when exhaustive enumeration would visit too many candidates."""


@dataclass(frozen=True)
class GaSettings:
    """Knobs of the genetic algorithm.

    ``per_gene_mutation_probability`` of ``None`` resolves to one over the
    chromosome length, so on average one gene mutates per offspring.
    """

    population_size: int = 50
    generation_count: int = 100
    elite_count: int = 2
    crossover_probability: float = 0.9
    per_gene_mutation_probability: float | None = None
    tournament_size: int = 3
    seed: int = 0

    def __post_init__(self) -> None:
        if self.population_size < 1 or self.generation_count < 1:
            raise ValueError("population and generation counts must be positive")
        if not 0 <= self.elite_count < self.population_size:
            raise ValueError("elite_count must be smaller than the population")
        if not 0.0 <= self.crossover_probability <= 1.0:
            raise ValueError("crossover_probability must lie in [0, 1]")
        if self.per_gene_mutation_probability is not None and not (
            0.0 <= self.per_gene_mutation_probability <= 1.0
        ):
            raise ValueError("per_gene_mutation_probability must lie in [0, 1]")
        if self.tournament_size < 1:
            raise ValueError("tournament_size must be positive")


@dataclass(frozen=True)
class SolutionCandidate:
    """One point of the search space: phases, stream counts, relay draw level."""

    phi1_indices: np.ndarray
    phi2_indices: np.ndarray
    sd_count: int
    sr_count: int
    p_r_eff_level: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "phi1_indices", np.asarray(self.phi1_indices, dtype=np.int64))
        object.__setattr__(self, "phi2_indices", np.asarray(self.phi2_indices, dtype=np.int64))


@dataclass(frozen=True)
class OptimizationResult:
    """Best candidate found, its objective value, and the search history.

    ``best_rate`` is the search objective (the sum of the two stage-1 link
    rates); the halved end-to-end rate lives in ``rate_breakdown``.
    """

    best_candidate: SolutionCandidate
    best_rate: float
    rate_breakdown: power.RateBreakdown
    fitness_trace: np.ndarray


def chromosome_sizes(scenario) -> np.ndarray:
    """Per-gene alphabet sizes for the full search space."""
    phase_count = irs.phase_set(scenario.irs.resolution_bits).size
    n_i = scenario.irs.element_count
    sd_max = min(scenario.array_d.element_count, scenario.array_s.element_count)
    sr_max = min(scenario.array_r.element_count, scenario.array_s.element_count)
    return np.array(
        [phase_count] * (2 * n_i)
        + [sd_max + 1, sr_max + 1, scenario.relay_power_levels],
        dtype=np.int64,
    )


def encode(candidate: SolutionCandidate) -> np.ndarray:
    return np.concatenate(
        [
            candidate.phi1_indices,
            candidate.phi2_indices,
            [candidate.sd_count, candidate.sr_count, candidate.p_r_eff_level],
        ]
    ).astype(np.int64)


def decode(genes: np.ndarray, element_count: int) -> SolutionCandidate:
    return SolutionCandidate(
        phi1_indices=genes[:element_count],
        phi2_indices=genes[element_count : 2 * element_count],
        sd_count=int(genes[-3]),
        sr_count=int(genes[-2]),
        p_r_eff_level=int(genes[-1]),
    )


class CandidateEvaluator:
    """Scores candidates against one fixed channel drop.

    Precomputes everything that does not depend on the candidate (the
    per-phase reflection coefficients, the power budget, the relay-draw
    grid), which matters when a search evaluates thousands of candidates
    on the same drop.
    """

    def __init__(self, channels, scenario):
        params = scenario.irs
        theta = irs.phase_set(params.resolution_bits)
        self.phi_values = irs.amplitude(theta, params) * np.exp(1j * theta)
        self.budget = scenario.power_budget()
        self.grid = power.relay_power_grid(self.budget, scenario.relay_power_levels)
        self.channels = channels
        self.scenario = scenario

    def stage1_channels(self, phi1_indices: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        phi1 = self.phi_values[phi1_indices]
        scaled = phi1[:, None] * self.channels.h_si
        return self.channels.h_id @ scaled, self.channels.h_sr + self.channels.h_ir @ scaled

    def stage2_gains(self, phi2_indices: np.ndarray) -> np.ndarray:
        phi2 = self.phi_values[phi2_indices]
        cascade = self.channels.h_rd + self.channels.h_id @ (phi2[:, None] * self.channels.h_ri)
        return np.linalg.svd(cascade, compute_uv=False) ** 2

    def breakdown(self, candidate: SolutionCandidate) -> power.RateBreakdown | None:
        if not 0 <= candidate.p_r_eff_level < self.grid.size:
            return None
        g_sd, g_sr = self.stage1_channels(candidate.phi1_indices)
        selection = precoding.StreamSelection(candidate.sd_count, candidate.sr_count)
        try:
            stage1 = precoding.block_diagonalize(g_sd, g_sr, selection)
        except precoding.InfeasibleSelectionError:
            return None
        rd_gains = self.stage2_gains(candidate.phi2_indices)
        split = power.split_budget(self.budget, float(self.grid[candidate.p_r_eff_level]))
        powers_rd, c_rd_star = power.solve_stage2(rd_gains, split.p_r_eff, self.budget.noise_power)
        alloc = power.solve_stage1(
            stage1.sd_gains, stage1.sr_gains, split.p_s_eff, c_rd_star, self.budget.noise_power
        )
        return power.RateBreakdown(
            c_sd=alloc.c_sd,
            c_sr=alloc.c_sr,
            c_rd=c_rd_star,
            achievable_rate=power.total_rate(alloc, c_rd_star),
            powers_sd=alloc.powers_sd,
            powers_sr=alloc.powers_sr,
            powers_rd=powers_rd,
        )

    def fitness(self, candidate: SolutionCandidate) -> float:
        breakdown = self.breakdown(candidate)
        if breakdown is None:
            return -math.inf
        return breakdown.c_sd + breakdown.c_sr


def evaluate_candidate(
    candidate: SolutionCandidate, channels, scenario
) -> power.RateBreakdown | None:
    """Run the whole pipeline for one candidate; ``None`` if infeasible."""
    return CandidateEvaluator(channels, scenario).breakdown(candidate)


def fitness(candidate: SolutionCandidate, channels, scenario) -> float:
    """Search objective: sum of the stage-1 link rates, -inf if infeasible."""
    return CandidateEvaluator(channels, scenario).fitness(candidate)


def _tournament(fitnesses: np.ndarray, rng: np.random.Generator, size: int) -> int:
    contenders = rng.integers(0, fitnesses.size, size=size)
    return int(contenders[np.argmax(fitnesses[contenders])])


def evolve(
    gene_sizes: np.ndarray,
    fitness_fn,
    settings: GaSettings,
    rng: np.random.Generator,
    seed_genes: list[np.ndarray] | tuple = (),
) -> tuple[np.ndarray, float, np.ndarray]:
    """Elitist generational GA over integer chromosomes.

    Returns the best chromosome, its fitness, and the best-so-far trace
    (one entry per generation, nondecreasing).  Fully deterministic given
    the generator state; repeated chromosomes are scored once through a
    cache.
    """
    sizes = np.asarray(gene_sizes, dtype=np.int64)
    length = sizes.size
    pop_size = settings.population_size
    mutation_p = settings.per_gene_mutation_probability
    if mutation_p is None:
        mutation_p = 1.0 / length

    population = rng.integers(0, sizes, size=(pop_size, length))
    for row, genes in enumerate(seed_genes):
        if row >= pop_size:
            break
        population[row] = np.asarray(genes, dtype=np.int64)

    cache: dict[bytes, float] = {}

    def score(genes: np.ndarray) -> float:
        key = genes.tobytes()
        value = cache.get(key)
        if value is None:
            value = fitness_fn(genes)
            cache[key] = value
        return value

    best_genes = None
    best_fit = -math.inf
    trace = np.empty(settings.generation_count)
    for generation in range(settings.generation_count):
        fitnesses = np.array([score(genes) for genes in population])
        leader = int(np.argmax(fitnesses))
        if fitnesses[leader] > best_fit:
            best_fit = float(fitnesses[leader])
            best_genes = population[leader].copy()
        trace[generation] = best_fit
        if generation == settings.generation_count - 1:
            break

        order = np.argsort(-fitnesses, kind="stable")
        offspring = [population[i].copy() for i in order[: settings.elite_count]]
        while len(offspring) < pop_size:
            parent_a = population[_tournament(fitnesses, rng, settings.tournament_size)]
            parent_b = population[_tournament(fitnesses, rng, settings.tournament_size)]
            if rng.random() < settings.crossover_probability:
                mask = rng.random(length) < 0.5
                child_a = np.where(mask, parent_a, parent_b)
                child_b = np.where(mask, parent_b, parent_a)
            else:
                child_a, child_b = parent_a.copy(), parent_b.copy()
            for child in (child_a, child_b):
                if len(offspring) >= pop_size:
                    break
                resampled = rng.integers(0, sizes)
                mutate = rng.random(length) < mutation_p
                child[mutate] = resampled[mutate]
                offspring.append(child)
        population = np.array(offspring)

    if best_genes is None:
        raise RuntimeError("search never produced a scored candidate")
    return best_genes, best_fit, trace


def run_ga(
    channels,
    scenario,
    settings: GaSettings | None = None,
    seed_candidates: tuple[SolutionCandidate, ...] | list = (),
) -> OptimizationResult:
    """Genetic search over the full candidate space of one channel drop."""
    if settings is None:
        settings = scenario.ga
    sizes = chromosome_sizes(scenario)
    n_i = scenario.irs.element_count
    evaluator = CandidateEvaluator(channels, scenario)

    def fitness_fn(genes: np.ndarray) -> float:
        return evaluator.fitness(decode(genes, n_i))

    rng = np.random.default_rng(settings.seed)
    seeds = [encode(candidate) for candidate in seed_candidates]
    best_genes, best_fit, trace = evolve(sizes, fitness_fn, settings, rng, seeds)
    if not math.isfinite(best_fit):
        raise RuntimeError("the search only visited infeasible candidates")
    candidate = decode(best_genes, n_i)
    breakdown = evaluator.breakdown(candidate)
    assert breakdown is not None
    return OptimizationResult(candidate, best_fit, breakdown, trace)


def _feasible_stream_pairs(scenario):
    sd_max = min(scenario.array_d.element_count, scenario.array_s.element_count)
    sr_max = min(scenario.array_r.element_count, scenario.array_s.element_count)
    n_s = scenario.array_s.element_count
    for sd in range(sd_max + 1):
        for sr in range(sr_max + 1):
            if 0 < sd + sr <= n_s:
                yield sd, sr


def exhaustive_search(channels, scenario, limit: int = 1_000_000) -> OptimizationResult:
    """Global optimum by enumerating every candidate.

    Only viable on tiny instances; raises ``SearchSpaceTooLargeError`` when
    the candidate count exceeds ``limit``.
    """
    params = scenario.irs
    phase_count = irs.phase_set(params.resolution_bits).size
    n_i = params.element_count
    pairs = list(_feasible_stream_pairs(scenario))
    levels = scenario.relay_power_levels
    total = phase_count ** (2 * n_i) * len(pairs) * levels
    if total > limit:
        raise SearchSpaceTooLargeError(f"{total} candidates exceed the limit of {limit}")

    budget = scenario.power_budget()
    grid = power.relay_power_grid(budget, levels)

    # Stage 2 only depends on the second-stage configuration; precompute the
    # forwardable rate and powers for every (configuration, level) pair.
    stage2_table = []
    for phi2_tuple in itertools.product(range(phase_count), repeat=n_i):
        phi2_indices = np.array(phi2_tuple, dtype=np.int64)
        phi2 = irs.reflection_matrix(irs.IrsConfiguration(phi2_indices), params)
        rd_gains = np.linalg.svd(precoding.effective_rd(channels, phi2), compute_uv=False) ** 2
        by_level = [
            power.solve_stage2(rd_gains, float(p_r_eff), budget.noise_power)
            for p_r_eff in grid
        ]
        stage2_table.append((phi2_indices, by_level))

    best = None
    best_fit = -math.inf
    for phi1_tuple in itertools.product(range(phase_count), repeat=n_i):
        phi1_indices = np.array(phi1_tuple, dtype=np.int64)
        phi1 = irs.reflection_matrix(irs.IrsConfiguration(phi1_indices), params)
        factorization = precoding.Stage1Factorization(
            precoding.effective_sd(channels, phi1), precoding.effective_sr(channels, phi1)
        )
        decompositions = {
            pair: factorization.decompose(precoding.StreamSelection(*pair)) for pair in pairs
        }
        for phi2_indices, by_level in stage2_table:
            for pair, stage1 in decompositions.items():
                for level in range(levels):
                    powers_rd, c_rd_star = by_level[level]
                    split = power.split_budget(budget, float(grid[level]))
                    alloc = power.solve_stage1(
                        stage1.sd_gains,
                        stage1.sr_gains,
                        split.p_s_eff,
                        c_rd_star,
                        budget.noise_power,
                    )
                    objective = alloc.c_sd + alloc.c_sr
                    if objective > best_fit:
                        best_fit = objective
                        best = (phi1_indices, phi2_indices, pair, level, alloc, powers_rd, c_rd_star)

    assert best is not None
    phi1_indices, phi2_indices, pair, level, alloc, powers_rd, c_rd_star = best
    candidate = SolutionCandidate(phi1_indices, phi2_indices, pair[0], pair[1], level)
    breakdown = power.RateBreakdown(
        c_sd=alloc.c_sd,
        c_sr=alloc.c_sr,
        c_rd=c_rd_star,
        achievable_rate=power.total_rate(alloc, c_rd_star),
        powers_sd=alloc.powers_sd,
        powers_sr=alloc.powers_sr,
        powers_rd=powers_rd,
    )
    trace = np.array([best_fit])
    return OptimizationResult(candidate, best_fit, breakdown, trace)
