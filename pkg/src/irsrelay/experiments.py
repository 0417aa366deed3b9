"""Scenario configuration and the Monte Carlo sweep driver.

A sweep evaluates a set of schemes over many independent channel drops for
each value of one swept variable, reusing the same drops across schemes
and sweep values (common random numbers) wherever dimensions permit, and
aggregates mean rates with standard errors into CSV rows.
"""

from __future__ import annotations

import dataclasses
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .channel import ULA, UPA, ArraySpec, NodeGeometry, PathLossParams, sample_channel_set
from .irs import IrsModelParams
from .numerics import db_to_linear
from .optimizer import GaSettings
from .power import PowerBudget
from .schemes import evaluate

SWEEP_VARIABLES = (
    "resolution_bits",
    "source_power_fraction",
    "irs_position_y",
    "irs_element_count",
)


@dataclass(frozen=True)
class Scenario:
    """Everything needed to reproduce one experiment."""

    geometry: NodeGeometry
    array_s: ArraySpec
    array_r: ArraySpec
    array_d: ArraySpec
    array_i: ArraySpec
    path_count: int
    path_loss: PathLossParams
    irs: IrsModelParams
    source_power_fraction: float
    relay_power_w: float
    total_power_w: float
    transmit_snr_db: float
    relay_power_levels: int
    ga: GaSettings
    drops: int
    master_seed: int

    def __post_init__(self) -> None:
        if not 0.0 < self.source_power_fraction <= 1.0:
            raise ValueError("source_power_fraction must lie in (0, 1]")
        if self.total_power_w <= 0 or self.relay_power_w <= 0:
            raise ValueError("power budgets must be positive")
        if self.relay_power_w > self.total_power_w:
            raise ValueError("the relay cap cannot exceed the total cap")
        if self.path_count < 1:
            raise ValueError("path_count must be at least 1")
        if self.irs.element_count != self.array_i.element_count:
            raise ValueError("surface model and surface array disagree on the element count")
        if self.relay_power_levels < 1:
            raise ValueError("relay_power_levels must be positive")
        if self.drops < 1:
            raise ValueError("drops must be at least 1")

    @property
    def noise_power_w(self) -> float:
        return self.total_power_w / db_to_linear(self.transmit_snr_db)

    def power_budget(self) -> PowerBudget:
        return PowerBudget(
            p_s=self.source_power_fraction * self.total_power_w,
            p_r=self.relay_power_w,
            p_max=self.total_power_w,
            noise_power=self.noise_power_w,
        )


def default_scenario() -> Scenario:
    """Baseline experiment: reference geometry, arrays, and channel constants."""
    return Scenario(
        geometry=NodeGeometry(
            position_s=np.array([0.0, 0.0, 3.0]),
            position_r=np.array([10.0, -10.0, 3.0]),
            position_d=np.array([20.0, 0.0, 1.5]),
            position_i=np.array([10.0, 20.0, 3.0]),
        ),
        array_s=ArraySpec(ULA, 16),
        array_r=ArraySpec(ULA, 8),
        array_d=ArraySpec(ULA, 4),
        array_i=ArraySpec(UPA, 36),
        path_count=2,
        path_loss=PathLossParams(k0_db=0.0, reference_distance_m=10.0, exponent=5.76),
        irs=IrsModelParams(
            a_min=0.2, zeta=0.43 * math.pi, nu=1.6, element_count=36, resolution_bits=2
        ),
        source_power_fraction=0.5,
        relay_power_w=1.0,
        total_power_w=1.0,
        transmit_snr_db=10.0,
        relay_power_levels=65,
        ga=GaSettings(),
        drops=200,
        master_seed=1,
    )


def apply_sweep_value(scenario: Scenario, variable: str, value) -> Scenario:
    """A copy of the scenario with one swept variable replaced."""
    if variable == "resolution_bits":
        return dataclasses.replace(
            scenario, irs=dataclasses.replace(scenario.irs, resolution_bits=int(value))
        )
    if variable == "source_power_fraction":
        return dataclasses.replace(scenario, source_power_fraction=float(value))
    if variable == "irs_position_y":
        position = scenario.geometry.position_i.copy()
        position[1] = float(value)
        geometry = dataclasses.replace(scenario.geometry, position_i=position)
        return dataclasses.replace(scenario, geometry=geometry)
    if variable == "irs_element_count":
        count = int(value)
        kind = UPA if math.isqrt(count) ** 2 == count else ULA
        return dataclasses.replace(
            scenario,
            array_i=ArraySpec(kind, count),
            irs=dataclasses.replace(scenario.irs, element_count=count),
        )
    raise ValueError(f"unknown sweep variable {variable!r}; expected one of {SWEEP_VARIABLES}")


@dataclass(frozen=True)
class SweepPoint:
    """Aggregated rate of one scheme at one sweep value."""

    value: float
    scheme: str
    mean_rate_bits: float
    std_err: float
    drops: int


@dataclass(frozen=True)
class SweepResult:
    variable: str
    points: list[SweepPoint]


def _drop_rates(scenario: Scenario, schemes: tuple, drop: int) -> list[float]:
    channels = sample_channel_set(scenario, scenario.master_seed, drop)
    return [
        evaluate(scheme, channels, scenario, scenario.master_seed, drop).achievable_rate
        for scheme in schemes
    ]


def _sweep_task(args) -> list[float]:
    scenario, schemes, drop = args
    return _drop_rates(scenario, schemes, drop)


def run_sweep(
    scenario: Scenario,
    variable: str,
    values,
    schemes,
    workers: int = 1,
) -> SweepResult:
    """Monte Carlo sweep of one variable.

    Per-drop substreams make the output independent of scheduling, so any
    worker count produces identical results.
    """
    if variable not in SWEEP_VARIABLES:
        raise ValueError(f"unknown sweep variable {variable!r}; expected one of {SWEEP_VARIABLES}")
    values = list(values)
    if not values:
        raise ValueError("need at least one sweep value")
    schemes = tuple(schemes)

    points: list[SweepPoint] = []
    for value in values:
        swept = apply_sweep_value(scenario, variable, value)
        tasks = [(swept, schemes, drop) for drop in range(swept.drops)]
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                rows = list(pool.map(_sweep_task, tasks))
        else:
            rows = [_sweep_task(task) for task in tasks]
        rates = np.array(rows, dtype=float).reshape(len(tasks), len(schemes))
        for column, scheme in enumerate(schemes):
            samples = rates[:, column]
            std_err = float(samples.std(ddof=1) / math.sqrt(samples.size)) if samples.size > 1 else 0.0
            points.append(
                SweepPoint(
                    value=value,
                    scheme=scheme.value,
                    mean_rate_bits=float(samples.mean()),
                    std_err=std_err,
                    drops=samples.size,
                )
            )
    return SweepResult(variable, points)


def emit_csv(result: SweepResult, destination) -> None:
    """Write a sweep as CSV; the same result always produces identical bytes."""
    lines = ["sweep_var,sweep_value,scheme,mean_rate_bits,std_err,drops"]
    for point in result.points:
        lines.append(
            f"{result.variable},{point.value},{point.scheme},"
            f"{point.mean_rate_bits!r},{point.std_err!r},{point.drops}"
        )
    text = "\n".join(lines) + "\n"
    if hasattr(destination, "write"):
        destination.write(text)
    else:
        Path(destination).write_text(text, encoding="utf-8")


def scenario_to_dict(scenario: Scenario) -> dict:
    """JSON-ready mirror of a scenario."""
    return {
        "geometry": {
            "source": scenario.geometry.position_s.tolist(),
            "relay": scenario.geometry.position_r.tolist(),
            "destination": scenario.geometry.position_d.tolist(),
            "irs": scenario.geometry.position_i.tolist(),
        },
        "arrays": {
            "source": {"kind": scenario.array_s.kind, "count": scenario.array_s.element_count},
            "relay": {"kind": scenario.array_r.kind, "count": scenario.array_r.element_count},
            "destination": {"kind": scenario.array_d.kind, "count": scenario.array_d.element_count},
            "irs": {"kind": scenario.array_i.kind, "count": scenario.array_i.element_count},
        },
        "path_count": scenario.path_count,
        "path_loss": {
            "k0_db": scenario.path_loss.k0_db,
            "reference_distance_m": scenario.path_loss.reference_distance_m,
            "exponent": scenario.path_loss.exponent,
        },
        "irs_model": {
            "a_min": scenario.irs.a_min,
            "zeta_rad": scenario.irs.zeta,
            "nu": scenario.irs.nu,
            "resolution_bits": scenario.irs.resolution_bits,
        },
        "power": {
            "source_fraction": scenario.source_power_fraction,
            "relay_w": scenario.relay_power_w,
            "total_w": scenario.total_power_w,
            "transmit_snr_db": scenario.transmit_snr_db,
            "relay_levels": scenario.relay_power_levels,
        },
        "ga": {
            "population_size": scenario.ga.population_size,
            "generation_count": scenario.ga.generation_count,
            "elite_count": scenario.ga.elite_count,
            "crossover_probability": scenario.ga.crossover_probability,
            "per_gene_mutation_probability": scenario.ga.per_gene_mutation_probability,
            "tournament_size": scenario.ga.tournament_size,
            "seed": scenario.ga.seed,
        },
        "drops": scenario.drops,
        "master_seed": scenario.master_seed,
    }


def _deep_merge(base: dict, overrides: dict) -> dict:
    merged = dict(base)
    for key, value in overrides.items():
        if key not in base:
            raise ValueError(f"unknown configuration key {key!r}")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ValueError(f"configuration key {key!r} must be an object")
            merged[key] = _deep_merge(base[key], value)
        else:
            merged[key] = value
    return merged


def scenario_from_dict(config: dict) -> Scenario:
    """Build a scenario from a (possibly partial) configuration mapping.

    Missing keys fall back to the defaults; unknown keys are rejected so a
    typo cannot silently leave a default in place.
    """
    merged = _deep_merge(scenario_to_dict(default_scenario()), config)
    geometry = NodeGeometry(
        position_s=np.array(merged["geometry"]["source"], dtype=float),
        position_r=np.array(merged["geometry"]["relay"], dtype=float),
        position_d=np.array(merged["geometry"]["destination"], dtype=float),
        position_i=np.array(merged["geometry"]["irs"], dtype=float),
    )
    arrays = {
        name: ArraySpec(spec["kind"], int(spec["count"]))
        for name, spec in merged["arrays"].items()
    }
    return Scenario(
        geometry=geometry,
        array_s=arrays["source"],
        array_r=arrays["relay"],
        array_d=arrays["destination"],
        array_i=arrays["irs"],
        path_count=int(merged["path_count"]),
        path_loss=PathLossParams(
            k0_db=float(merged["path_loss"]["k0_db"]),
            reference_distance_m=float(merged["path_loss"]["reference_distance_m"]),
            exponent=float(merged["path_loss"]["exponent"]),
        ),
        irs=IrsModelParams(
            a_min=float(merged["irs_model"]["a_min"]),
            zeta=float(merged["irs_model"]["zeta_rad"]),
            nu=float(merged["irs_model"]["nu"]),
            element_count=arrays["irs"].element_count,
            resolution_bits=int(merged["irs_model"]["resolution_bits"]),
        ),
        source_power_fraction=float(merged["power"]["source_fraction"]),
        relay_power_w=float(merged["power"]["relay_w"]),
        total_power_w=float(merged["power"]["total_w"]),
        transmit_snr_db=float(merged["power"]["transmit_snr_db"]),
        relay_power_levels=int(merged["power"]["relay_levels"]),
        ga=GaSettings(
            population_size=int(merged["ga"]["population_size"]),
            generation_count=int(merged["ga"]["generation_count"]),
            elite_count=int(merged["ga"]["elite_count"]),
            crossover_probability=float(merged["ga"]["crossover_probability"]),
            per_gene_mutation_probability=(
                None
                if merged["ga"]["per_gene_mutation_probability"] is None
                else float(merged["ga"]["per_gene_mutation_probability"])
            ),
            tournament_size=int(merged["ga"]["tournament_size"]),
            seed=int(merged["ga"]["seed"]),
        ),
        drops=int(merged["drops"]),
        master_seed=int(merged["master_seed"]),
    )


def load_scenario(path) -> Scenario:
    """Read a JSON scenario configuration from disk."""
    with open(path, "r", encoding="utf-8") as handle:
        config = json.load(handle)
    if not isinstance(config, dict):
        raise ValueError("scenario configuration must be a JSON object")
    return scenario_from_dict(config)
