"""Rate simulator and optimizer for MIMO links assisted by a reconfigurable
surface and a half-duplex decode-and-forward relay."""

from .channel import ArraySpec, ChannelSet, NodeGeometry, PathLossParams, sample_channel_set
from .experiments import (
    Scenario,
    SweepResult,
    apply_sweep_value,
    default_scenario,
    emit_csv,
    load_scenario,
    run_sweep,
)
from .irs import IrsConfiguration, IrsModelParams
from .optimizer import GaSettings, OptimizationResult, SolutionCandidate, exhaustive_search, run_ga
from .power import PowerBudget, RateBreakdown
from .schemes import Scheme, evaluate

__all__ = [
    "ArraySpec",
    "ChannelSet",
    "GaSettings",
    "IrsConfiguration",
    "IrsModelParams",
    "NodeGeometry",
    "OptimizationResult",
    "PathLossParams",
    "PowerBudget",
    "RateBreakdown",
    "Scenario",
    "Scheme",
    "SolutionCandidate",
    "SweepResult",
    "apply_sweep_value",
    "default_scenario",
    "emit_csv",
    "evaluate",
    "exhaustive_search",
    "load_scenario",
    "run_ga",
    "run_sweep",
    "sample_channel_set",
]
