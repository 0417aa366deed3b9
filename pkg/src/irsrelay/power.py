"""Power allocation for the two transmission stages.

The two stages are coupled only through the relay's effective power draw:
fixing it splits the problem into a plain stage-2 waterfilling and a
stage-1 allocation in which the relay-bound rate may not exceed what stage
2 can forward.  Both pieces are convex and solved in closed form.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .numerics import InfeasibleAllocationError, waterfill


@dataclass(frozen=True)
class PowerBudget:
    """Source cap, relay cap, grand total cap, and noise power, in watts."""

    p_s: float
    p_r: float
    p_max: float
    noise_power: float

    def __post_init__(self) -> None:
        for name in ("p_s", "p_r", "p_max", "noise_power"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.p_s > self.p_max or self.p_r > self.p_max:
            raise ValueError("per-device caps cannot exceed the total cap")


@dataclass(frozen=True)
class PowerSplit:
    """Relay draw and the source power left under the total cap."""

    p_r_eff: float
    p_s_eff: float


def split_budget(budget: PowerBudget, p_r_eff: float) -> PowerSplit:
    """Source power available once the relay reserves ``p_r_eff``."""
    if not 0.0 <= p_r_eff <= budget.p_r:
        raise ValueError("relay draw must lie within [0, p_r]")
    return PowerSplit(p_r_eff, min(budget.p_s, budget.p_max - p_r_eff))


def relay_power_grid(budget: PowerBudget, levels: int) -> np.ndarray:
    """Quantized relay-draw candidates searched by the outer optimizer."""
    if levels < 1:
        raise ValueError("need at least one grid level")
    return np.linspace(0.0, min(budget.p_r, budget.p_max), levels)


class Binding(enum.Enum):
    """Whether the stage-1 solution hit the relay forwarding cap."""

    SLACK = "relay-constraint-slack"
    TIGHT = "relay-constraint-tight"


@dataclass(frozen=True)
class Stage1Allocation:
    """Per-stream stage-1 powers and the resulting link rates."""

    powers_sd: np.ndarray
    powers_sr: np.ndarray
    c_sd: float
    c_sr: float
    binding: Binding


@dataclass(frozen=True)
class RateBreakdown:
    """Rates and per-stream powers of one fully evaluated candidate."""

    c_sd: float
    c_sr: float
    c_rd: float
    achievable_rate: float
    powers_sd: np.ndarray
    powers_sr: np.ndarray
    powers_rd: np.ndarray


def _rate_bits(gains: np.ndarray, powers: np.ndarray, noise_power: float) -> float:
    return float(np.sum(np.log2(1.0 + gains * powers / noise_power)))


def solve_stage2(
    rd_gains: np.ndarray, p_r_eff: float, noise_power: float
) -> tuple[np.ndarray, float]:
    """Waterfill the relay draw over the stage-2 eigenmodes.

    Returns the per-mode powers and the best forwardable rate; with no
    usable modes (or no power) the rate is zero and the draw goes unused.
    """
    gains = np.asarray(rd_gains, dtype=float)
    if p_r_eff < 0:
        raise ValueError("relay draw must be nonnegative")
    powers = np.zeros_like(gains)
    active = gains > 0
    if p_r_eff == 0 or not active.any():
        return powers, 0.0
    result = waterfill(gains[active], p_r_eff, noise_power)
    powers[active] = result.powers
    return powers, result.rate_bits


def min_power_for_rate(gains: np.ndarray, rate_bits: float, noise_power: float) -> np.ndarray:
    """Least total power reaching ``rate_bits`` over parallel channels.

    Inverse of waterfilling: the level is pinned by the target rate instead
    of the budget.  Channels whose floor sits above the level are dropped
    and the level recomputed over the survivors, so the returned powers are
    all nonnegative and the target is met exactly.
    """
    gains = np.asarray(gains, dtype=float)
    powers = np.zeros_like(gains)
    if rate_bits < 0:
        raise ValueError("target rate must be nonnegative")
    if rate_bits == 0:
        return powers
    positive = np.flatnonzero(gains > 0)
    if positive.size == 0:
        raise InfeasibleAllocationError("a positive rate needs at least one positive gain")
    floors = noise_power / gains[positive]
    order = np.argsort(floors, kind="stable")
    log_floors = np.log(floors[order])
    prefix = np.cumsum(log_floors)
    log_target = rate_bits * math.log(2.0)
    for active in range(order.size, 0, -1):
        log_level = (log_target + prefix[active - 1]) / active
        if log_level >= log_floors[active - 1] - 1e-15:
            level = math.exp(log_level)
            alloc = np.zeros(order.size)
            alloc[:active] = np.maximum(level - np.exp(log_floors[:active]), 0.0)
            restored = np.zeros(order.size)
            restored[order] = alloc
            powers[positive] = restored
            return powers
    raise AssertionError("unreachable: a single channel always clears its own floor")


def solve_stage1(
    sd_gains: np.ndarray,
    sr_gains: np.ndarray,
    p_s_eff: float,
    c_rd_star: float,
    noise_power: float,
) -> Stage1Allocation:
    """Split the stage-1 budget between the two links.

    Phase A waterfills jointly over both links (one shared water level);
    if the relay-bound rate already fits under the stage-2 cap that is the
    optimum.  Otherwise the cap is active: the relay link gets the minimum
    power that meets the cap exactly and the remainder is waterfilled over
    the destination link.
    """
    sd = np.asarray(sd_gains, dtype=float)
    sr = np.asarray(sr_gains, dtype=float)
    if p_s_eff < 0:
        raise ValueError("stage-1 budget must be nonnegative")
    if c_rd_star < 0:
        raise ValueError("stage-2 cap must be nonnegative")
    n_sd = sd.size
    combined = np.concatenate([sd, sr])
    powers = np.zeros_like(combined)
    positive = combined > 0

    if p_s_eff == 0 or not positive.any():
        if p_s_eff > 0 and combined.size > 0:
            # No gain can buy rate, but the budget constraint is an
            # equality: spread it, harmlessly.
            powers[:] = p_s_eff / combined.size
        return Stage1Allocation(powers[:n_sd], powers[n_sd:], 0.0, 0.0, Binding.SLACK)

    joint = waterfill(combined[positive], p_s_eff, noise_power)
    powers[positive] = joint.powers
    c_sd_joint = _rate_bits(sd, powers[:n_sd], noise_power)
    c_sr_joint = _rate_bits(sr, powers[n_sd:], noise_power)
    if c_sr_joint <= c_rd_star + 1e-12 * max(1.0, c_rd_star):
        return Stage1Allocation(
            powers[:n_sd], powers[n_sd:], c_sd_joint, c_sr_joint, Binding.SLACK
        )

    # Cap active: pin the relay-bound rate at the cap with least power.
    powers_sr = min_power_for_rate(sr, c_rd_star, noise_power)
    spent = float(powers_sr.sum())
    if spent > p_s_eff + 1e-9 * max(1.0, p_s_eff):
        raise RuntimeError(
            "pinning the relay-bound rate costs more than the budget; "
            "the joint allocation should then have satisfied the cap"
        )
    c_sr = _rate_bits(sr, powers_sr, noise_power)
    remaining = max(p_s_eff - spent, 0.0)
    powers_sd = np.zeros(n_sd)
    c_sd = 0.0
    positive_sd = sd > 0
    if remaining > 0 and positive_sd.any():
        direct = waterfill(sd[positive_sd], remaining, noise_power)
        powers_sd[positive_sd] = direct.powers
        c_sd = direct.rate_bits
    elif remaining > 0 and n_sd > 0:
        powers_sd[:] = remaining / n_sd
    return Stage1Allocation(powers_sd, powers_sr, c_sd, c_sr, Binding.TIGHT)


def total_rate(alloc: Stage1Allocation, c_rd_star: float) -> float:
    """End-to-end achievable rate of the two-stage scheme.

    The half accounts for the two stages taking twice the airtime of a
    single transmission; the relayed sub-message moves at the slower of its
    two hops.
    """
    return 0.5 * (alloc.c_sd + min(alloc.c_sr, c_rd_star))
