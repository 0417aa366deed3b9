"""Command-line entry points: evaluate one drop, or run a full sweep."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .channel import sample_channel_set
from .experiments import (
    SWEEP_VARIABLES,
    default_scenario,
    emit_csv,
    load_scenario,
    run_sweep,
)
from .schemes import Scheme, evaluate

_INTEGER_VARIABLES = {"resolution_bits", "irs_element_count"}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="irsrelay",
        description="Rate simulator for relay- and surface-assisted MIMO links",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    single = sub.add_parser("evaluate", help="evaluate one scheme on one channel drop")
    single.add_argument("--scheme", required=True, choices=[s.value for s in Scheme])
    single.add_argument("--config", help="JSON scenario file (defaults apply if omitted)")
    single.add_argument("--seed", type=int, help="override the scenario master seed")
    single.add_argument("--drop", type=int, default=0, help="drop index (default 0)")

    sweep = sub.add_parser("sweep", help="Monte Carlo sweep over one variable")
    sweep.add_argument("--config", help="JSON scenario file (defaults apply if omitted)")
    sweep.add_argument("--var", required=True, choices=SWEEP_VARIABLES)
    sweep.add_argument("--values", required=True, help="comma-separated sweep values")
    sweep.add_argument("--schemes", required=True, help="comma-separated scheme names")
    sweep.add_argument("--drops", type=int, help="override the scenario drop count")
    sweep.add_argument("--seed", type=int, help="override the scenario master seed")
    sweep.add_argument("--out", help="CSV output path (stdout if omitted)")
    sweep.add_argument("--workers", type=int, default=1, help="parallel worker count")
    return parser


def _load(config_path, seed=None, drops=None):
    import dataclasses

    scenario = load_scenario(config_path) if config_path else default_scenario()
    if seed is not None:
        scenario = dataclasses.replace(scenario, master_seed=seed)
    if drops is not None:
        scenario = dataclasses.replace(scenario, drops=drops)
    return scenario


def _parse_values(text: str, variable: str) -> list:
    caster = int if variable in _INTEGER_VARIABLES else float
    return [caster(piece) for piece in text.split(",") if piece.strip()]


def _parse_schemes(text: str) -> list[Scheme]:
    names = [piece.strip() for piece in text.split(",") if piece.strip()]
    return [Scheme(name) for name in names]


def _run_evaluate(args) -> int:
    scenario = _load(args.config, seed=args.seed)
    channels = sample_channel_set(scenario, scenario.master_seed, args.drop)
    breakdown = evaluate(
        Scheme(args.scheme), channels, scenario, scenario.master_seed, args.drop
    )
    with np.printoptions(precision=6, suppress=True):
        print(f"scheme: {args.scheme}")
        print(f"seed: {scenario.master_seed}  drop: {args.drop}")
        print(f"C_SD: {breakdown.c_sd:.6f} bits")
        print(f"C_SR: {breakdown.c_sr:.6f} bits")
        print(f"C_RD: {breakdown.c_rd:.6f} bits")
        print(f"achievable_rate: {breakdown.achievable_rate:.6f} bits")
        print(f"powers_sd: {breakdown.powers_sd}")
        print(f"powers_sr: {breakdown.powers_sr}")
        print(f"powers_rd: {breakdown.powers_rd}")
    return 0


def _run_sweep(args) -> int:
    scenario = _load(args.config, seed=args.seed, drops=args.drops)
    values = _parse_values(args.values, args.var)
    schemes = _parse_schemes(args.schemes)
    result = run_sweep(scenario, args.var, values, schemes, workers=args.workers)
    if args.out:
        emit_csv(result, args.out)
    else:
        emit_csv(result, sys.stdout)
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "evaluate":
            return _run_evaluate(args)
        return _run_sweep(args)
    except (ValueError, OSError) as error:
        print(f"error: {error}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
