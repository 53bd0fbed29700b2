"""
Command-line entry point for the Monte Carlo sweeps.

Usage:
    python -m app.cli fig2a --trials 500 --seed 7 --out fig2a.csv --threads 4
    python -m app.cli run --config experiment.json --out result.csv

Preset subcommands accept ``--config`` with a ScenarioConfig JSON that
replaces the bundled defaults; ``run`` requires a full ExperimentConfig JSON.
Without ``--out`` the CSV is written to stdout.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from app.config import DEFAULT_THREADS, setup_logging
from app.exceptions import SimulatorException
from app.schemas.experiment import ExperimentConfig
from app.schemas.scenario import load_scenario
from app.services.experiments import PRESET_NAMES, emit_csv, format_csv, preset_config, run_sweep

logger = logging.getLogger(__name__)

DEFAULT_TRIALS = 500


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subcommand per preset plus ``run``."""
    parser = argparse.ArgumentParser(prog="double-irs-sim", description="Double-IRS link-level Monte Carlo sweeps")
    subparsers = parser.add_subparsers(dest="command", required=True)

    for name in (*PRESET_NAMES, "run"):
        sub = subparsers.add_parser(name, help="run a custom ExperimentConfig" if name == "run" else f"{name} preset")
        sub.add_argument("--config", type=Path, required=name == "run",
                         help="ExperimentConfig JSON (run) or ScenarioConfig JSON (presets)")
        sub.add_argument("--trials", type=int, default=None, help=f"trials per sweep value (default {DEFAULT_TRIALS})")
        sub.add_argument("--seed", type=int, default=None, help="master seed (default 0)")
        sub.add_argument("--out", type=Path, default=None, help="CSV output path (default stdout)")
        sub.add_argument("--threads", type=int, default=DEFAULT_THREADS, help="worker threads per sweep cell")
    return parser


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    """ExperimentConfig for the parsed arguments; CLI flags override the file."""
    if args.command == "run":
        config = ExperimentConfig.model_validate_json(args.config.read_text(encoding="utf-8"))
        overrides = {}
        if args.trials is not None:
            overrides["n_trials"] = args.trials
        if args.seed is not None:
            overrides["master_seed"] = args.seed
        if overrides:
            config = ExperimentConfig.model_validate({**config.model_dump(), **overrides})
        return config

    scenario = load_scenario(args.config) if args.config else None
    return preset_config(
        args.command,
        n_trials=DEFAULT_TRIALS if args.trials is None else args.trials,
        master_seed=0 if args.seed is None else args.seed,
        scenario=scenario,
    )


def main(argv: Optional[List[str]] = None) -> int:
    """Run the CLI; returns the process exit code."""
    setup_logging()
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        logger.error("--threads must be at least 1")
        return 2

    try:
        config = resolve_config(args)
        result = run_sweep(config, threads=args.threads)
        if args.out is None:
            sys.stdout.write(format_csv(result))
        else:
            emit_csv(result, args.out)
    except ValidationError as exc:
        logger.error(f"Invalid configuration: {exc}")
        return 2
    except SimulatorException as exc:
        logger.error(f"{exc.__class__.__name__}: {exc.message}")
        return 1
    except OSError as exc:
        logger.error(f"Cannot read configuration: {exc}")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
