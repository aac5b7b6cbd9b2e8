"""
Command-line entry point for the butterfly-metrology simulator.

    python run_experiment.py sensitivity --config src/config/config.yaml --workers 4
    python run_experiment.py calibrate distortion --input samples.csv

Exit codes: 0 success, 2 invalid configuration or input, 3 numerical failure.
"""
import argparse
import json
import sys

from pydantic import ValidationError

from src.config.schema import ExperimentConfig
from src.harness.commands import (
    cmd_calibrate,
    cmd_gme,
    cmd_otoc,
    cmd_reference,
    cmd_scaling,
    cmd_schema,
    cmd_sense,
    cmd_sensitivity,
)
from src.harness.tracking import tracked_run
from src.utils.errors import NumericalError, SweepPointError
from src.utils.logger import get_logger

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3

SWEEP_COMMANDS = {
    "otoc": cmd_otoc,
    "sense": cmd_sense,
    "sensitivity": cmd_sensitivity,
    "gme": cmd_gme,
    "reference": cmd_reference,
    "scaling": cmd_scaling,
}


def parse_args(argv=None):
    """Parse command line arguments."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config",
        type=str,
        default="src/config/config.yaml",
        help="Path to the experiment configuration YAML/JSON file"
    )
    common.add_argument("--seed", type=int, help="Seed override")
    common.add_argument("--workers", type=int, help="Number of parallel workers (overrides config)")
    common.add_argument("--out-dir", type=str, help="Output directory (overrides config)")
    common.add_argument(
        "--preset-noise",
        choices=["table1", "none"],
        help="Noise preset override: device parameters or noiseless"
    )

    parser = argparse.ArgumentParser(description="Butterfly-metrology simulator")
    commands = parser.add_subparsers(dest="command", required=True)
    for name in SWEEP_COMMANDS:
        commands.add_parser(name, parents=[common], help=f"Run the {name} sweep")
    schema = commands.add_parser("schema", help="Print the JSON schema of the configuration")
    schema.add_argument("--output", type=str, help="Write the schema to this file instead of stdout")
    calibrate = commands.add_parser("calibrate", parents=[common], help="Fit a calibration model")
    calibrate.add_argument("kind", choices=["distortion", "zgate", "coupling"])
    calibrate.add_argument("--input", type=str, required=True, help="CSV file with the samples")
    calibrate.add_argument("--output", type=str, help="JSON output path")
    return parser.parse_args(argv)


def load_with_overrides(args) -> ExperimentConfig:
    config = ExperimentConfig.from_yaml(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.workers is not None:
        overrides["workers"] = args.workers
    if args.out_dir is not None:
        overrides["output_dir"] = args.out_dir
    if args.preset_noise is not None:
        overrides["noise"] = None if args.preset_noise == "none" else args.preset_noise
    if not overrides:
        return config
    return ExperimentConfig.model_validate({**config.model_dump(mode="json"), **overrides})


def run(args) -> None:
    if args.command == "schema":
        schema = cmd_schema(args.output)
        if not args.output:
            print(json.dumps(schema, indent=2, sort_keys=True))
        return

    config = load_with_overrides(args)
    with tracked_run(config, args.command) as tracker:
        if args.command == "calibrate":
            cmd_calibrate(config, args.kind, args.input, args.output, tracker=tracker)
        else:
            SWEEP_COMMANDS[args.command](config, tracker=tracker)
    logger.info(f"Command '{args.command}' completed; outputs in {config.output_dir}")


def main(argv=None) -> int:
    """Main entry point; returns the process exit code."""
    args = parse_args(argv)
    try:
        run(args)
    except SweepPointError as e:
        logger.error(str(e))
        return EXIT_INVALID if isinstance(e.cause, ValueError) else EXIT_NUMERICAL
    except (ValueError, ValidationError, FileNotFoundError) as e:
        logger.error(f"Invalid input: {e}")
        return EXIT_INVALID
    except NumericalError as e:
        logger.error(f"Numerical failure: {e}")
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    try:
        sys.exit(main())
    except Exception as e:
        logger.error(f"Experiment failed with error: {str(e)}", exc_info=True)
        raise
