import argparse
import logging
from pathlib import Path
from typing import Callable, Dict, Optional, Tuple

import pandas as pd

from src import device, experiment
from src.entities.device import DeviceParams, DeviceState, DeviceStateError
from src.entities.experiment_config import ConfigError, ExperimentConfig

CommandHandler = Callable[[argparse.Namespace], int]
ArgumentsBuilder = Callable[[argparse.ArgumentParser], None]

_logger = logging.getLogger(__name__)

try:
    from codecarbon import track_emissions
    _logger.debug("CodeCarbon is available. Tracking enabled.")
except ImportError:
    _logger.debug("CodeCarbon not found. Tracking disabled.")

    def track_emissions(fn=None, **_):
        """
        A no-op decorator that does nothing but return the original function.
        It handles both @track_emissions and @track_emissions(param=...) usages.
        """
        # Case 1: Called as @track_emissions (no parentheses)
        if fn is not None and callable(fn):
            return fn

        # Case 2: Called as @track_emissions(...) (with parentheses/arguments)
        def decorator(func):
            return func

        return decorator

class CommandRouter:
    """
    Registry of CLI subcommands, each with its own argument builder.
    """

    def __init__(self) -> None:
        self._commands: Dict[str, Tuple[CommandHandler, str, Optional[ArgumentsBuilder]]] = {}

    def command(self, name: str, help: str, arguments: Optional[ArgumentsBuilder] = None):
        def decorator(handler: CommandHandler) -> CommandHandler:
            self._commands[name] = (handler, help, arguments)
            return handler
        return decorator

    def install(self, parser: argparse.ArgumentParser) -> None:
        subparsers = parser.add_subparsers(dest="command", required=True)
        for name, (_, help, arguments) in self._commands.items():
            subparser = subparsers.add_parser(name, help=help, description=help)
            if arguments is not None:
                arguments(subparser)

    def dispatch(self, args: argparse.Namespace) -> int:
        handler, _, _ = self._commands[args.command]
        return handler(args)

router = CommandRouter()

def _experiment_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, required=True, help="Path to the YAML experiment config.")
    parser.add_argument("--out", type=Path, help="Output directory (overrides output.directory).")
    parser.add_argument("--seed", type=int, help="Seed for subsetting, initialisation and shuffling.")
    parser.add_argument("--workers", type=int, help="Sweep jobs run in parallel.")
    parser.add_argument("--subset-train", type=int, help="Number of training images to sample.")
    parser.add_argument("--subset-test", type=int, help="Number of test images to sample.")

def _inspect_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("pulses", help="Pulse train, e.g. 1001 or 1,0,0,1.")
    parser.add_argument("--config", type=Path, help="Experiment config to take device parameters from.")
    parser.add_argument("--w0", type=float, help="Start state (defaults to w_min).")

def _load_config(args: argparse.Namespace) -> ExperimentConfig:
    return ExperimentConfig.load(args.config).with_overrides(
        out=args.out,
        seed=args.seed,
        workers=args.workers,
        subset_train=args.subset_train,
        subset_test=args.subset_test
    )

def parse_pulses(text: str) -> Tuple[int, ...]:
    slots = tuple(char for char in text if char not in ", ")
    if len(slots) == 0 or any(slot not in "01" for slot in slots):
        raise ConfigError(f"A pulse train is a non-empty string of 0s and 1s, got {text!r}")
    return tuple(int(slot) for slot in slots)

@router.command("run", help="Run a single configuration and write its report.", arguments=_experiment_arguments)
@track_emissions(project_name="dfn-reservoir-run", log_level="error")
def run_command(args: argparse.Namespace) -> int:
    config = _load_config(args)
    report = experiment.run(config)
    _logger.info(
        f"{report.method} k={report.sections} bits={report.bits}: accuracy={report.accuracy:.4f}, "
        f"{report.images_per_second:.4g} images/s, {report.images_per_joule:.4g} images/J, "
        f"{report.device_count} devices"
    )
    return 0

@router.command("sweep", help="Run every configuration of the config's grid.", arguments=_experiment_arguments)
@track_emissions(project_name="dfn-reservoir-sweep", log_level="error")
def sweep_command(args: argparse.Namespace) -> int:
    config = _load_config(args)
    reports = experiment.sweep(config)
    best = max(reports, key=lambda r: r.accuracy)
    _logger.info(f"Best of {len(reports)}: {best.method} k={best.sections} bits={best.bits} ({best.accuracy:.4f})")
    return 0

@router.command("inspect-device", help="Print the state trajectory of one device for a pulse train.", arguments=_inspect_arguments)
def inspect_device_command(args: argparse.Namespace) -> int:
    params = ExperimentConfig.load(args.config).device if args.config is not None else DeviceParams()
    start = None
    if args.w0 is not None:
        try:
            start = DeviceState.at(args.w0, params)
        except DeviceStateError as e:
            raise ConfigError(f"Invalid --w0: {e}") from e
    rows = device.trajectory(parse_pulses(args.pulses), params, start)
    print(pd.DataFrame(rows).to_string(index=False, float_format=lambda v: f"{v:.9g}"))
    return 0
