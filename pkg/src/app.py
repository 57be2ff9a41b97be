import argparse
import logging
import sys
from enum import IntEnum
from typing import Optional, Sequence

from pydantic import ValidationError

from src.dataset import DatasetError
from src.entities.device import DeviceStateError
from src.entities.experiment_config import ConfigError
from src.preprocess import PreprocessError
from src.readout import ReadoutError
from src.reservoir import ReservoirError
from src.router import router
from src.utils.config import settings

logging.basicConfig(
    format="%(asctime)s [%(name)-25s] %(levelname)-8s %(message)s",
    level=logging.INFO,
    datefmt="%Y-%m-%d %H:%M:%S",
    force=True
)

_logger = logging.getLogger(__name__)

class ExitCode(IntEnum):
    OK = 0
    FAILURE = 1
    CONFIG_ERROR = 2
    DATA_ERROR = 3

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dfn-reservoir", description=settings.APP_NAME)
    parser.add_argument(
        "--log-level",
        default=settings.LOG_LEVEL,
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Root logging level."
    )
    router.install(parser)
    return parser

def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.getLogger().setLevel(args.log_level)

    try:
        return router.dispatch(args)
    except (ConfigError, ValidationError, DeviceStateError, PreprocessError, ReservoirError, ReadoutError) as e:
        _logger.error(f"Invalid configuration: {e}")
        return ExitCode.CONFIG_ERROR
    except DatasetError as e:
        _logger.error(f"Dataset error: {e}")
        return ExitCode.DATA_ERROR
    except Exception as e:
        _logger.exception(f"Unexpected failure: {e}")
        return ExitCode.FAILURE

if __name__ == "__main__":
    sys.exit(main())
