"""
Main entrypoint.

Parses the command line, loads the run configuration, dispatches the
subcommand and appends one entry to the run log. Exit codes: 0 when every
check passed, 1 when a check failed, 2 for a configuration error.
"""

import sys
import time
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError # type: ignore

from cli.arguments import parse_args
from cli.outputs import RunOutputs
from core.config import load_run_config, settings
from models.log_models import FailureRunLog, RunInfo, SuccessRunLog
from services.command_router import CommandRouter
from services.exceptions import ConfigurationError, LabError, ParameterError
from services.log_manager import LogManager

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

logger = LogManager()


def _log_failure(out_dir: Path, command: str, info: RunInfo, exc: Exception) -> None:
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        print(f"--- Cannot create output directory for the run log: {e} ---", file=sys.stderr)
        return
    log_data = FailureRunLog(action=command, run=info, error={"type": type(exc).__name__, "detail": str(exc)})
    logger.log(out_dir / settings.LORENZLAB_RUN_LOG, log_data)


def main(argv: Optional[List[str]] = None) -> int:
    args = parse_args(argv)
    start_time = time.time()

    try:
        config = load_run_config(args.config).with_overrides(seed=args.seed, output_dir=args.out)
    except ConfigurationError as e:
        # nothing is written for a configuration that does not load
        print(f"Configuration error: {e.message}", file=sys.stderr)
        return EXIT_CONFIG

    out_dir = Path(config.output_dir or settings.LORENZLAB_OUTPUT_DIR)
    threads = settings.LORENZLAB_THREADS if args.threads is None else args.threads
    info = RunInfo(argv=list(sys.argv[1:] if argv is None else argv), config_path=args.config, seed=args.seed, threads=threads)
    outputs = RunOutputs(out_dir, config)

    print(f"--- {args.command}: writing to {out_dir} ---", file=sys.stderr)
    try:
        passed = CommandRouter(config, outputs, threads).route(args.command)
    except (ConfigurationError, ParameterError, ValidationError) as e:
        print(f"Configuration error: {getattr(e, 'message', e)}", file=sys.stderr)
        _log_failure(out_dir, args.command, info, e)
        return EXIT_CONFIG
    except LabError as e:
        print(f"Error: {e.message}", file=sys.stderr)
        _log_failure(out_dir, args.command, info, e)
        return EXIT_FAIL
    except Exception as e:
        _log_failure(out_dir, args.command, info, e)
        raise

    out_dir.mkdir(parents=True, exist_ok=True)
    log_data = SuccessRunLog(
        action=args.command, run=info, passed=passed, files=outputs.files,
        latency_ms=(time.time() - start_time) * 1000,
    )
    logger.log(out_dir / settings.LORENZLAB_RUN_LOG, log_data)
    print(f"--- {args.command}: {'pass' if passed else 'FAIL'} ({len(outputs.files)} files) ---", file=sys.stderr)
    return EXIT_PASS if passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
