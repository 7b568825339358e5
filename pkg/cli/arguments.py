"""
The command-line surface.
"""
import argparse
from typing import List, Optional

SUBCOMMANDS = (
    "simulate",
    "generator-check",
    "brackets",
    "hitting-time",
    "stationary",
    "diagnose-degenerate",
)
CERTIFICATE_KINDS = ("recurrence", "transience")


def seed_value(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed '{text}'")
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def thread_count(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid thread count '{text}'")
    if value < 0:
        raise argparse.ArgumentTypeError("threads must be non-negative (0 = one per CPU)")
    return value


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="TOML run configuration.")
    parser.add_argument("--out", default=None, help="Output directory (overrides the config and LORENZLAB_OUTPUT_DIR).")
    parser.add_argument("--seed", type=seed_value, default=None, help="Overrides every seed in the config.")
    parser.add_argument("--threads", type=thread_count, default=None, help="Worker threads; 0 = auto.")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lorenzlab",
        description="Stability laboratory for the stochastic Lorenz system.",
    )
    commands = parser.add_subparsers(dest="command", required=True, metavar="command")
    for name in SUBCOMMANDS:
        _common(commands.add_parser(name))
    certificate = commands.add_parser("certificate", help="Sampled Lyapunov certificates.")
    kinds = certificate.add_subparsers(dest="kind", required=True, metavar="kind")
    for kind in CERTIFICATE_KINDS:
        _common(kinds.add_parser(kind))
    return parser


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """Parses argv; `command` is normalised to the router's name, e.g. 'certificate recurrence'."""
    args = build_parser().parse_args(argv)
    if args.command == "certificate":
        args.command = f"certificate {args.kind}"
    return args
