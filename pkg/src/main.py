import argparse
import logging
import sys

from cli.commands import COMMANDS, EXIT_NUMERICAL, EXIT_USAGE
from cli.settings import ConfigError
from core.errors import ConsistencyError, DomainError, QuadratureError
from utils.config import VERSION

logger = logging.getLogger("thz_orient")


class UsageParser(argparse.ArgumentParser):
    """ArgumentParser that exits with the usage code 1 instead of 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = UsageParser(
        prog="thz-orient",
        description="Two-pulse THz field-free orientation of a rigid rotor.",
    )
    parser.add_argument("--version", action="version", version=VERSION)
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true")
    verbosity.add_argument("-q", "--quiet", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    conditions = sub.add_parser(
        "conditions", help="tabulate the amplitude and phase conditions"
    )
    conditions.add_argument("--branch", type=int, choices=(1, 2))
    conditions.add_argument(
        "--windings",
        type=int,
        default=0,
        help="highest winding index j to list (default 0)",
    )
    conditions.add_argument(
        "--format", choices=("text", "csv"), default="text"
    )
    conditions.add_argument("--out-dir")

    for name, help_text in (
        ("simulate", "propagate one designed field and report"),
        ("sweep", "sweep bandwidth, detuning or delay"),
        ("compare", "exact propagation against first-order Magnus"),
    ):
        command = sub.add_parser(name, help=help_text)
        command.add_argument(
            "--config",
            required=True,
            help="INI file, or the name of a shipped recipe",
        )
        command.add_argument("--out-dir")
        command.add_argument("--svg", action="store_true")
        command.add_argument(
            "--mode", choices=("exact", "analytic", "both"), default=None
        )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "conditions" and args.windings < 0:
        build_parser().error("--windings must be non-negative")

    level = logging.INFO
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    try:
        return COMMANDS[args.command](args)
    except ConfigError as e:
        logger.error("%s", e)
        return EXIT_USAGE
    except DomainError as e:
        logger.error("invalid input: %s", e)
        return EXIT_USAGE
    except (ConsistencyError, QuadratureError) as e:
        logger.error("numerical failure: %s", e)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
