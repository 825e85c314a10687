# SPDX-License-Identifier: BSD-3-Clause

"""Command-line entry point: `hyperstat <subcommand> [options]`."""

import argparse
import logging
import sys

from hyperstat import configuration
from hyperstat.commands import certify, check, config, list_problems, rates, run
from hyperstat.commands.support import EXIT_RUNTIME, EXIT_USAGE
from hyperstat.errors import HyperstatError


logger = logging.getLogger("hyperstat")


class ArgumentParser(argparse.ArgumentParser):
    """Usage errors exit with 1 rather than argparse's 2, which means a solver error here."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--debug", action="store_true")

    # --debug is per subcommand, as each command script had its own
    parser = ArgumentParser(prog="hyperstat")
    parser.add_argument("--version", action="version", version=configuration.HYPERSTAT_VERSION)
    subparsers = parser.add_subparsers(
        dest="command",
        required=True,
        parser_class=lambda **kwargs: ArgumentParser(parents=[common], **kwargs),
    )
    for command in (list_problems, run, check, certify, rates, config):
        command.register(subparsers)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    configuration.configure_logging(args.debug)
    try:
        return args.func(args)
    except HyperstatError as err:
        logger.error(str(err))
        return EXIT_RUNTIME
    except ValueError as err:
        print(f"hyperstat: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as err:
        logger.error(str(err))
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
