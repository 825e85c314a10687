# SPDX-License-Identifier: BSD-3-Clause

"""Show or change the user configuration."""

import json
import logging

from hyperstat import configuration
from hyperstat.commands.support import EXIT_OK, print_json


logger = logging.getLogger(__name__)


def parse_value(text: str):
    """JSON if it parses, otherwise the plain string."""
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def set_option(key: str, value):
    """Set `key` in the config; `schedule.c_eta` style keys reach into nested dicts."""
    *parents, leaf = key.split(".")
    target = configuration.config
    for part in parents:
        if not isinstance(target.get(part), dict):
            raise ValueError(f"{part!r} is not a group of options")
        target = target[part]
    if not parents and leaf not in configuration.defaults and leaf not in configuration.config:
        raise ValueError(f"Unknown option {key!r}")
    target[leaf] = value
    configuration.save_config()


def register(subparsers):
    parser = subparsers.add_parser("config", help="show or change the configuration")
    parser.add_argument("--show", action="store_true", help="print the effective configuration")
    parser.add_argument("--set", nargs=2, metavar=("KEY", "VALUE"), help="change and save an option")
    parser.set_defaults(func=main)


def main(args) -> int:
    if args.set:
        key, value = args.set
        set_option(key, parse_value(value))
        logger.debug(f"Set {key} to {value}")
    if args.show or not args.set:
        print_json(configuration.config)
    return EXIT_OK
