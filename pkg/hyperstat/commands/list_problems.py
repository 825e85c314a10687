# SPDX-License-Identifier: BSD-3-Clause

"""List the fixture problems in the registry."""

import logging

from hyperstat.commands.support import EXIT_OK, print_json
from hyperstat.problems import list_problems, registry_get
from hyperstat.structure import theory_moduli


logger = logging.getLogger(__name__)


def describe_problems() -> list[dict]:
    described = []
    for name in list_problems():
        p = registry_get(name)
        described.append(
            {
                "name": name,
                "m": p.m,
                "n": p.n,
                "default_mode": p.mode.value,
                "descriptor": type(p.descriptor).__name__ if p.descriptor else None,
                "closed_form_modes": sorted(mode.value for mode in p.exact_hyper),
                "working_box": [list(b) for b in p.constants.working_box],
                "assumption_violating": p.assumption_violating,
                "theory_moduli": theory_moduli(p.constants)._asdict(),
            }
        )
    return described


def register(subparsers):
    parser = subparsers.add_parser("list-problems", help="print the problem registry as JSON")
    parser.set_defaults(func=main)


def main(args) -> int:
    output = describe_problems()
    print_json(output)
    logger.debug(f"The following dictionary was printed: {output}")
    return EXIT_OK
