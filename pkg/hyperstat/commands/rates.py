# SPDX-License-Identifier: BSD-3-Clause

"""Re-fit the rate of a written report."""

import json
import logging

from hyperstat.commands.support import EXIT_OK, print_json
from hyperstat.harness import RateReport, fit_rate


logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("rates", help="re-fit the log-log slope of a report")
    parser.add_argument("--report", required=True, help="report_<problem>.json")
    parser.set_defaults(func=main)


def main(args) -> int:
    with open(args.report, encoding="utf-8") as f:
        report = RateReport.from_dict(json.load(f))
    slope, intercept = fit_rate((r.T, r.mean) for r in report.rows)
    output = {"problem": report.problem, "slope": slope, "intercept": intercept}
    print_json(output)
    logger.debug(f"The following dictionary was printed: {output}")
    return EXIT_OK
