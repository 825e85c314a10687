# SPDX-License-Identifier: BSD-3-Clause

"""Run a rate experiment described by a JSON file."""

import logging

from hyperstat.commands.support import EXIT_OK, print_json
from hyperstat.harness import ExperimentConfig, run_experiment


logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("run", help="run an experiment from a JSON config")
    parser.add_argument("--config", required=True, help="experiment JSON file")
    parser.add_argument("--output-dir", help="where to write traces and the report")
    parser.set_defaults(func=main)


def main(args) -> int:
    cfg = ExperimentConfig.from_json(args.config)
    if args.output_dir:
        cfg.output_dir = args.output_dir
    logger.debug(f"hyperstat is requesting an experiment: {cfg.to_dict()}")
    report = run_experiment(cfg)
    output = {
        "problem": report.problem,
        "mode": report.mode.value,
        "measurement": report.measurement.value,
        "rates": [{"T": r.T, "mean": r.mean, "stderr": r.stderr} for r in report.rows],
        "slope": report.slope,
        "intercept": report.intercept,
        "wall_clock_seconds": report.wall_clock,
    }
    print_json(output)
    logger.debug(f"The following dictionary was printed: {output}")
    return EXIT_OK
