# SPDX-License-Identifier: BSD-3-Clause

"""Certify approximate stationarity of a point."""

import logging
import math

from hyperstat.artifacts import emit_artifacts
from hyperstat.commands.support import EXIT_OK, output_dir, parse_point, print_json, setting
from hyperstat.inner import HyperOracle
from hyperstat.problems import Mode, as_vector, registry_get
from hyperstat.rng import make_rng
from hyperstat.stationarity import (
    EnvelopeConfig,
    clarke_certificate,
    envelope_certificate,
    goldstein_gap,
)
from hyperstat.structure import theory_moduli


logger = logging.getLogger(__name__)


methods = ["envelope", "clarke", "goldstein"]


def register(subparsers):
    parser = subparsers.add_parser("certify", help="certify stationarity at a point")
    parser.add_argument("--problem", required=True)
    parser.add_argument("--x", required=True, help="comma-separated point")
    parser.add_argument("--method", required=True, choices=methods)
    parser.add_argument("--gamma", type=float, help="envelope parameter")
    parser.add_argument("--eps", type=float, help="smoothing radius")
    parser.add_argument("--delta", type=float, help="Goldstein radius")
    parser.add_argument("--rho", type=float, help="declared weak convexity modulus")
    parser.add_argument("--mode", choices=[m.value for m in Mode])
    parser.add_argument("--samples", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--output-dir")
    parser.set_defaults(func=main)


def main(args) -> int:
    p = registry_get(args.problem, args.mode)
    x = as_vector(parse_point(args.x), p.m, "--x")
    moduli = theory_moduli(p.constants)
    seed = setting(args.seed, "seed")
    eps = setting(args.eps, "clarke_eps")
    logger.debug(f"hyperstat is requesting a {args.method} certificate for {p.name} at {x}")

    if args.method == "envelope":
        cfg = EnvelopeConfig(
            setting(args.gamma, "gamma"),
            rho=args.rho,
            lipschitz=moduli.hyper_lipschitz,
        )
        cert = envelope_certificate(HyperOracle(p), x, cfg)
    elif args.method == "clarke":
        rho = args.rho if args.rho is not None else moduli.weak_modulus
        n_mc = setting(args.samples, "certify_samples")
        cert = clarke_certificate(p, x, eps, rho, n_mc, make_rng(seed))
    else:
        delta = args.delta
        if delta is None:
            delta = math.sqrt(2 * eps * moduli.hyper_lipschitz)
        n = setting(args.samples, "goldstein_samples")
        cert = goldstein_gap(
            HyperOracle(p), x, delta, n, rng=make_rng(seed), lipschitz=moduli.hyper_lipschitz
        )

    cert.details["problem"] = p.name
    cert.details["mode"] = p.mode.value
    emit_artifacts(cert, output_dir(args, p))
    output = cert.to_dict()
    print_json(output)
    logger.debug(f"The following dictionary was printed: {output}")
    return EXIT_OK
