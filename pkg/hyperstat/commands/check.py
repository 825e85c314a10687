# SPDX-License-Identifier: BSD-3-Clause

"""Run one of the structural property checks on a registry problem."""

import logging

from hyperstat.artifacts import emit_artifacts
from hyperstat.commands.support import EXIT_OK, EXIT_PROPERTY, output_dir, print_json, setting
from hyperstat.descriptors import TranslatedSet
from hyperstat.inner import HyperOracle
from hyperstat.problems import Mode, ProblemSpec, registry_get, require_descriptor
from hyperstat.rng import make_rng
from hyperstat.structure import (
    PropertyReport,
    Sense,
    Verdict,
    WitnessMode,
    hyper_lipschitz_check,
    lipschitz_check,
    secant_modulus,
    set_smoothness_check,
    theory_moduli,
)


logger = logging.getLogger(__name__)


properties = [
    "lipschitz",
    "hyper-lipschitz",
    "set-smoothness",
    "secant-convexity",
    "secant-concavity",
]


def default_witness_mode(p: ProblemSpec) -> WitnessMode:
    d = require_descriptor(p)
    if isinstance(d, TranslatedSet):
        return WitnessMode.ANALYTIC_TRANSLATION
    return WitnessMode.BACKFILL


def check(p: ProblemSpec, prop: str, samples: int, seed: int, L=None, witness=None) -> PropertyReport:
    if samples < 1:
        raise ValueError("--samples must be at least 1")
    rng = make_rng(seed)
    if prop == "lipschitz":
        return lipschitz_check(p, samples, rng)
    if prop == "hyper-lipschitz":
        return hyper_lipschitz_check(p, samples, rng)
    if prop == "set-smoothness":
        if L is None:
            L = p.set_smoothness
            if L is None:
                L = theory_moduli(p.constants).solution_smoothness
        mode = WitnessMode(witness) if witness else default_witness_mode(p)
        return set_smoothness_check(
            require_descriptor(p), L, samples, rng, mode, box=p.constants.working_box
        )
    sense = Sense.CONVEXITY if prop == "secant-convexity" else Sense.CONCAVITY
    theory = None if p.assumption_violating else theory_moduli(p.constants).weak_modulus
    report = secant_modulus(
        HyperOracle(p), sense, samples, p.constants.working_box, rng, theory_modulus=theory
    )
    report.details.update({"problem": p.name, "mode": p.mode.value})
    return report


def register(subparsers):
    parser = subparsers.add_parser("check", help="check a structural property of a problem")
    parser.add_argument("--problem", required=True)
    parser.add_argument("--property", required=True, choices=properties)
    parser.add_argument("--samples", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--L", type=float, help="set-smoothness modulus to test against")
    parser.add_argument("--witness", choices=[m.value for m in WitnessMode])
    parser.add_argument("--mode", choices=[m.value for m in Mode])
    parser.add_argument("--output-dir")
    parser.set_defaults(func=main)


def main(args) -> int:
    mode = args.mode
    if mode is None and args.property.startswith("secant-"):
        # The weakly concave hyper-objective is the optimistic one
        mode = Mode.OPTIMISTIC if args.property == "secant-concavity" else Mode.PESSIMISTIC
    p = registry_get(args.problem, mode)
    samples = setting(args.samples, "check_samples")
    seed = setting(args.seed, "seed")
    logger.debug(f"hyperstat is requesting a {args.property} check of {p.name} with {samples} samples")
    report = check(p, args.property, samples, seed, L=args.L, witness=args.witness)
    emit_artifacts(report, output_dir(args, p))
    output = report.to_dict()
    print_json(output)
    logger.debug(f"The following dictionary was printed: {output}")
    return EXIT_OK if report.verdict is Verdict.SATISFIED else EXIT_PROPERTY
