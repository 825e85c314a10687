import math
from dataclasses import replace

import numpy as np
import pytest

from hyperstat.descriptors import GraphLine, Singleton
from hyperstat.errors import ClaimViolated, InfeasibleMidpoint, NoWitness
from hyperstat.inner import HyperOracle
from hyperstat.problems import ConstantsBundle, Mode, registry_get
from hyperstat.rng import make_rng
from hyperstat.structure import (
    Sense,
    Verdict,
    WitnessMode,
    WitnessTuple,
    backfill_claims,
    backfill_witness,
    hausdorff_distance,
    hyper_lipschitz_check,
    lipschitz_check,
    pairing_boundary,
    secant_modulus,
    secant_quotient,
    set_smoothness_check,
    theory_moduli,
)


def test_theory_moduli_for_line_problem(p1):
    moduli = theory_moduli(p1.constants)
    assert moduli.solution_lipschitz == pytest.approx(1.5)
    assert moduli.hyper_lipschitz == pytest.approx(4.3301, abs=1e-4)
    assert moduli.solution_smoothness == pytest.approx(9.0)
    assert moduli.weak_modulus == pytest.approx(35.588, abs=1e-3)


def test_hausdorff_distance(p1):
    assert hausdorff_distance(p1.descriptor, [0.0], [2.0]) == pytest.approx(math.sqrt(2.0))
    assert hausdorff_distance(GraphLine(), 1.0, -1.0) == 2.0


def test_lipschitz_check_on_line(p1, rng):
    report = lipschitz_check(p1, 2000, rng)
    assert report.verdict is Verdict.SATISFIED
    assert report.empirical_modulus == pytest.approx(1 / math.sqrt(2.0))
    assert report.theory_modulus == pytest.approx(1.5)
    assert report.to_dict()["verdict"] == "Satisfied"


def test_lipschitz_check_without_theory_bound(p3, rng):
    report = lipschitz_check(p3, 2000, rng)
    assert report.theory_modulus is None
    assert report.verdict is Verdict.SATISFIED
    assert report.empirical_modulus <= 1.0 + 1e-12


def test_lipschitz_check_on_constant_map(p3, rng):
    constant = replace(
        p3, descriptor=Singleton(lambda x: np.array([0.0, 1.0])), box_constrained_lower=None
    )
    report = lipschitz_check(constant, 500, rng)
    assert report.empirical_modulus == 0.0
    assert report.verdict is Verdict.SATISFIED


def test_lipschitz_check_on_interval_problem(p2, rng):
    report = lipschitz_check(p2, 10_000, rng)
    assert report.verdict is Verdict.SATISFIED
    # d_H is |sin x1 - sin x2|
    assert 0.9 < report.empirical_modulus <= 1.0
    assert report.theory_modulus == pytest.approx(2.0)


@pytest.mark.parametrize("mode", list(Mode))
def test_hyper_lipschitz_check_on_interval_problem(mode, rng):
    p = registry_get("P2-sin-interval", mode)
    report = hyper_lipschitz_check(p, 10_000, rng)
    assert report.verdict is Verdict.SATISFIED
    assert report.empirical_modulus <= report.theory_modulus
    # On [-2, 2] the slope of |x| - x sin x never exceeds 1 + 1 + 2
    assert report.empirical_modulus <= 4.0


def test_hyper_lipschitz_check(p1, rng):
    report = hyper_lipschitz_check(p1, 1000, rng)
    assert report.empirical_modulus == pytest.approx(1.0)
    assert report.verdict is Verdict.SATISFIED
    assert report.details["mode"] == "pessimistic"


def test_backfill_on_line(p1):
    witness = backfill_witness(p1, [1.0], [-1.0], 0.5, [0.0, 0.0], check_claims=True)
    np.testing.assert_allclose(witness.y_bar1, [0.5, 0.5])
    np.testing.assert_allclose(witness.y_bar2, [-0.5, -0.5])
    np.testing.assert_allclose(witness.y_hat, [0.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(witness.y1, [0.5, 0.5])
    np.testing.assert_allclose(witness.y2, [-0.5, -0.5])
    interp, pair = witness.ratios()
    assert interp == pytest.approx(0.0, abs=1e-15)
    assert pair == pytest.approx(0.5)


@pytest.mark.parametrize("name, count", [("P1-line", 10_000), ("P5-plane-coercive", 2000)])
def test_backfill_claims_hold(name, count, rng):
    p = registry_get(name)
    for _ in range(count):
        x1, x2 = p.constants.sample_box(rng), p.constants.sample_box(rng)
        theta = rng.uniform()
        y_mid = p.descriptor.sample(theta * x1 + (1 - theta) * x2, rng, 2.0)
        witness = backfill_witness(p, x1, x2, theta, y_mid)
        assert backfill_claims(p, witness).holds
        assert witness.residual_interp <= 1e-10
        assert witness.pairing_sq <= 2 * float(np.sum((x1 - x2) ** 2))


def test_backfill_claims_can_fail(p1):
    tight = replace(p1, constants=ConstantsBundle(math.sqrt(3.0), 2.0, 0.1, 0.0, 0.5, ((-5.0, 5.0),)))
    with pytest.raises(ClaimViolated):
        backfill_witness(tight, [1.0], [-1.0], 0.5, [0.0, 0.0], check_claims=True)


def test_backfill_needs_feasible_midpoint(p1):
    with pytest.raises(InfeasibleMidpoint):
        backfill_witness(p1, [1.0], [-1.0], 0.5, [1.0, 1.0])
    with pytest.raises(ValueError):
        backfill_witness(p1, [1.0], [-1.0], 1.5, [0.0, 0.0])


def test_claims_need_backfill_witness(p1):
    plain = WitnessTuple(
        x1=np.array([1.0]),
        x2=np.array([-1.0]),
        theta=0.5,
        y_mid=np.zeros(2),
        y1=np.array([0.5, 0.5]),
        y2=np.array([-0.5, -0.5]),
    )
    with pytest.raises(ValueError):
        backfill_claims(p1, plain)


def test_set_smoothness_by_translation(p2, rng):
    report = set_smoothness_check(
        p2.descriptor,
        p2.set_smoothness,
        10_000,
        rng,
        WitnessMode.ANALYTIC_TRANSLATION,
        box=p2.constants.working_box,
    )
    assert report.verdict is Verdict.SATISFIED
    assert report.empirical_modulus <= 1.0 + 1e-9
    assert report.details["witness_mode"] == "AnalyticTranslation"


def test_translation_needs_translated_set(p1, rng):
    with pytest.raises(ValueError):
        set_smoothness_check(
            p1.descriptor, 1.0, 10, rng, "AnalyticTranslation", box=p1.constants.working_box
        )


def test_set_smoothness_by_backfill(p1, rng):
    report = set_smoothness_check(
        p1.descriptor, 9.0, 2000, rng, WitnessMode.BACKFILL, box=p1.constants.working_box
    )
    assert report.verdict is Verdict.SATISFIED
    assert report.details["interp_modulus"] == pytest.approx(0.0, abs=1e-6)
    assert report.details["pairing_modulus"] == pytest.approx(0.5)


def test_set_smoothness_by_search_on_graph_line(p4, rng):
    report = set_smoothness_check(
        p4.descriptor, 2.0, 50, rng, WitnessMode.EXHAUSTIVE_SEARCH, box=p4.constants.working_box
    )
    assert report.verdict is Verdict.SATISFIED
    assert report.details["pairing_modulus"] >= 1.0


def test_set_smoothness_rejects_empty_run(p1, rng):
    with pytest.raises(ValueError):
        set_smoothness_check(p1.descriptor, 1.0, 0, rng, box=p1.constants.working_box)


def test_pairing_boundary_on_graph_line():
    k = pairing_boundary(GraphLine(), [1.0], [-1.0], 0.5, [0.0, 0.0], 2.0)
    assert k == pytest.approx(1.0, abs=1e-6)
    assert pairing_boundary(GraphLine(), [1.0], [-1.0], 0.5, [0.0, 0.0], 0.5) == -math.inf


def test_pairing_boundary_preconditions():
    with pytest.raises(InfeasibleMidpoint):
        pairing_boundary(GraphLine(), [1.0], [-1.0], 0.5, [0.0, 1.0], 2.0)
    with pytest.raises(ValueError):
        pairing_boundary(GraphLine(), [1.0], [-1.0], 1.0, [0.0, -1.0], 2.0)


def test_no_witness_carries_sample():
    err = NoWitness("outside", sample={"theta": 0.5})
    assert err.sample == {"theta": 0.5}


def test_secant_quotient(abs_phi):
    h = 1e-3
    assert secant_quotient(abs_phi, [-h / 2], [h / 2], 0.5, Sense.CONCAVITY) == pytest.approx(4 / h)
    assert secant_quotient(abs_phi, [-h / 2], [h / 2], 0.5, "Convexity") == pytest.approx(-4 / h)
    with pytest.raises(ValueError):
        secant_quotient(abs_phi, [1.0], [1.0], 0.5)


def test_secant_quotient_at_box_kink(p3):
    phi = HyperOracle(p3)
    for h in (1e-1, 1e-2, 1e-3):
        q = secant_quotient(phi, [-h], [h], 0.5, Sense.CONVEXITY)
        assert q >= 0.9 / h
        assert q == pytest.approx(1 / h)


def test_absolute_value_is_convex(abs_phi, rng):
    report = secant_modulus(abs_phi, Sense.CONVEXITY, 2000, ((-1.0, 1.0),), rng, theory_modulus=0.0)
    assert report.empirical_modulus == 0.0
    assert report.verdict is Verdict.SATISFIED
    assert report.property == "secant-convexity"


@pytest.mark.slow
def test_absolute_value_is_convex_on_many_triples(abs_phi, rng):
    report = secant_modulus(abs_phi, Sense.CONVEXITY, 100_000, ((-1.0, 1.0),), rng, theory_modulus=0.0)
    assert report.verdict is Verdict.SATISFIED


def test_absolute_value_has_no_concavity_modulus(abs_phi, rng):
    report = secant_modulus(abs_phi, Sense.CONCAVITY, 500, ((-1.0, 1.0),), rng)
    assert report.verdict is Verdict.NO_FINITE_MODULUS
    probes = report.details["probe_quotients"]
    assert all(b >= 5 * a for a, b in zip(probes, probes[1:]))


def test_box_counterexample_has_no_convexity_modulus(p3, rng):
    report = secant_modulus(HyperOracle(p3), Sense.CONVEXITY, 500, p3.constants.working_box, rng)
    assert report.verdict is Verdict.NO_FINITE_MODULUS
    assert report.details["probe_quotients"][-1] >= 0.9 / 1e-3


@pytest.mark.parametrize(
    "mode, sense", [("pessimistic", Sense.CONVEXITY), ("optimistic", Sense.CONCAVITY)]
)
def test_coercive_line_moduli(mode, sense, rng):
    p = registry_get("P1-line-coercive", mode)
    theory = theory_moduli(p.constants).weak_modulus
    report = secant_modulus(
        HyperOracle(p), sense, 2000, p.constants.working_box, rng, theory_modulus=theory
    )
    assert report.verdict is Verdict.SATISFIED
    assert report.empirical_modulus <= 1.0 + 1e-6


@pytest.mark.slow
@pytest.mark.parametrize(
    "mode, sense", [("pessimistic", Sense.CONVEXITY), ("optimistic", Sense.CONCAVITY)]
)
def test_coercive_line_moduli_on_many_triples(mode, sense, rng):
    p = registry_get("P1-line-coercive", mode)
    report = secant_modulus(HyperOracle(p), sense, 100_000, p.constants.working_box, rng)
    assert report.empirical_modulus <= 1.0 + 1e-6 <= theory_moduli(p.constants).weak_modulus



def test_interval_problem_is_weakly_convex(p2, rng):
    report = secant_modulus(
        HyperOracle(p2), Sense.CONVEXITY, 2000, p2.constants.working_box, rng, theory_modulus=4.0
    )
    assert report.verdict is Verdict.SATISFIED
    assert report.empirical_modulus <= 4.0 + 1e-6


def test_secant_check_is_reproducible(p2):
    first = secant_modulus(HyperOracle(p2), "Convexity", 300, p2.constants.working_box, make_rng(7))
    second = secant_modulus(HyperOracle(p2), "Convexity", 300, p2.constants.working_box, make_rng(7))
    assert first.to_dict() == second.to_dict()
