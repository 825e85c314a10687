import math

import numpy as np
import pytest

from hyperstat.errors import BracketTooSmall, NonUnimodalWarning
from hyperstat.inner import HyperOracle
from hyperstat.rng import make_rng
from hyperstat.stationarity import (
    CertificateKind,
    EnvelopeConfig,
    clarke_certificate,
    envelope_certificate,
    envelope_gradient_norm,
    goldstein_gap,
    local_clarke_norm,
    min_norm_hull_point,
    moreau_envelope,
    moreau_prox,
)
from hyperstat.structure import theory_moduli


def l1(z):
    return float(np.sum(np.abs(z)))


@pytest.mark.parametrize("x, expected", [(2.0, 1.5), (0.3, 0.0), (-0.8, -0.3), (0.5, 0.0)])
def test_prox_of_absolute_value_is_soft_thresholding(abs_phi, x, expected):
    z = moreau_prox(abs_phi, [x], EnvelopeConfig(0.5, rho=0.0))
    assert z[0] == pytest.approx(expected, abs=1e-9)


def test_envelope_of_absolute_value_is_huber(abs_phi):
    cfg = EnvelopeConfig(0.5, rho=0.0)
    value, _ = moreau_envelope(abs_phi, [2.0], cfg)
    assert value == pytest.approx(1.75, abs=1e-9)
    value, _ = moreau_envelope(abs_phi, [0.3], cfg)
    assert value == pytest.approx(0.09, abs=1e-9)
    norm, _ = envelope_gradient_norm(abs_phi, [2.0], cfg)
    assert norm == pytest.approx(1.0, abs=1e-8)
    norm, _ = envelope_gradient_norm(abs_phi, [0.3], cfg)
    assert norm == pytest.approx(0.6, abs=1e-8)


def test_two_dimensional_prox_is_separable_soft_thresholding():
    z = moreau_prox(l1, [2.0, -0.3], EnvelopeConfig(0.5, rho=0.0))
    np.testing.assert_allclose(z, [1.5, 0.0], atol=1e-9)


def test_envelope_sandwich(abs_phi):
    gamma = 0.25
    cfg = EnvelopeConfig(gamma, rho=0.0)
    for x in np.linspace(-2.0, 2.0, 17):
        value, _ = moreau_envelope(abs_phi, [x], cfg)
        assert abs(x) - gamma / 2 - 1e-9 <= value <= abs(x) + 1e-12


def test_prox_of_box_counterexample(p3):
    cfg = EnvelopeConfig(0.1, bracket_radius=0.5)
    with pytest.warns(NonUnimodalWarning):
        z = moreau_prox(HyperOracle(p3), [0.6], cfg)
    assert z[0] == pytest.approx(0.7, abs=1e-8)


def test_envelope_gradient_vanishes_at_minimiser(p1_coercive):
    cfg = EnvelopeConfig(0.1, rho=0.0, lipschitz=theory_moduli(p1_coercive.constants).hyper_lipschitz)
    norm, z = envelope_gradient_norm(HyperOracle(p1_coercive), [0.0], cfg)
    assert norm < 1e-6
    assert abs(z[0]) < 1e-7


def test_small_envelope_gradient_gives_nearby_near_stationary_point(p1_coercive):
    phi = HyperOracle(p1_coercive)
    cfg = EnvelopeConfig(0.1, rho=0.0)
    for x in (1.0, -0.4, 2.5):
        norm, z = envelope_gradient_norm(phi, [x], cfg)
        assert abs(x - z[0]) == pytest.approx(cfg.gamma * norm)
        assert local_clarke_norm(phi, z, step=1e-6) <= norm + 1e-5


def test_envelope_certificate(abs_phi):
    cert = envelope_certificate(abs_phi, [2.0], EnvelopeConfig(0.5, rho=0.0))
    assert cert.kind is CertificateKind.CLARKE_ENVELOPE
    assert cert.epsilon == pytest.approx(1.0, abs=1e-8)
    assert cert.delta == pytest.approx(0.5, abs=1e-8)
    assert cert.to_dict()["kind"] == "ClarkeEnvelope"
    assert cert.to_dict()["details"]["prox_point"][0] == pytest.approx(1.5, abs=1e-9)


def test_gamma_must_respect_weak_convexity():
    with pytest.raises(ValueError):
        EnvelopeConfig(0.5, rho=1.0)
    with pytest.raises(ValueError):
        EnvelopeConfig(0.0)
    assert EnvelopeConfig(0.1, rho=2.0, lipschitz=1.0).radius == pytest.approx(0.25)


def test_prox_rejects_high_dimension():
    with pytest.raises(ValueError):
        moreau_prox(l1, [0.0, 0.0, 0.0], EnvelopeConfig(0.1, rho=0.0))


def test_undeclared_weak_convexity_warns(abs_phi):
    with pytest.warns(NonUnimodalWarning):
        moreau_prox(abs_phi, [2.0], EnvelopeConfig(0.5))


def test_bracket_is_widened_once(abs_phi):
    z = moreau_prox(abs_phi, [2.0], EnvelopeConfig(0.5, rho=0.0, bracket_radius=0.3))
    assert z[0] == pytest.approx(1.5, abs=1e-9)


def test_bracket_too_small():
    cfg = EnvelopeConfig(0.1, rho=0.0, bracket_radius=1e-3)
    with pytest.raises(BracketTooSmall):
        moreau_prox(lambda z: -float(z[0]), [0.0], cfg)


def test_local_clarke_norm(abs_phi):
    assert local_clarke_norm(abs_phi, [0.0]) == 0.0
    assert local_clarke_norm(abs_phi, [1.0]) == pytest.approx(1.0)
    assert local_clarke_norm(abs_phi, [-3.0]) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        local_clarke_norm(l1, [0.0, 0.0])


def test_min_norm_hull_point():
    v, _, gap = min_norm_hull_point(np.array([[1.0, 0.0], [0.0, 1.0]]))
    np.testing.assert_allclose(v, [0.5, 0.5], atol=1e-6)
    assert gap <= 1e-6
    v, _, _ = min_norm_hull_point(np.array([[1.0, 1.0], [2.0, 3.0]]))
    np.testing.assert_allclose(v, [1.0, 1.0])


def test_min_norm_point_separates_the_hull(rng):
    G = rng.normal(loc=[1.0, 2.0], scale=1.0, size=(50, 2))
    v, _, gap = min_norm_hull_point(G)
    assert np.all(G @ v >= v @ v - gap - 1e-9)


def test_goldstein_gap_at_kink_and_away(abs_phi, rng):
    at_kink = goldstein_gap(abs_phi, [0.0], 0.1, 50, rng=rng)
    assert at_kink.kind is CertificateKind.GOLDSTEIN
    assert at_kink.epsilon < 1e-6
    away = goldstein_gap(abs_phi, [1.0], 0.1, 50, rng=rng, lipschitz=1.0)
    assert away.epsilon == pytest.approx(1.0, abs=1e-6)
    assert away.details["gradient_error_bound"] == pytest.approx(away.details["fd_step"])


def test_goldstein_gap_preconditions(abs_phi, rng):
    with pytest.raises(ValueError):
        goldstein_gap(abs_phi, [0.0], 1e-7, 10, rng)
    with pytest.raises(ValueError):
        goldstein_gap(abs_phi, [0.0], 0.1, 0, rng)


def test_goldstein_gap_is_reproducible_from_a_seed(p5):
    phi = HyperOracle(p5)
    first = goldstein_gap(phi, [0.5, -0.5], 0.05, 30, make_rng(7))
    second = goldstein_gap(phi, [0.5, -0.5], 0.05, 30, make_rng(7))
    assert first.epsilon == second.epsilon
    assert first.details == second.details


def test_goldstein_gap_on_plane_problem(p5, rng):
    phi = HyperOracle(p5)
    cert = goldstein_gap(phi, [1.0, 1.0], 0.01, 100, rng=rng)
    grad = np.array([1.0, 1.0]) / math.sqrt(3.0)
    assert cert.epsilon == pytest.approx(float(np.linalg.norm(grad)), abs=0.02)


def test_clarke_certificate_at_symmetric_minimum(p1_coercive, rng):
    moduli = theory_moduli(p1_coercive.constants)
    eps = 0.01
    cert = clarke_certificate(p1_coercive, [0.0], eps, moduli.weak_modulus, 1000, rng)
    nu = 2 * eps * moduli.hyper_lipschitz
    assert cert.kind is CertificateKind.CLARKE_SMOOTHING
    assert cert.nu == pytest.approx(nu)
    assert cert.delta == pytest.approx(math.sqrt(nu))
    # Every one-dimensional estimate at 0 is an exact zero
    assert cert.details["mean_norm"] == 0.0
    assert cert.epsilon == pytest.approx((moduli.weak_modulus + 1) * math.sqrt(nu))


def test_clarke_certificate_away_from_minimum(p1, rng):
    cert = clarke_certificate(p1, [0.5], 0.01, 0.0, 1000, rng)
    # φ = x + 1, so every estimate is 1 and the spread is nil
    assert cert.details["mean_norm"] == pytest.approx(1.0)
    assert cert.details["stderr"] == pytest.approx(0.0, abs=1e-9)
    assert cert.epsilon >= 1.0


def test_clarke_certificate_preconditions(p1, rng):
    with pytest.raises(ValueError):
        clarke_certificate(p1, [0.0], 0.0, 0.0, 1000, rng)
    with pytest.raises(ValueError):
        clarke_certificate(p1, [0.0], 0.01, 0.0, 999, rng)
    with pytest.raises(ValueError):
        clarke_certificate(p1, [0.0], 0.01, -1.0, 1000, rng)


@pytest.mark.parametrize("x", [0.2, 2.0])
def test_envelope_gradient_bounds_nearby_clarke_norm(abs_phi, x):
    cfg = EnvelopeConfig(0.1, rho=0.0)
    norm, z = envelope_gradient_norm(abs_phi, [x], cfg)
    assert norm == pytest.approx(1.0, abs=1e-9)
    assert abs(x - z[0]) <= cfg.gamma * norm + 1e-12
    assert local_clarke_norm(abs_phi, z) <= norm + 1e-6


def test_goldstein_is_weaker_than_envelope_stationarity(abs_phi, rng):
    gap = goldstein_gap(abs_phi, [0.05], 0.1, 100, rng=rng)
    norm, _ = envelope_gradient_norm(abs_phi, [0.05], EnvelopeConfig(0.01, rho=0.0))
    assert gap.epsilon <= 1e-6
    assert norm == pytest.approx(1.0, abs=1e-6)
