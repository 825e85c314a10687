# SPDX-License-Identifier: BSD-3-Clause

"""Stationarity measures for nonsmooth hyper-objectives.

- the gradient norm of the Moreau envelope, via a golden-section prox solve
- a Clarke certificate built from the randomized-smoothing gradient estimate
- the Goldstein gap: the min-norm point of the hull of sampled nearby gradients

All prox solves are restricted to m ≤ 2.
"""

import logging
import math
import warnings
from collections.abc import Callable
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from hyperstat.errors import BracketTooSmall, NonUnimodalWarning
from hyperstat.inner import INV_PHI, INV_PHI_SQUARE
from hyperstat.problems import ProblemSpec, as_vector
from hyperstat.structure import theory_moduli
from hyperstat.zeroth_order import sample_unit_sphere, two_point_estimate


logger = logging.getLogger(__name__)


# Standard errors added to Monte-Carlo estimates in certificates
CONFIDENCE_INFLATION = 3.0
MAX_SWEEPS = 200
FRANK_WOLFE_STEPS = 10_000


@dataclass(frozen=True)
class EnvelopeConfig:
    gamma: float
    prox_tol: float = 1e-12
    bracket_radius: float | None = None
    # Declared weak convexity modulus of φ, if known
    rho: float | None = None
    # Lipschitz modulus of φ, used for the default bracket
    lipschitz: float | None = None

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if not self.prox_tol > 0:
            raise ValueError("prox_tol must be positive")
        if self.rho is not None and self.gamma >= 1.0 / (self.rho + 1.0):
            bound = 1 / (self.rho + 1)
            raise ValueError(f"gamma = {self.gamma} must be below 1/(rho + 1) = {bound:.6g}")

    @property
    def radius(self) -> float:
        if self.bracket_radius is not None:
            r = self.bracket_radius
        elif self.lipschitz is not None:
            rho = self.rho or 0.0
            r = 2 * self.gamma * self.lipschitz / (1 - self.gamma * rho)
        else:
            r = 1.0
        return max(r, 10 * self.prox_tol)


def _golden_argmin(compare, a: float, b: float, tol: float) -> float:
    """Golden-section search driven by a comparison: compare(c, d) < 0 iff h(c) < h(d)."""
    h = b - a
    c = a + INV_PHI_SQUARE * h
    d = a + INV_PHI * h
    while h > tol:
        if compare(c, d) < 0:
            b, d = d, c
            h = INV_PHI * h
            c = a + INV_PHI_SQUARE * h
        else:
            a, c = c, d
            h = INV_PHI * h
            d = a + INV_PHI * h
    return 0.5 * (a + b)


def _prox_1d(phi, x: np.ndarray, gamma: float, radius: float, tol: float) -> np.ndarray:
    x0 = float(x[0])

    # h(c) - h(d) written so that the two quadratic terms cancel exactly
    def compare(c, d):
        return phi(np.array([c])) - phi(np.array([d])) + (d - c) * (2 * x0 - c - d) / (2 * gamma)

    for attempt in range(2):
        lo, hi = x0 - radius, x0 + radius
        z = _golden_argmin(compare, lo, hi, tol)
        if min(z - lo, hi - z) > 2 * tol:
            return np.array([z])
        logger.debug(f"Prox minimizer {z} sits on the bracket edge; widening radius {radius}")
        radius *= 4
    raise BracketTooSmall(f"Prox of φ at x = {x0} still on the bracket edge at radius {radius / 4:.4g}")


def _prox_2d(phi, x: np.ndarray, gamma: float, radius: float, tol: float) -> np.ndarray:
    # Coordinate golden-section sweeps, repeated until a sweep moves less than tol
    for attempt in range(2):
        z = x.copy()
        on_edge = False
        for _ in range(MAX_SWEEPS):
            previous = z.copy()
            for i in range(2):
                xi = float(x[i])

                def compare(c, d, i=i, xi=xi):
                    zc, zd = z.copy(), z.copy()
                    zc[i], zd[i] = c, d
                    return phi(zc) - phi(zd) + (d - c) * (2 * xi - c - d) / (2 * gamma)

                lo, hi = xi - radius, xi + radius
                z[i] = _golden_argmin(compare, lo, hi, tol)
                on_edge = on_edge or min(z[i] - lo, hi - z[i]) <= 2 * tol
            if np.linalg.norm(z - previous) <= tol:
                break
        if not on_edge:
            return z
        radius *= 4
    raise BracketTooSmall(f"Prox of φ at x = {x} still on the bracket edge at radius {radius / 4:.4g}")


def moreau_prox(phi: Callable, x, cfg: EnvelopeConfig) -> np.ndarray:
    """argmin_z φ(z) + ‖x − z‖²/(2γ), searched in a box of side 2·radius around x.

    The solve is certified only when φ is ρ-weakly convex with γ < 1/(ρ + 1), which
    makes the objective strongly convex.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.size > 2:
        raise ValueError("Prox solves are only supported for m ≤ 2")
    if cfg.rho is None:
        message = "No weak convexity modulus declared; the prox objective may not be unimodal"
        logger.debug(message)
        warnings.warn(message, NonUnimodalWarning, stacklevel=2)
    if x.size == 1:
        return _prox_1d(phi, x, cfg.gamma, cfg.radius, cfg.prox_tol)
    return _prox_2d(phi, x, cfg.gamma, cfg.radius, cfg.prox_tol)


def moreau_envelope(phi: Callable, x, cfg: EnvelopeConfig) -> tuple[float, np.ndarray]:
    """(φ_γ(x), prox point)"""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    z = moreau_prox(phi, x, cfg)
    return float(phi(z) + np.sum((x - z) ** 2) / (2 * cfg.gamma)), z


def envelope_gradient_norm(phi: Callable, x, cfg: EnvelopeConfig) -> tuple[float, np.ndarray]:
    """‖∇φ_γ(x)‖ = ‖x − prox(x)‖/γ, with the prox point."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    z = moreau_prox(phi, x, cfg)
    return float(np.linalg.norm(x - z) / cfg.gamma), z


def local_clarke_norm(phi: Callable, x, step: float | None = None) -> float:
    """Min-norm element of the one-dimensional Clarke subdifferential at x, estimated
    from the left and right difference quotients."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.size != 1:
        raise ValueError("local_clarke_norm is one-dimensional")
    h = step or 1e-7 * (1.0 + abs(float(x[0])))
    centre = phi(x)
    left = (centre - phi(x - h)) / h
    right = (phi(x + h) - centre) / h
    if min(left, right) <= 0.0 <= max(left, right):
        return 0.0
    return min(abs(left), abs(right))


class CertificateKind(Enum):
    CLARKE_ENVELOPE = "ClarkeEnvelope"
    CLARKE_SMOOTHING = "ClarkeSmoothing"
    GOLDSTEIN = "Goldstein"


@dataclass
class Certificate:
    """Some point within `delta` of `at_x` has a (generalized) gradient of norm at most
    `epsilon`."""

    kind: CertificateKind
    epsilon: float
    delta: float
    at_x: np.ndarray
    nu: float | None = None
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "at_x": np.asarray(self.at_x).tolist(),
            "nu": self.nu,
            "details": self.details,
        }


def envelope_certificate(phi: Callable, x, cfg: EnvelopeConfig) -> Certificate:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    norm, z = envelope_gradient_norm(phi, x, cfg)
    return Certificate(
        kind=CertificateKind.CLARKE_ENVELOPE,
        epsilon=norm,
        delta=cfg.gamma * norm,
        at_x=x,
        details={"gamma": cfg.gamma, "prox_point": z.tolist(), "prox_tol": cfg.prox_tol},
    )


def clarke_certificate(
    p: ProblemSpec,
    x,
    eps: float,
    rho: float,
    n_mc: int,
    rng: np.random.Generator,
    w: float = 0.0,
) -> Certificate:
    """Clarke certificate from the smoothed gradient.

    With ν = 2εM_φ, some point within √ν of x has a Clarke element of norm at most
    ‖∇φ^ε(x)‖ + (ρ + 1)√ν. The smoothed gradient is a Monte-Carlo mean of two-point
    estimates and is inflated by three standard errors.
    """
    if not eps > 0:
        raise ValueError("The smoothing radius eps must be positive")
    if n_mc < 1000:
        raise ValueError("n_mc must be at least 1000")
    if rho < 0:
        raise ValueError("rho must be nonnegative")
    x = as_vector(x, p.m, "x")
    if w == 0 and p.exact_hyper_fn is None:
        w = 1e-10
    estimates = np.empty((n_mc, p.m))
    for k in range(n_mc):
        estimates[k] = two_point_estimate(p, x, sample_unit_sphere(rng, p.m), eps, w)
    mean = estimates.mean(axis=0)
    stderr = float(np.sqrt(np.sum(estimates.var(axis=0, ddof=1)) / n_mc))
    nu = 2 * eps * theory_moduli(p.constants).hyper_lipschitz
    mean_norm = float(np.linalg.norm(mean))
    epsilon = mean_norm + (rho + 1) * math.sqrt(nu) + CONFIDENCE_INFLATION * stderr
    logger.debug(f"Clarke certificate on {p.name} at {x}: |mean| {mean_norm:.6g}, stderr {stderr:.3g}")
    return Certificate(
        kind=CertificateKind.CLARKE_SMOOTHING,
        epsilon=epsilon,
        delta=math.sqrt(nu),
        at_x=x,
        nu=nu,
        details={
            "n_mc": n_mc,
            "eps": eps,
            "rho": rho,
            "w": w,
            "mean_norm": mean_norm,
            "stderr": stderr,
            "confidence_inflation": CONFIDENCE_INFLATION,
        },
    )


def _fd_gradient(phi, z: np.ndarray, h: float) -> np.ndarray:
    grad = np.empty(z.size)
    for i in range(z.size):
        e = np.zeros(z.size)
        e[i] = h
        grad[i] = (phi(z + e) - phi(z - e)) / (2 * h)
    return grad


def min_norm_hull_point(
    G: np.ndarray, max_steps: int = FRANK_WOLFE_STEPS
) -> tuple[np.ndarray, int, float]:
    """Min-norm point of conv{rows of G} by Frank-Wolfe with exact line search.

    Returns (point, steps taken, final duality gap).
    """
    norms = np.einsum("ij,ij->i", G, G)
    v = G[int(np.argmin(norms))].copy()
    gap = 0.0
    steps = 0
    for steps in range(1, max_steps + 1):
        i = int(np.argmin(G @ v))
        d = G[i] - v
        gap = -float(v @ d)
        if gap <= 1e-15:
            break
        step = min(1.0, gap / float(d @ d))
        v = v + step * d
    return v, steps, max(gap, 0.0)


def goldstein_gap(
    phi: Callable,
    x,
    delta: float,
    n_samples: int,
    rng: np.random.Generator,
    fd_step: float | None = None,
    *,
    lipschitz: float | None = None,
) -> Certificate:
    """Distance from 0 to the hull of central-difference gradients sampled in B(x, δ)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    h = fd_step if fd_step is not None else 1e-6 * (1.0 + float(np.linalg.norm(x)))
    if not delta > h > 0:
        raise ValueError("Need delta > fd_step > 0")
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    m = x.size
    # Shrunk so the difference stencils stay inside the ball
    radius = delta - h
    G = np.empty((n_samples, m))
    for k in range(n_samples):
        z = x + radius * rng.uniform() ** (1.0 / m) * sample_unit_sphere(rng, m)
        G[k] = _fd_gradient(phi, z, h)
    v, steps, fw_gap = min_norm_hull_point(G)
    details = {
        "n_samples": n_samples,
        "fd_step": h,
        "frank_wolfe_steps": steps,
        "frank_wolfe_gap": fw_gap,
    }
    if lipschitz is not None:
        details["gradient_error_bound"] = lipschitz * h
    return Certificate(
        kind=CertificateKind.GOLDSTEIN,
        epsilon=float(np.linalg.norm(v)),
        delta=delta,
        at_x=x,
        details=details,
    )
