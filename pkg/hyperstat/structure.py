# SPDX-License-Identifier: BSD-3-Clause

"""Empirical checks of the structure behind the hyper-objective.

The checks here sample the things the convergence theory relies on and compare the
worst observed ratio with the closed-form moduli:

- Hausdorff-Lipschitz continuity of the solution map and Lipschitz continuity of φ
- set smoothness of the solution map, with witnesses found by translation, by the
  residual-backfilling construction, or by exhaustive search over a selection parameter
- weak convexity or concavity of a hyper-objective through secant quotients
"""

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

import numpy as np

from hyperstat import configuration
from hyperstat.descriptors import PointSet, Segment, SetMapDescriptor, TranslatedSet
from hyperstat.errors import ClaimViolated, InfeasibleMidpoint, NoOracle, NoWitness
from hyperstat.inner import HyperOracle
from hyperstat.problems import ConstantsBundle, ProblemSpec, as_vector, require_descriptor
from hyperstat.rng import substream


logger = logging.getLogger(__name__)


REPORT_TOLERANCE = 1e-9
MEMBERSHIP_TOLERANCE = 1e-9
# Samples closer to degenerate than this are redrawn
MIN_SMOOTHNESS_SCALE = 1e-6
MIN_SECANT_SCALE = 1e-8
PROBE_SCALES = (1e-1, 1e-2, 1e-3)


class TheoryModuli(NamedTuple):
    solution_lipschitz: float  # M_S
    hyper_lipschitz: float  # M_φ
    solution_smoothness: float  # L_S
    weak_modulus: float  # ρ


def theory_moduli(c: ConstantsBundle) -> TheoryModuli:
    tau = c.error_bound
    lf = c.lower_smoothness
    m_s = lf * tau
    m_phi = c.upper_lipschitz * (1.0 + m_s)
    l_s = max(
        2.0 * c.lower_hessian_lipschitz * tau * (1.0 + 9.0 * lf**2 * tau**2),
        4.0 * lf**2 * tau**2,
    )
    rho = c.upper_lipschitz * l_s + c.upper_smoothness * (1.0 + l_s)
    return TheoryModuli(m_s, m_phi, l_s, rho)


class Verdict(Enum):
    SATISFIED = "Satisfied"
    VIOLATED = "Violated"
    NO_FINITE_MODULUS = "NoFiniteModulus"


@dataclass
class PropertyReport:
    property: str
    samples: int
    empirical_modulus: float
    theory_modulus: float | None
    worst_case: dict
    verdict: Verdict
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "property": self.property,
            "samples": self.samples,
            "empirical_modulus": self.empirical_modulus,
            "theory_modulus": self.theory_modulus,
            "worst_case": _jsonable(self.worst_case),
            "verdict": self.verdict.value,
            "details": _jsonable(self.details),
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, Enum):
        return obj.value
    return obj


def _verdict(empirical: float, theory: float | None) -> Verdict:
    if theory is None or empirical <= theory + REPORT_TOLERANCE:
        return Verdict.SATISFIED
    return Verdict.VIOLATED


def _sample_box(box: Sequence[tuple[float, float]], rng: np.random.Generator) -> np.ndarray:
    lo = np.array([b[0] for b in box], dtype=float)
    hi = np.array([b[1] for b in box], dtype=float)
    return rng.uniform(lo, hi)


def hausdorff_distance(d: SetMapDescriptor, x1, x2) -> float:
    x1 = np.atleast_1d(np.asarray(x1, dtype=float))
    x2 = np.atleast_1d(np.asarray(x2, dtype=float))
    return float(d.hausdorff(x1, x2))


def lipschitz_check(p: ProblemSpec, n_pairs: int, rng: np.random.Generator) -> PropertyReport:
    """Largest sampled d_H(S(x1), S(x2)) / ‖x1 − x2‖ over the working box, against M_S."""
    d = require_descriptor(p)
    box = p.constants.working_box
    best, worst, skipped = 0.0, {}, 0
    for _ in range(n_pairs):
        x1, x2 = _sample_box(box, rng), _sample_box(box, rng)
        gap = float(np.linalg.norm(x1 - x2))
        if gap < 1e-9:
            skipped += 1
            continue
        ratio = d.hausdorff(x1, x2) / gap
        if ratio > best or not worst:
            best, worst = ratio, {"x1": x1, "x2": x2, "ratio": ratio}
    theory = None if p.assumption_violating else theory_moduli(p.constants).solution_lipschitz
    logger.debug(f"Solution-map Lipschitz check on {p.name}: sampled {best:.6g}, theory {theory}")
    return PropertyReport(
        property="lipschitz",
        samples=n_pairs - skipped,
        empirical_modulus=best,
        theory_modulus=theory,
        worst_case=worst,
        verdict=_verdict(best, theory),
        details={"problem": p.name, "skipped_pairs": skipped},
    )


def hyper_lipschitz_check(
    p: ProblemSpec,
    n_pairs: int,
    rng: np.random.Generator,
    w: float = 0.0,
) -> PropertyReport:
    """Largest sampled slope of φ over the working box, against M_φ.

    With an inexact oracle each slope is shrunk by 2w/‖x1 − x2‖ so it stays a lower
    bound on the true slope.
    """
    oracle = HyperOracle(p, w)
    box = p.constants.working_box
    best, worst, skipped = 0.0, {}, 0
    for _ in range(n_pairs):
        x1, x2 = _sample_box(box, rng), _sample_box(box, rng)
        gap = float(np.linalg.norm(x1 - x2))
        if gap < 1e-9:
            skipped += 1
            continue
        slope = max(0.0, abs(oracle(x1) - oracle(x2)) - 2 * oracle.w) / gap
        if slope > best or not worst:
            best, worst = slope, {"x1": x1, "x2": x2, "slope": slope}
    theory = None if p.assumption_violating else theory_moduli(p.constants).hyper_lipschitz
    return PropertyReport(
        property="hyper-lipschitz",
        samples=n_pairs - skipped,
        empirical_modulus=best,
        theory_modulus=theory,
        worst_case=worst,
        verdict=_verdict(best, theory),
        details={"problem": p.name, "mode": p.mode.value, "w": oracle.w, "skipped_pairs": skipped},
    )


@dataclass(frozen=True, eq=False)
class WitnessTuple:
    x1: np.ndarray
    x2: np.ndarray
    theta: float
    y_mid: np.ndarray
    y1: np.ndarray
    y2: np.ndarray
    # Intermediate points of the backfill construction
    y_bar1: np.ndarray | None = None
    y_bar2: np.ndarray | None = None
    y_hat: np.ndarray | None = None

    @property
    def x_theta(self) -> np.ndarray:
        return self.theta * self.x1 + (1 - self.theta) * self.x2

    @property
    def residual_interp(self) -> float:
        return float(np.linalg.norm(self.theta * self.y1 + (1 - self.theta) * self.y2 - self.y_mid))

    @property
    def pairing_sq(self) -> float:
        return float(np.sum((self.y1 - self.y2) ** 2))

    def ratios(self) -> tuple[float, float]:
        """(interpolation ratio, pairing ratio) as in the set-smoothness inequalities."""
        dx_sq = float(np.sum((self.x1 - self.x2) ** 2))
        interp = self.residual_interp / (0.5 * self.theta * (1 - self.theta) * dx_sq)
        return interp, self.pairing_sq / dx_sq

    def to_dict(self) -> dict:
        out = {
            "x1": self.x1,
            "x2": self.x2,
            "theta": self.theta,
            "y_mid": self.y_mid,
            "y1": self.y1,
            "y2": self.y2,
            "residual_interp": self.residual_interp,
            "pairing_sq": self.pairing_sq,
        }
        return _jsonable(out)


def _backfill(d: SetMapDescriptor, x1, x2, theta: float, y_mid) -> WitnessTuple:
    x_theta = theta * x1 + (1 - theta) * x2
    y_bar1 = d.project(x1, y_mid)
    y_bar2 = d.project(x2, y_mid)
    y_hat = d.project(x_theta, theta * y_bar1 + (1 - theta) * y_bar2)
    residual = y_mid - y_hat
    return WitnessTuple(
        x1=x1,
        x2=x2,
        theta=theta,
        y_mid=y_mid,
        y1=d.project(x1, y_bar1 + residual),
        y2=d.project(x2, y_bar2 + residual),
        y_bar1=y_bar1,
        y_bar2=y_bar2,
        y_hat=y_hat,
    )


class BackfillClaims(NamedTuple):
    bar_gap: float  # ‖ȳ1 − ȳ2‖
    bar_bound: float  # M_S‖x1 − x2‖
    hat_gap: float  # ‖ŷ − y‖
    hat_bound: float  # 2θ(1 − θ)M_S‖x1 − x2‖

    @property
    def holds(self) -> bool:
        return (
            self.bar_gap <= self.bar_bound + REPORT_TOLERANCE
            and self.hat_gap <= self.hat_bound + REPORT_TOLERANCE
        )


def backfill_claims(p: ProblemSpec, witness: WitnessTuple) -> BackfillClaims:
    """The two intermediate bounds the backfill construction is built on."""
    if witness.y_bar1 is None:
        raise ValueError("Witness was not produced by the backfill construction")
    m_s = theory_moduli(p.constants).solution_lipschitz
    dx = float(np.linalg.norm(witness.x1 - witness.x2))
    theta = witness.theta
    return BackfillClaims(
        bar_gap=float(np.linalg.norm(witness.y_bar1 - witness.y_bar2)),
        bar_bound=m_s * dx,
        hat_gap=float(np.linalg.norm(witness.y_hat - witness.y_mid)),
        hat_bound=2 * theta * (1 - theta) * m_s * dx,
    )


def backfill_witness(
    p: ProblemSpec,
    x1,
    x2,
    theta: float,
    y_mid,
    *,
    check_claims: bool = False,
) -> WitnessTuple:
    """Endpoint selections for a middle-fiber point by residual backfilling.

    ȳi = Π_{S(xi)}(y), ŷ = Π_{S(xθ)}(θȳ1 + (1 − θ)ȳ2), yi = Π_{S(xi)}(ȳi + y − ŷ).
    """
    d = require_descriptor(p)
    x1, x2 = as_vector(x1, p.m, "x1"), as_vector(x2, p.m, "x2")
    y_mid = as_vector(y_mid, p.n, "y_mid")
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta = {theta} is outside [0, 1]")
    x_theta = theta * x1 + (1 - theta) * x2
    if not d.contains(x_theta, y_mid, MEMBERSHIP_TOLERANCE):
        raise InfeasibleMidpoint(
            f"y_mid = {y_mid} is {d.distance(x_theta, y_mid):.3g} away from S({x_theta})"
        )
    witness = _backfill(d, x1, x2, theta, y_mid)
    if check_claims:
        claims = backfill_claims(p, witness)
        if not claims.holds:
            raise ClaimViolated(f"Backfill bounds fail on {p.name}: {claims}")
    return witness


class WitnessMode(Enum):
    BACKFILL = "Backfill"
    ANALYTIC_TRANSLATION = "AnalyticTranslation"
    EXHAUSTIVE_SEARCH = "ExhaustiveSearch"


def _score(w: WitnessTuple) -> float:
    return max(w.ratios())


def _translation_witness(d: TranslatedSet, x1, x2, theta, y_mid) -> WitnessTuple:
    s_mid = d.shift(theta * x1 + (1 - theta) * x2)
    return WitnessTuple(
        x1=x1,
        x2=x2,
        theta=theta,
        y_mid=y_mid,
        y1=y_mid + s_mid - d.shift(x1),
        y2=y_mid + s_mid - d.shift(x2),
    )


def _search_segments(seg1: Segment, seg2: Segment, x1, x2, theta, y_mid, grid: int) -> WitnessTuple:
    # For each y1 on the grid, y2 is the point of S(x2) closest to exact interpolation
    def candidate(t1: float) -> WitnessTuple:
        y1 = seg1.point(t1)
        target = (y_mid - theta * y1) / (1 - theta)
        t2 = min(max(seg2.parameter(target), seg2.lo), seg2.hi)
        return WitnessTuple(x1=x1, x2=x2, theta=theta, y_mid=y_mid, y1=y1, y2=seg2.point(t2))

    ts = np.linspace(seg1.lo, seg1.hi, grid)
    best = min((candidate(t) for t in ts), key=_score)
    cell = (seg1.hi - seg1.lo) / (grid - 1)
    t_best = seg1.parameter(best.y1)
    fine = np.linspace(max(seg1.lo, t_best - cell), min(seg1.hi, t_best + cell), grid)
    return min(best, *(candidate(t) for t in fine), key=_score)


def _exhaustive_witness(d: SetMapDescriptor, x1, x2, theta, y_mid, grid: int = 1000) -> WitnessTuple:
    bound = float(configuration.config["inner_bound"])
    lay1, lay2 = d.parametrize(x1, bound), d.parametrize(x2, bound)
    if isinstance(lay1, PointSet) and isinstance(lay2, PointSet):
        candidates = (
            WitnessTuple(x1=x1, x2=x2, theta=theta, y_mid=y_mid, y1=a, y2=b)
            for a in lay1.points
            for b in lay2.points
        )
        return min(candidates, key=_score)
    if isinstance(lay1, Segment) and isinstance(lay2, Segment):
        return _search_segments(lay1, lay2, x1, x2, theta, y_mid, grid)
    raise NoOracle("Exhaustive witness search needs both fibers laid out the same way")


def set_smoothness_check(
    d: SetMapDescriptor,
    L: float,
    n_samples: int,
    rng: np.random.Generator,
    witness_mode: WitnessMode | str = WitnessMode.BACKFILL,
    *,
    box: Sequence[tuple[float, float]],
    radius: float = 1.0,
) -> PropertyReport:
    """Sample (x1, x2, θ, y) with y in the middle fiber, exhibit witnesses, and compare
    the worst interpolation and pairing ratios with L.

    Coverage of the middle fiber is sampled, not exhaustive.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    mode = WitnessMode(witness_mode)
    if mode is WitnessMode.ANALYTIC_TRANSLATION and not isinstance(d, TranslatedSet):
        raise ValueError("Analytic translation witnesses need a translated-set descriptor")

    worst_interp, worst_pair = 0.0, 0.0
    worst: dict = {}
    resampled = 0
    for _ in range(n_samples):
        while True:
            x1, x2 = _sample_box(box, rng), _sample_box(box, rng)
            theta = rng.uniform(0.0, 1.0)
            if theta * (1 - theta) * float(np.sum((x1 - x2) ** 2)) >= MIN_SMOOTHNESS_SCALE:
                break
            resampled += 1
        y_mid = d.sample(theta * x1 + (1 - theta) * x2, rng, radius)

        if mode is WitnessMode.ANALYTIC_TRANSLATION:
            witness = _translation_witness(d, x1, x2, theta, y_mid)
        elif mode is WitnessMode.BACKFILL:
            witness = _backfill(d, x1, x2, theta, y_mid)
        else:
            witness = _exhaustive_witness(d, x1, x2, theta, y_mid)

        if not (
            d.contains(x1, witness.y1, MEMBERSHIP_TOLERANCE)
            and d.contains(x2, witness.y2, MEMBERSHIP_TOLERANCE)
        ):
            raise NoWitness(
                f"{mode.value} produced a witness outside its fiber", sample=witness.to_dict()
            )

        interp, pair = witness.ratios()
        if max(interp, pair) > max(worst_interp, worst_pair) or not worst:
            worst = {**witness.to_dict(), "interp_ratio": interp, "pairing_ratio": pair}
        worst_interp = max(worst_interp, interp)
        worst_pair = max(worst_pair, pair)

    empirical = max(worst_interp, worst_pair)
    return PropertyReport(
        property="set-smoothness",
        samples=n_samples,
        empirical_modulus=empirical,
        theory_modulus=L,
        worst_case=worst,
        verdict=_verdict(empirical, L),
        details={
            "witness_mode": mode.value,
            "interp_modulus": worst_interp,
            "pairing_modulus": worst_pair,
            "resampled": resampled,
            "coverage": "sampled",
        },
    )


def pairing_boundary(d: SetMapDescriptor, x1, x2, theta: float, y_mid, L: float) -> float:
    """Largest cross-branch offset K for which an exactly interpolating witness pair
    still satisfies ‖y1 − y2‖² ≤ L‖x1 − x2‖².

    The pairs are y1 = y1⁰ + K·v and y2 = y2⁰ − θK/(1 − θ)·v, with v the common direction
    of the two fibers and (y1⁰, y2⁰) the pair through y_mid's parameter.
    """
    x1 = np.atleast_1d(np.asarray(x1, dtype=float))
    x2 = np.atleast_1d(np.asarray(x2, dtype=float))
    y_mid = np.atleast_1d(np.asarray(y_mid, dtype=float))
    if not 0.0 < theta < 1.0:
        raise ValueError("theta must lie strictly inside (0, 1)")
    x_theta = theta * x1 + (1 - theta) * x2
    if not d.contains(x_theta, y_mid, MEMBERSHIP_TOLERANCE):
        raise InfeasibleMidpoint(f"y_mid = {y_mid} is not in S({x_theta})")
    bound = float(configuration.config["inner_bound"])
    seg1, seg2 = d.parametrize(x1, bound), d.parametrize(x2, bound)
    if not (isinstance(seg1, Segment) and isinstance(seg2, Segment)):
        raise NoOracle("The pairing boundary is only defined for one-parameter fibers")
    if not np.allclose(seg1.direction, seg2.direction):
        raise NoOracle("Fibers are not parallel")
    v = seg1.direction
    y1 = seg1.point(seg1.parameter(y_mid))
    y2 = seg2.point(seg2.parameter(y_mid))
    base = WitnessTuple(x1=x1, x2=x2, theta=theta, y_mid=y_mid, y1=y1, y2=y2)
    if base.residual_interp > MEMBERSHIP_TOLERANCE:
        raise NoWitness("No exactly interpolating pair passes through y_mid", sample=base.to_dict())

    limit = L * float(np.sum((x1 - x2) ** 2))

    def feasible(k: float) -> bool:
        gap = y1 - y2 + k * (1 + theta / (1 - theta)) * v
        return float(np.sum(gap**2)) <= limit

    if not feasible(0.0):
        return -math.inf
    lo, hi = 0.0, 1.0
    while feasible(hi):
        lo, hi = hi, 2 * hi
        if hi > 1e12:
            return math.inf
    while hi - lo > 1e-12 * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return lo


class Sense(Enum):
    CONVEXITY = "Convexity"
    CONCAVITY = "Concavity"


def secant_quotient(
    phi: Callable, x1, x2, theta: float, sense: Sense | str = Sense.CONVEXITY
) -> float:
    """2[φ(xθ) − θφ(x1) − (1 − θ)φ(x2)] / (θ(1 − θ)‖x1 − x2‖²), applied to −φ for concavity."""
    x1 = np.atleast_1d(np.asarray(x1, dtype=float))
    x2 = np.atleast_1d(np.asarray(x2, dtype=float))
    denom = theta * (1 - theta) * float(np.sum((x1 - x2) ** 2))
    if denom <= 0:
        raise ValueError("Degenerate triple")
    excess = phi(theta * x1 + (1 - theta) * x2) - theta * phi(x1) - (1 - theta) * phi(x2)
    if Sense(sense) is Sense.CONCAVITY:
        excess = -excess
    return 2.0 * excess / denom


def _oracle_for(phi: Callable, scale: float) -> Callable:
    # Search-based values must be accurate well below the quotient's denominator
    if isinstance(phi, HyperOracle) and phi.problem.exact_hyper_fn is None:
        return phi.with_accuracy(max(1e-10 * scale, 1e-14))
    return phi


def _probe(phi, sense, box, rng, n_anchors: int) -> list[float]:
    """Worst centered quotient at each probe scale, zooming in on the previous winner."""
    lo = np.array([b[0] for b in box], dtype=float)
    hi = np.array([b[1] for b in box], dtype=float)
    m = lo.size
    anchors = rng.uniform(lo, hi, size=(n_anchors, m))
    if m == 1:
        coarse = np.arange(lo[0], hi[0] + 0.5 * PROBE_SCALES[0], 0.5 * PROBE_SCALES[0])[:, None]
        anchors = np.vstack([anchors, coarse])
    results = []
    previous, best_center = None, None
    for scale in PROBE_SCALES:
        centers = anchors
        if best_center is not None:
            if m == 1:
                local = best_center + np.linspace(-previous, previous, 41)[:, None]
            else:
                local = best_center + rng.uniform(-previous, previous, size=(41, m))
            centers = np.vstack([anchors, local])
        best_q = -math.inf
        for c in centers:
            v = rng.standard_normal(m)
            v /= np.linalg.norm(v)
            x1, x2 = c - 0.5 * scale * v, c + 0.5 * scale * v
            q = secant_quotient(_oracle_for(phi, 0.25 * scale**2), x1, x2, 0.5, sense)
            if q > best_q:
                best_q, best_center = q, c
        results.append(best_q)
        previous = scale
    return results


def secant_modulus(
    phi: Callable,
    sense: Sense | str,
    n_triples: int,
    box: Sequence[tuple[float, float]],
    rng: np.random.Generator,
    *,
    theory_modulus: float | None = None,
    n_anchors: int = 100,
    growth: float = 5.0,
) -> PropertyReport:
    """Estimate the weak convexity (or concavity) modulus of φ on a box.

    A shrinking-scale probe looks for quotients that grow like 1/scale; growth of at
    least `growth` per decade across every probe scale means no finite modulus exists.
    """
    sense = Sense(sense)
    probe_rng = substream(rng)
    best, worst, resampled = -math.inf, {}, 0
    for _ in range(n_triples):
        while True:
            x1, x2 = _sample_box(box, rng), _sample_box(box, rng)
            theta = rng.uniform(0.0, 1.0)
            scale = theta * (1 - theta) * float(np.sum((x1 - x2) ** 2))
            if scale >= MIN_SECANT_SCALE:
                break
            resampled += 1
        q = secant_quotient(_oracle_for(phi, scale), x1, x2, theta, sense)
        if q > best:
            best, worst = q, {"x1": x1, "x2": x2, "theta": theta, "quotient": q}

    probes = _probe(phi, sense, box, probe_rng, n_anchors)
    unbounded = probes[-1] > 1e-6 and all(
        fine >= growth * coarse for coarse, fine in zip(probes, probes[1:])
    )
    empirical = max(0.0, best, *probes)
    if unbounded:
        verdict = Verdict.NO_FINITE_MODULUS
    else:
        verdict = _verdict(empirical, theory_modulus)
    logger.debug(f"Secant {sense.value} probe quotients {probes}; verdict {verdict.value}")
    return PropertyReport(
        property=f"secant-{sense.value.lower()}",
        samples=n_triples,
        empirical_modulus=empirical,
        theory_modulus=theory_modulus,
        worst_case=worst,
        verdict=verdict,
        details={
            "resampled": resampled,
            "probe_scales": list(PROBE_SCALES),
            "probe_quotients": probes,
            "growth_threshold": growth,
            "sampled_modulus": max(0.0, best),
        },
    )
