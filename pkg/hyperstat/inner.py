# SPDX-License-Identifier: BSD-3-Clause

"""Inexact evaluation of the hyper-objective: the inner subroutine of the zeroth-order
method, which returns φ(x) to a requested additive accuracy w.

Closed forms are used when a problem has them. Otherwise F(x, ·) is searched over S(x)
as laid out by the problem's descriptor: finite sets are enumerated, one-parameter
sets are searched by a Lipschitz/smoothness branch-and-bound that stops once the gap
between the incumbent and the largest cell bound is at most w.
"""

import heapq
import logging
import math
from dataclasses import dataclass

import numpy as np

from hyperstat import configuration
from hyperstat.descriptors import PointSet, Segment
from hyperstat.errors import BudgetExceeded, NoOracle, UnboundedInner
from hyperstat.problems import ProblemSpec, as_vector, lower_grad_y


logger = logging.getLogger(__name__)


INV_PHI = (math.sqrt(5) - 1) / 2  # 1 / phi
INV_PHI_SQUARE = (3 - math.sqrt(5)) / 2  # 1 / phi^2


@dataclass(frozen=True, eq=False)
class InnerResult:
    value: float
    witness_y: np.ndarray | None
    achieved_tol: float
    evals: int
    # Parameter range an unbounded solution set was cut to, if it was
    truncation_bound: float | None = None


def golden_section_max(g, a: float, b: float, tol: float, max_iter: int = 200) -> tuple[float, float, int]:
    """Maximize a unimodal g on [a, b]; returns (t, g(t), evaluations)."""
    h = b - a
    c = a + INV_PHI_SQUARE * h
    d = a + INV_PHI * h
    gc, gd = g(c), g(d)
    evals = 2
    for _ in range(max_iter):
        if h <= tol:
            break
        if gc > gd:
            b, d, gd = d, c, gc
            h = INV_PHI * h
            c = a + INV_PHI_SQUARE * h
            gc = g(c)
        else:
            a, c, gc = c, d, gd
            h = INV_PHI * h
            d = a + INV_PHI * h
            gd = g(d)
        evals += 1
    return (c, gc, evals) if gc > gd else (d, gd, evals)


def _cell_bound(fa: float, fb: float, h: float, lipschitz: float, smoothness: float) -> float:
    """Upper bound on max g over a cell of width h with end values fa, fb."""
    lipschitz_bound = 0.5 * (fa + fb) + 0.5 * lipschitz * h
    smooth_bound = max(fa, fb) + smoothness * h * h / 8
    return min(lipschitz_bound, smooth_bound)


def certified_max(
    g,
    lo: float,
    hi: float,
    lipschitz: float,
    smoothness: float,
    w: float,
    n_starts: int = 16,
    max_evals: int = 100_000,
) -> tuple[float, float, float, int]:
    """Maximize g on [lo, hi] to a certified additive accuracy w.

    Returns (t, g(t), certified gap, evaluations). The search starts from `n_starts`
    equispaced cells, polishes the best node with golden-section search, then bisects
    whichever cell has the largest upper bound until that bound is within w of the
    incumbent.
    """
    if hi - lo <= 0:
        return lo, g(lo), 0.0, 1
    nodes = np.linspace(lo, hi, n_starts + 1)
    values = [g(t) for t in nodes]
    evals = len(values)
    i = int(np.argmax(values))
    best_t, best_v = float(nodes[i]), values[i]

    a, b = nodes[max(i - 1, 0)], nodes[min(i + 1, n_starts)]
    t, v, k = golden_section_max(g, a, b, tol=1e-12 * max(1.0, abs(best_t)))
    evals += k
    if v > best_v:
        best_t, best_v = t, v

    heap = []
    for j in range(n_starts):
        a, b = nodes[j], nodes[j + 1]
        ub = _cell_bound(values[j], values[j + 1], b - a, lipschitz, smoothness)
        heapq.heappush(heap, (-ub, a, b, values[j], values[j + 1]))

    while heap:
        gap = max(0.0, -heap[0][0] - best_v)
        if gap <= w:
            return best_t, best_v, gap, evals
        if evals >= max_evals:
            raise BudgetExceeded(
                f"Inner search stopped after {evals} evaluations at gap {gap:.3g} > {w:.3g}",
                best_value=best_v,
                achieved_tol=gap,
            )
        neg_ub, a, b, fa, fb = heapq.heappop(heap)
        mid = 0.5 * (a + b)
        fm = g(mid)
        evals += 1
        if fm > best_v:
            best_t, best_v = mid, fm
        # A parent bound still holds on its halves, which keeps the gap monotone
        left = min(-neg_ub, _cell_bound(fa, fm, mid - a, lipschitz, smoothness))
        right = min(-neg_ub, _cell_bound(fm, fb, b - mid, lipschitz, smoothness))
        heapq.heappush(heap, (-left, a, mid, fa, fm))
        heapq.heappush(heap, (-right, mid, b, fm, fb))
    return best_t, best_v, 0.0, evals


def _solve_on_descriptor(p: ProblemSpec, x: np.ndarray, w: float, max_evals: int | None) -> InnerResult:
    if p.upper_fn is None:
        raise NoOracle(f"Problem {p.name} has no upper-level objective F to evaluate")
    if p.descriptor is None:
        raise NoOracle(f"Problem {p.name} has neither a closed form nor a searchable solution set")
    bound = float(configuration.config["inner_bound"])
    if max_evals is None:
        max_evals = int(configuration.config["inner_max_evals"])
    sign = p.mode.sign
    layout = p.descriptor.parametrize(x, bound)
    logger.debug(f"hyperstat is requesting an inner solve of {p.name} at x={x} to w={w}")

    if isinstance(layout, PointSet):
        values = np.array([sign * p.upper_fn(x, y) for y in layout.points])
        best = values.max()
        # Ties resolved towards the lexicographically smallest point
        winners = layout.points[values == best]
        witness = winners[np.lexsort(winners.T[::-1])[0]]
        return InnerResult(float(sign * best), witness.copy(), 0.0, len(values))

    assert isinstance(layout, Segment)

    def g(t):
        return sign * p.upper_fn(x, layout.point(t))

    c = p.constants
    try:
        t, v, gap, evals = certified_max(
            g,
            layout.lo,
            layout.hi,
            c.upper_lipschitz,
            c.upper_smoothness,
            w,
            n_starts=int(configuration.config["n_starts"]),
            max_evals=max_evals,
        )
    except BudgetExceeded as err:
        err.best_value = None if err.best_value is None else sign * err.best_value
        raise

    if layout.truncated:
        # Probe beyond the cut: if F keeps improving the truncated answer is meaningless
        for probe in (2 * layout.lo, 2 * layout.hi):
            if g(probe) > v + w:
                raise UnboundedInner(
                    f"{p.mode.value} value of {p.name} at x={x} keeps growing beyond |t| = {bound:.4g}"
                )
        evals += 2
    return InnerResult(
        float(sign * v),
        layout.point(t),
        float(gap),
        evals,
        truncation_bound=bound if layout.truncated else None,
    )


def inner_value(
    p: ProblemSpec,
    x,
    w: float,
    *,
    use_exact: bool = True,
    max_evals: int | None = None,
) -> InnerResult:
    """φ̃(x) with |φ̃(x) − φ(x)| ≤ w for the problem's mode."""
    x = as_vector(x, p.m, "x")
    if w < 0:
        raise ValueError("Inner accuracy w must be nonnegative")
    exact = p.exact_hyper_fn if use_exact else None
    if exact is not None:
        return InnerResult(float(exact(x)), None, 0.0, 1)
    if w == 0:
        raise ValueError("w = 0 can only be honored by a closed-form hyper-objective")
    return _solve_on_descriptor(p, x, w, max_evals)


def inner_argopt(p: ProblemSpec, x, w: float, *, max_evals: int | None = None) -> InnerResult:
    """As `inner_value`, but always returns a witness y ∈ S(x) attaining the value within w."""
    x = as_vector(x, p.m, "x")
    if not w > 0 and p.exact_hyper_fn is None:
        raise ValueError("w = 0 can only be honored by a closed-form hyper-objective")
    if p.descriptor is None:
        raise NoOracle(f"Problem {p.name} has no solution-set descriptor to draw a witness from")
    result = _solve_on_descriptor(p, x, max(w, 1e-12), max_evals)
    if p.exact_hyper_fn is not None:
        # The closed form is authoritative for the value; the search supplies the witness
        return InnerResult(
            float(p.exact_hyper_fn(x)),
            result.witness_y,
            result.achieved_tol,
            result.evals + 1,
            result.truncation_bound,
        )
    return result


class HyperOracle:
    """Value oracle x ↦ φ̃(x) at a fixed inner accuracy, counting evaluations."""

    def __init__(self, p: ProblemSpec, w: float = 0.0):
        if w == 0 and p.exact_hyper_fn is None:
            w = 1e-10
        self.problem = p
        self.w = w
        self.calls = 0

    def __call__(self, x) -> float:
        self.calls += 1
        return inner_value(self.problem, x, self.w).value

    def with_accuracy(self, w: float) -> "HyperOracle":
        return HyperOracle(self.problem, w)


def _box_project(p: ProblemSpec, y: np.ndarray) -> np.ndarray:
    lo = np.array([b[0] for b in p.box_constrained_lower])
    hi = np.array([b[1] for b in p.box_constrained_lower])
    return np.clip(y, lo, hi)


def lower_level_solve(
    p: ProblemSpec,
    x,
    tol: float,
    rng: np.random.Generator,
    *,
    y0=None,
    max_iter: int = 100_000,
) -> np.ndarray:
    """Gradient descent on f(x, ·) until ‖∇_y f‖ ≤ tol/τ, which certifies dist(y, S(x)) ≤ tol.

    Box-constrained lower levels use projected steps and the gradient mapping instead.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    x = as_vector(x, p.m, "x")
    y = rng.standard_normal(p.n) if y0 is None else as_vector(y0, p.n, "y0").copy()
    step = 1.0 / max(p.constants.lower_smoothness, 1e-12)
    target = tol / p.constants.error_bound
    constrained = p.box_constrained_lower is not None
    if constrained:
        y = _box_project(p, y)
    for _ in range(max_iter):
        grad = lower_grad_y(p, x, y)
        if constrained:
            y_next = _box_project(p, y - step * grad)
            residual = np.linalg.norm(y - y_next) / step
        else:
            y_next = y - step * grad
            residual = np.linalg.norm(grad)
        if residual <= target:
            return y
        y = y_next
    raise BudgetExceeded(
        f"Lower-level descent did not reach ‖∇f‖ ≤ {target:.3g} in {max_iter} steps"
    )
