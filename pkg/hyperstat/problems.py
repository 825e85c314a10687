# SPDX-License-Identifier: BSD-3-Clause

"""Bilevel problem instances and the fixture registry.

A `ProblemSpec` bundles the upper objective F(x, y), the lower objective f(x, y), the
regularity constants that hold on a working box, and (for the fixtures) a descriptor
of the lower-level solution map and closed forms of the hyper-objectives

    optimistic:  min_{y ∈ S(x)} F(x, y)
    pessimistic: max_{y ∈ S(x)} F(x, y)
"""

import logging
import math
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from hyperstat.descriptors import (
    AffineHyperplane,
    FixedInterval,
    GraphLine,
    SetMapDescriptor,
    Singleton,
    TranslatedSet,
)
from hyperstat.errors import DimensionError, NoDescriptor, NoOracle, UnknownProblem


logger = logging.getLogger(__name__)


class Mode(Enum):
    OPTIMISTIC = "optimistic"
    PESSIMISTIC = "pessimistic"

    @property
    def sign(self) -> float:
        """+1 when the inner problem maximizes F, -1 when it minimizes."""
        return 1.0 if self is Mode.PESSIMISTIC else -1.0


@dataclass(frozen=True)
class ConstantsBundle:
    """Regularity constants, certified on `working_box` only.

    upper_lipschitz     Lipschitz modulus of F
    upper_smoothness    Lipschitz modulus of ∇F
    lower_smoothness    Lipschitz modulus of ∇f
    lower_hessian_lipschitz   Lipschitz modulus of ∇∇_y f
    error_bound         τ in dist(y, S(x)) ≤ τ‖∇_y f(x, y)‖
    """

    upper_lipschitz: float
    upper_smoothness: float
    lower_smoothness: float
    lower_hessian_lipschitz: float
    error_bound: float
    working_box: tuple[tuple[float, float], ...]

    def __post_init__(self):
        moduli = (
            self.upper_lipschitz,
            self.upper_smoothness,
            self.lower_smoothness,
            self.lower_hessian_lipschitz,
        )
        if any(c < 0 for c in moduli):
            raise ValueError("Moduli must be nonnegative")
        if not self.error_bound > 0:
            raise ValueError("The error-bound constant must be positive")
        if not self.working_box or any(lo > hi for lo, hi in self.working_box):
            raise ValueError(f"Empty working box {self.working_box}")
        object.__setattr__(self, "working_box", tuple(tuple(map(float, b)) for b in self.working_box))

    @property
    def box_lo(self) -> np.ndarray:
        return np.array([lo for lo, _ in self.working_box])

    @property
    def box_hi(self) -> np.ndarray:
        return np.array([hi for _, hi in self.working_box])

    def sample_box(self, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
        """Uniform draw(s) from the working box."""
        shape = (len(self.working_box),) if size is None else (size, len(self.working_box))
        return rng.uniform(self.box_lo, self.box_hi, size=shape)


Fn = Callable[[np.ndarray, np.ndarray], float]


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    name: str
    m: int
    n: int
    upper_fn: Fn | None
    lower_fn: Fn | None
    mode: Mode
    constants: ConstantsBundle
    lower_grad_fn: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    descriptor: SetMapDescriptor | None = None
    # Closed-form hyper-objectives keyed by mode; they accept batches shaped (..., m)
    exact_hyper: Mapping[Mode, Callable[[np.ndarray], float | np.ndarray]] = field(
        default_factory=dict
    )
    box_constrained_lower: tuple[tuple[float, float], ...] | None = None
    # Set-smoothness modulus known in closed form, if any
    set_smoothness: float | None = None

    @property
    def exact_hyper_fn(self) -> Callable[[np.ndarray], float | np.ndarray] | None:
        return self.exact_hyper.get(self.mode)

    @property
    def assumption_violating(self) -> bool:
        return self.box_constrained_lower is not None

    def with_mode(self, mode: Mode) -> "ProblemSpec":
        return self if mode is self.mode else replace(self, mode=mode)


def as_vector(v, dim: int, what: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(v, dtype=float))
    if arr.ndim != 1 or arr.size != dim:
        raise DimensionError(f"{what} has shape {arr.shape}, expected ({dim},)")
    return arr


def require_descriptor(p: ProblemSpec) -> SetMapDescriptor:
    if p.descriptor is None:
        raise NoDescriptor(f"Problem {p.name} has no solution-set descriptor")
    return p.descriptor


def eval_upper(p: ProblemSpec, x, y) -> float:
    x, y = as_vector(x, p.m, "x"), as_vector(y, p.n, "y")
    if p.upper_fn is None:
        raise NoOracle(f"Problem {p.name} has no upper-level objective")
    return float(p.upper_fn(x, y))


def eval_lower(p: ProblemSpec, x, y) -> float:
    x, y = as_vector(x, p.m, "x"), as_vector(y, p.n, "y")
    if p.lower_fn is None:
        raise NoOracle(f"Problem {p.name} has no lower-level objective")
    return float(p.lower_fn(x, y))


def fd_step(point: np.ndarray) -> float:
    return 1e-6 * max(1.0, float(np.linalg.norm(point)))


def lower_grad_y(p: ProblemSpec, x, y, *, analytic: bool = True) -> np.ndarray:
    """∇_y f(x, y): the analytic gradient if the problem has one, else central differences."""
    x, y = as_vector(x, p.m, "x"), as_vector(y, p.n, "y")
    if analytic and p.lower_grad_fn is not None:
        return np.asarray(p.lower_grad_fn(x, y), dtype=float).reshape(p.n)
    if p.lower_fn is None:
        raise NoOracle(f"Problem {p.name} has no lower-level objective")
    h = fd_step(y)
    grad = np.empty(p.n)
    for i in range(p.n):
        e = np.zeros(p.n)
        e[i] = h
        grad[i] = (p.lower_fn(x, y + e) - p.lower_fn(x, y - e)) / (2 * h)
    return grad


def project_onto_solution_set(p: ProblemSpec, x, y) -> np.ndarray:
    d = require_descriptor(p)
    x, y = as_vector(x, p.m, "x"), as_vector(y, p.n, "y")
    return d.project(x, y)


def solution_set_sample(p: ProblemSpec, x, rng: np.random.Generator, radius: float = 1.0) -> np.ndarray:
    """A point of S(x) within `radius` of the descriptor's anchor point."""
    if not radius > 0:
        raise ValueError("radius must be positive")
    d = require_descriptor(p)
    return d.sample(as_vector(x, p.m, "x"), rng, radius)


# Fixtures
# Gradients and Hessians below were computed by hand; the tests compare them against
# finite differences.

SQRT2 = math.sqrt(2.0)
LINE_NORMAL = np.array([1.0, 1.0]) / SQRT2


def _line_lower(x, y):
    return 0.5 * (y[0] + y[1] - np.sum(x)) ** 2


def _line_lower_grad(x, y):
    r = y[0] + y[1] - np.sum(x)
    return np.array([r, r])


def _line_descriptor() -> AffineHyperplane:
    return AffineHyperplane(LINE_NORMAL, lambda x: float(np.sum(x)) / SQRT2)


def _p1_line() -> ProblemSpec:
    return ProblemSpec(
        name="P1-line",
        m=1,
        n=2,
        upper_fn=lambda x, y: math.sin(y[0] - y[1]) + x[0],
        lower_fn=_line_lower,
        lower_grad_fn=_line_lower_grad,
        mode=Mode.PESSIMISTIC,
        constants=ConstantsBundle(math.sqrt(3.0), 2.0, 3.0, 0.0, 0.5, ((-5.0, 5.0),)),
        descriptor=_line_descriptor(),
        exact_hyper={
            Mode.PESSIMISTIC: lambda x: np.asarray(x)[..., 0] + 1.0,
            Mode.OPTIMISTIC: lambda x: np.asarray(x)[..., 0] - 1.0,
        },
    )


def _p1_line_coercive() -> ProblemSpec:
    return replace(
        _p1_line(),
        name="P1-line-coercive",
        upper_fn=lambda x, y: math.sin(y[0] - y[1]) + math.sqrt(1.0 + x[0] ** 2),
        exact_hyper={
            Mode.PESSIMISTIC: lambda x: 1.0 + np.sqrt(1.0 + np.asarray(x)[..., 0] ** 2),
            Mode.OPTIMISTIC: lambda x: np.sqrt(1.0 + np.asarray(x)[..., 0] ** 2) - 1.0,
        },
    )


def _dead_zone(z):
    """g(z) = max(0, |z| - 1)²"""
    return max(0.0, abs(z) - 1.0) ** 2


def _dead_zone_grad(z):
    return 2.0 * math.copysign(max(0.0, abs(z) - 1.0), z)


def _p2_sin_interval() -> ProblemSpec:
    return ProblemSpec(
        name="P2-sin-interval",
        m=1,
        n=1,
        upper_fn=lambda x, y: x[0] * y[0],
        lower_fn=lambda x, y: _dead_zone(math.sin(x[0]) + y[0]),
        lower_grad_fn=lambda x, y: np.array([_dead_zone_grad(math.sin(x[0]) + y[0])]),
        mode=Mode.PESSIMISTIC,
        # g is only C¹, so the Hessian-Lipschitz entry is nominal; theory formulas that
        # need it are not applied to this fixture
        constants=ConstantsBundle(2.0 * SQRT2, 1.0, 4.0, 0.0, 0.5, ((-2.0, 2.0),)),
        descriptor=TranslatedSet(FixedInterval(-1.0, 1.0), lambda x: math.sin(x[0])),
        exact_hyper={
            Mode.PESSIMISTIC: lambda x: (
                np.abs(np.asarray(x)[..., 0]) - np.asarray(x)[..., 0] * np.sin(np.asarray(x)[..., 0])
            ),
            Mode.OPTIMISTIC: lambda x: (
                -np.abs(np.asarray(x)[..., 0]) - np.asarray(x)[..., 0] * np.sin(np.asarray(x)[..., 0])
            ),
        },
        set_smoothness=1.0,
    )


def _box_point(x):
    return np.array([min(max(x[0], 0.0), 1.0), 1.0])


def _p3_box_counterexample() -> ProblemSpec:
    def phi(x):
        return -np.clip(np.asarray(x)[..., 0], 0.0, 1.0) - 1.0

    return ProblemSpec(
        name="P3-box-counterexample",
        m=1,
        n=2,
        upper_fn=lambda x, y: -(y[0] + y[1]),
        lower_fn=lambda x, y: (y[0] - x[0]) ** 2 + (y[1] - 2.0) ** 2,
        lower_grad_fn=lambda x, y: 2.0 * (np.asarray(y) - np.array([x[0], 2.0])),
        mode=Mode.PESSIMISTIC,
        constants=ConstantsBundle(SQRT2, 0.0, 4.0, 0.0, 0.5, ((-1.0, 2.0),)),
        descriptor=Singleton(_box_point),
        # S(x) is a single point, so both hyper-objectives coincide
        exact_hyper={Mode.PESSIMISTIC: phi, Mode.OPTIMISTIC: phi},
        box_constrained_lower=((0.0, 1.0), (0.0, 1.0)),
    )


def _p4_graphline() -> ProblemSpec:
    return ProblemSpec(
        name="P4-graphline",
        m=1,
        n=2,
        upper_fn=None,
        lower_fn=None,
        mode=Mode.PESSIMISTIC,
        constants=ConstantsBundle(0.0, 0.0, 1.0, 0.0, 1.0, ((-1.0, 1.0),)),
        descriptor=GraphLine(),
    )


def _p5_plane_coercive() -> ProblemSpec:
    def radial(x):
        return np.sqrt(1.0 + np.sum(np.asarray(x) ** 2, axis=-1))

    return ProblemSpec(
        name="P5-plane-coercive",
        m=2,
        n=2,
        upper_fn=lambda x, y: math.sin(y[0] - y[1]) + math.sqrt(1.0 + x[0] ** 2 + x[1] ** 2),
        lower_fn=_line_lower,
        lower_grad_fn=_line_lower_grad,
        mode=Mode.PESSIMISTIC,
        constants=ConstantsBundle(math.sqrt(3.0), 2.0, 4.0, 0.0, 0.5, ((-5.0, 5.0), (-5.0, 5.0))),
        descriptor=_line_descriptor(),
        exact_hyper={
            Mode.PESSIMISTIC: lambda x: 1.0 + radial(x),
            Mode.OPTIMISTIC: lambda x: radial(x) - 1.0,
        },
    )


_registry: dict[str, Callable[[], ProblemSpec]] = {
    "P1-line": _p1_line,
    "P1-line-coercive": _p1_line_coercive,
    "P2-sin-interval": _p2_sin_interval,
    "P3-box-counterexample": _p3_box_counterexample,
    "P4-graphline": _p4_graphline,
    "P5-plane-coercive": _p5_plane_coercive,
}


def list_problems() -> list[str]:
    return list(_registry)


def registry_get(name: str, mode: Mode | str | None = None) -> ProblemSpec:
    try:
        p = _registry[name]()
    except KeyError:
        raise UnknownProblem(name) from None
    if mode is not None:
        p = p.with_mode(Mode(mode))
    return p
