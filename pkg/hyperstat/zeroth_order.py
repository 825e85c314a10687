# SPDX-License-Identifier: BSD-3-Clause

"""The inexact zeroth-order method.

Each step draws a direction u uniformly from the unit sphere, evaluates the
hyper-objective inexactly at x ± εu, forms the two-point estimate

    G̃(x) = (m / 2ε) (φ̃(x + εu) − φ̃(x − εu)) u

and moves x ← x − ηG̃(x). There is no projection, clipping or line search, and the
output is an iterate chosen uniformly at random.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from hyperstat.errors import HyperstatError, IterationFailed
from hyperstat.inner import inner_value
from hyperstat.problems import Mode, ProblemSpec, as_vector
from hyperstat.rng import make_rng
from hyperstat.structure import theory_moduli


logger = logging.getLogger(__name__)


class Schedule(NamedTuple):
    eta: float
    eps: float
    w: float
    c_eta: float
    c_eps: float
    c_w: float


def default_schedule(
    p: ProblemSpec,
    T: int,
    *,
    c_eta: float | None = None,
    c_eps: float = 1.0,
    c_w: float = 1.0,
) -> Schedule:
    """η = c_η/√(mT), ε = c_ε/√T, w = c_w/(mT)^{3/4}, with c_η = 1/max(1, M_φ) unless given."""
    if T < 1:
        raise ValueError("T must be at least 1")
    if c_eta is None:
        c_eta = 1.0 / max(1.0, theory_moduli(p.constants).hyper_lipschitz)
    m = p.m
    return Schedule(
        eta=c_eta / (math.sqrt(m) * math.sqrt(T)),
        eps=c_eps / math.sqrt(T),
        w=c_w / (m**0.75 * T**0.75),
        c_eta=c_eta,
        c_eps=c_eps,
        c_w=c_w,
    )


@dataclass(frozen=True, eq=False)
class IzomConfig:
    T: int
    eta: float
    eps: float
    w: float
    seed: int
    x0: np.ndarray
    mode: Mode
    # Directions averaged per step; 1 is the method as analysed
    directions_per_step: int = 1
    # Evaluate φ̃ at every iterate for the trace (doubles the inner cost)
    log_values: bool = False
    schedule: Schedule | None = field(default=None)

    def __post_init__(self):
        if self.T < 1:
            raise ValueError("T must be at least 1")
        if not (self.eta > 0 and self.eps > 0 and self.w > 0):
            raise ValueError("eta, eps and w must all be positive")
        if self.directions_per_step < 1:
            raise ValueError("directions_per_step must be at least 1")
        object.__setattr__(self, "x0", np.atleast_1d(np.asarray(self.x0, dtype=float)))
        object.__setattr__(self, "mode", Mode(self.mode))

    @classmethod
    def from_schedule(cls, p: ProblemSpec, T: int, seed: int, x0, mode: Mode | None = None, **kwargs):
        constants = {k: kwargs.pop(k) for k in ("c_eta", "c_eps", "c_w") if k in kwargs}
        sched = default_schedule(p, T, **constants)
        return cls(
            T=T,
            eta=sched.eta,
            eps=sched.eps,
            w=sched.w,
            seed=seed,
            x0=x0,
            mode=mode or p.mode,
            schedule=sched,
            **kwargs,
        )

    def to_dict(self) -> dict:
        out = {
            "T": self.T,
            "eta": self.eta,
            "eps": self.eps,
            "w": self.w,
            "seed": self.seed,
            "x0": self.x0.tolist(),
            "mode": self.mode.value,
            "directions_per_step": self.directions_per_step,
            "log_values": self.log_values,
        }
        if self.schedule is not None:
            out["schedule_constants"] = {
                "c_eta": self.schedule.c_eta,
                "c_eps": self.schedule.c_eps,
                "c_w": self.schedule.c_w,
            }
        return out


@dataclass(frozen=True, eq=False)
class RunTrace:
    problem: str
    config: IzomConfig
    iterates: np.ndarray  # (T + 1, m)
    estimates: np.ndarray  # (T, m)
    values: np.ndarray | None  # (T + 1,) when logged
    selected_index: int
    inner_calls: int

    @property
    def selected_x(self) -> np.ndarray:
        return self.iterates[self.selected_index]


def sample_unit_sphere(rng: np.random.Generator, m: int) -> np.ndarray:
    """Uniform on the unit sphere in ℝᵐ: a normalized standard Gaussian vector."""
    if m < 1:
        raise ValueError("Dimension must be at least 1")
    while True:
        g = rng.standard_normal(m)
        norm = np.linalg.norm(g)
        if norm > 0:
            return g / norm


def two_point_estimate(p: ProblemSpec, x, u, eps: float, w: float) -> np.ndarray:
    if not eps > 0:
        raise ValueError("Smoothing radius eps must be positive")
    x, u = as_vector(x, p.m, "x"), as_vector(u, p.m, "u")
    if abs(np.linalg.norm(u) - 1.0) > 1e-9:
        raise ValueError("Direction u must have unit length")
    forward = inner_value(p, x + eps * u, w).value
    backward = inner_value(p, x - eps * u, w).value
    return (p.m / (2 * eps)) * (forward - backward) * u


def izom_run(p: ProblemSpec, cfg: IzomConfig) -> RunTrace:
    p = p.with_mode(cfg.mode)
    x = as_vector(cfg.x0, p.m, "x0").copy()
    rng = make_rng(cfg.seed)
    iterates = np.empty((cfg.T + 1, p.m))
    estimates = np.empty((cfg.T, p.m))
    values = np.empty(cfg.T + 1) if cfg.log_values else None
    inner_calls = 0
    logger.debug(f"hyperstat is requesting {cfg.T} zeroth-order steps on {p.name} from x0={x}")

    iterates[0] = x
    for t in range(cfg.T):
        try:
            if values is not None:
                values[t] = inner_value(p, x, cfg.w).value
                inner_calls += 1
            g = np.zeros(p.m)
            for _ in range(cfg.directions_per_step):
                u = sample_unit_sphere(rng, p.m)
                g += two_point_estimate(p, x, u, cfg.eps, cfg.w)
                inner_calls += 2
        except HyperstatError as err:
            raise IterationFailed(t, err) from err
        if cfg.directions_per_step > 1:
            g /= cfg.directions_per_step
        estimates[t] = g
        x = x - cfg.eta * g
        iterates[t + 1] = x
    if values is not None:
        try:
            values[cfg.T] = inner_value(p, x, cfg.w).value
        except HyperstatError as err:
            raise IterationFailed(cfg.T, err) from err
        inner_calls += 1

    selected = int(rng.integers(cfg.T))
    logger.debug(f"Run on {p.name} finished at x_T={x}; selected iterate {selected}")
    return RunTrace(
        problem=p.name,
        config=cfg,
        iterates=iterates,
        estimates=estimates,
        values=values,
        selected_index=selected,
        inner_calls=inner_calls,
    )
