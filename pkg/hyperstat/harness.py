# SPDX-License-Identifier: BSD-3-Clause

"""Rate experiments: sweep T over a set of seeds, measure stationarity at the selected
iterate of every run, aggregate per T and fit the log-log slope.

An experiment is described by a JSON file; see the README for the schema.
"""

import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from enum import Enum
from pathlib import Path

import numpy as np

from hyperstat import artifacts, configuration
from hyperstat.errors import HyperstatError
from hyperstat.inner import HyperOracle
from hyperstat.problems import Mode, ProblemSpec, registry_get
from hyperstat.rng import derive_seed, make_rng, substream
from hyperstat.stationarity import (
    EnvelopeConfig,
    clarke_certificate,
    envelope_gradient_norm,
    goldstein_gap,
    moreau_envelope,
)
from hyperstat.structure import theory_moduli
from hyperstat.zeroth_order import IzomConfig, RunTrace, izom_run


logger = logging.getLogger(__name__)


class Measurement(Enum):
    ENVELOPE = "Envelope"
    CLARKE_SMOOTHING = "ClarkeSmoothing"
    GOLDSTEIN = "Goldstein"

    @classmethod
    def parse(cls, value) -> "Measurement":
        if isinstance(value, cls):
            return value
        for member in cls:
            if str(value).lower() in (member.value.lower(), member.name.lower()):
                return member
        raise ValueError(f"Unknown measurement {value!r}")


@dataclass
class ExperimentConfig:
    problem: str
    T_list: list[int]
    mode: Mode | None = None
    seeds: int = 1
    seed: int = 0
    c_eta: float | None = None
    c_eps: float = 1.0
    c_w: float = 1.0
    gamma: float = 0.1
    # Declared weak convexity modulus, used to validate gamma and in certificates
    rho: float | None = None
    measurement: Measurement = Measurement.ENVELOPE
    output_dir: Path | None = None
    x0: list[float] | None = None
    n_mc: int = 1000
    # Goldstein radius; defaults to sqrt(2 eps M_phi)
    delta: float | None = None
    n_samples: int = 100
    # Measure every `measure_stride`-th iterate of each run as well
    measure_stride: int | None = None
    log_values: bool = False
    directions_per_step: int = 1
    write_traces: bool = True

    def __post_init__(self):
        self.T_list = [int(T) for T in self.T_list]
        if not self.T_list or any(T < 1 for T in self.T_list):
            raise ValueError("T_list must hold at least one positive iteration count")
        if any(b <= a for a, b in zip(self.T_list, self.T_list[1:])):
            raise ValueError(f"T_list {self.T_list} is not strictly increasing")
        if self.seeds < 1:
            raise ValueError("seeds must be at least 1")
        if self.mode is not None:
            self.mode = Mode(self.mode)
        self.measurement = Measurement.parse(self.measurement)
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if (
            self.measurement is Measurement.ENVELOPE
            and self.rho is not None
            and self.gamma >= 1.0 / (self.rho + 1.0)
        ):
            raise ValueError(f"gamma = {self.gamma} must be below 1/(rho + 1) for the envelope measure")
        if self.output_dir is not None:
            self.output_dir = Path(self.output_dir)
        if self.measure_stride is not None and self.measure_stride < 1:
            raise ValueError("measure_stride must be at least 1")
        if self.delta is not None and not self.delta > 0:
            raise ValueError("delta must be positive")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known - {"schedule"}
        if unknown:
            raise ValueError(f"Unknown experiment keys: {sorted(unknown)}")
        # Schedule constants may be grouped as in the user config
        for k, v in (d.pop("schedule", None) or {}).items():
            d.setdefault(k, v)
        for k, v in configuration.config["schedule"].items():
            d.setdefault(k, v)
        d.setdefault("gamma", configuration.config["gamma"])
        return cls(**d)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as f:
            return cls.from_dict(json.load(f))

    def to_dict(self) -> dict:
        out = asdict(self)
        out["mode"] = None if self.mode is None else self.mode.value
        out["measurement"] = self.measurement.value
        # Where artifacts went is not part of what was run
        out.pop("output_dir")
        return out


@dataclass
class RateRow:
    T: int
    mean: float
    stderr: float
    eta: float
    eps: float
    w: float
    delta: float
    gap: float  # Δ from the rate bound
    runs: list[dict] = field(default_factory=list)


@dataclass
class RateReport:
    problem: str
    mode: Mode
    measurement: Measurement
    rows: list[RateRow]
    slope: float | None
    intercept: float | None
    config: dict
    theory: dict
    wall_clock: float = 0.0
    partial: bool = False

    def to_dict(self) -> dict:
        return {
            "problem": self.problem,
            "mode": self.mode.value,
            "measurement": self.measurement.value,
            "rows": [asdict(r) for r in self.rows],
            "slope": self.slope,
            "intercept": self.intercept,
            "config": self.config,
            "theory": self.theory,
            "partial": self.partial,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RateReport":
        return cls(
            problem=d["problem"],
            mode=Mode(d["mode"]),
            measurement=Measurement.parse(d["measurement"]),
            rows=[RateRow(**r) for r in d["rows"]],
            slope=d.get("slope"),
            intercept=d.get("intercept"),
            config=d.get("config", {}),
            theory=d.get("theory", {}),
            partial=d.get("partial", False),
        )


@artifacts.emit_artifacts.register
def _(report: RateReport, directory) -> list[Path]:
    directory = Path(directory)
    paths = [artifacts.write_json(directory / f"report_{report.problem}.json", report.to_dict())]
    rows = [[r.T, artifacts.fmt(r.mean), artifacts.fmt(r.stderr)] for r in report.rows]
    paths.append(
        artifacts.write_rows(
            directory / f"rates_{report.problem}.tsv", ["T", "mean", "stderr"], rows, "\t"
        )
    )
    paths.append(
        artifacts.write_json(
            directory / f"timing_{report.problem}.json",
            {"problem": report.problem, "wall_clock_seconds": report.wall_clock},
        )
    )
    return paths


def fit_rate(points) -> tuple[float, float]:
    """Least-squares line through (ln T, ln measure); returns (slope, intercept)."""
    points = list(points)
    if len(points) < 3:
        raise ValueError("Fitting a rate needs at least 3 points")
    T = np.array([p[0] for p in points], dtype=float)
    y = np.array([p[1] for p in points], dtype=float)
    if np.any(T <= 0) or np.any(y <= 0):
        raise ValueError("Rate points must be positive")
    slope, intercept = np.polyfit(np.log(T), np.log(y), 1)
    return float(slope), float(intercept)


class _Measurer:
    """Evaluates the configured squared stationarity measure at a point."""

    def __init__(self, p: ProblemSpec, cfg: ExperimentConfig):
        self.p = p
        self.cfg = cfg
        self.moduli = theory_moduli(p.constants)
        self.oracle = HyperOracle(p)
        self.envelope = EnvelopeConfig(cfg.gamma, rho=cfg.rho, lipschitz=self.moduli.hyper_lipschitz)

    def __call__(self, x: np.ndarray, eps: float, rng: np.random.Generator) -> tuple[float, float]:
        """(measure², δ)"""
        kind = self.cfg.measurement
        if kind is Measurement.ENVELOPE:
            norm, _ = envelope_gradient_norm(self.oracle, x, self.envelope)
            return norm**2, self.cfg.gamma * norm
        if kind is Measurement.CLARKE_SMOOTHING:
            rho = self.cfg.rho if self.cfg.rho is not None else self.moduli.weak_modulus
            cert = clarke_certificate(self.p, x, eps, rho, self.cfg.n_mc, rng)
            return cert.epsilon**2, cert.delta
        delta = self.cfg.delta
        if delta is None:
            delta = math.sqrt(2 * eps * self.moduli.hyper_lipschitz)
        cert = goldstein_gap(
            self.oracle,
            x,
            delta,
            self.cfg.n_samples,
            rng=rng,
            lipschitz=self.moduli.hyper_lipschitz,
        )
        return cert.epsilon**2, cert.delta

    def gap_value(self, x: np.ndarray) -> float:
        """The function whose decrease Δ measures: φ_γ when pessimistic, φ when optimistic."""
        if self.p.mode is Mode.PESSIMISTIC:
            return moreau_envelope(self.oracle, x, self.envelope)[0]
        return self.oracle(x)


def _run_one(p: ProblemSpec, cfg: ExperimentConfig, measurer: _Measurer, T: int, k: int, x0, out: Path):
    izom_cfg = IzomConfig.from_schedule(
        p,
        T,
        seed=derive_seed(cfg.seed, k),
        x0=x0,
        mode=p.mode,
        c_eta=cfg.c_eta,
        c_eps=cfg.c_eps,
        c_w=cfg.c_w,
        directions_per_step=cfg.directions_per_step,
        log_values=cfg.log_values,
    )
    trace = izom_run(p, izom_cfg)
    # Measurement randomness is independent of the run's own stream
    rng = substream(make_rng(izom_cfg.seed))
    measure, delta = measurer(trace.selected_x, izom_cfg.eps, rng)
    run = {
        "seed": izom_cfg.seed,
        "selected_index": trace.selected_index,
        "measure": measure,
        "delta": delta,
        "gap_value": measurer.gap_value(trace.selected_x),
    }
    if cfg.write_traces:
        artifacts.emit_artifacts(trace, out)
    if cfg.measure_stride:
        steps = list(range(0, T + 1, cfg.measure_stride))
        series = [measurer(trace.iterates[t], izom_cfg.eps, rng)[0] for t in steps]
        artifacts.write_measure_series(
            out / f"measure_{p.name}_{izom_cfg.seed}_{T}.tsv", steps, series
        )
    logger.debug(f"{p.name} T={T} seed={izom_cfg.seed}: measure {measure:.6g}")
    return trace, run


def _aggregate(
    T: int, traces: list[RunTrace], runs: list[dict], p: ProblemSpec, base: float, m_phi
) -> RateRow:
    measures = np.array([r["measure"] for r in runs])
    n = measures.size
    stderr = float(measures.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    cfg = traces[0].config
    observed = [base] + [r["gap_value"] for r in runs]
    if cfg.log_values and p.mode is Mode.OPTIMISTIC:
        observed.extend(float(v) for t in traces for v in t.values)
    gap = base - min(observed)
    if p.mode is Mode.OPTIMISTIC:
        gap += 2 * m_phi * cfg.eps
    return RateRow(
        T=T,
        mean=float(measures.mean()),
        stderr=stderr,
        eta=cfg.eta,
        eps=cfg.eps,
        w=cfg.w,
        delta=float(np.mean([r["delta"] for r in runs])),
        gap=gap,
        runs=runs,
    )


def run_experiment(cfg: ExperimentConfig) -> RateReport:
    """Run every (T, seed) pair, write per-run artifacts and the report, return the report.

    If a run fails, the rows completed so far are written as a partial report before the
    error propagates.
    """
    p = registry_get(cfg.problem, cfg.mode)
    out = Path(cfg.output_dir) if cfg.output_dir is not None else configuration.runs_dir() / p.name
    x0 = np.asarray(cfg.x0, dtype=float) if cfg.x0 is not None else 2.0 * np.ones(p.m)
    measurer = _Measurer(p, cfg)
    moduli = measurer.moduli
    base = measurer.gap_value(x0)
    logger.info(f"Running {p.name} ({p.mode.value}) for T in {cfg.T_list} with {cfg.seeds} seeds")

    report = RateReport(
        problem=p.name,
        mode=p.mode,
        measurement=cfg.measurement,
        rows=[],
        slope=None,
        intercept=None,
        config=cfg.to_dict(),
        theory=moduli._asdict(),
    )
    start = time.perf_counter()
    tasks = [(T, k) for T in cfg.T_list for k in range(cfg.seeds)]
    results: dict[tuple[int, int], tuple] = {}
    try:
        with ThreadPoolExecutor(max_workers=configuration.worker_count()) as pool:
            futures = {
                task: pool.submit(_run_one, p, cfg, measurer, *task, x0, out) for task in tasks
            }
            for T in cfg.T_list:
                for k in range(cfg.seeds):
                    results[(T, k)] = futures[(T, k)].result()
                traces, runs = zip(*(results[(T, k)] for k in range(cfg.seeds)))
                row = _aggregate(T, list(traces), list(runs), p, base, moduli.hyper_lipschitz)
                report.rows.append(row)
    except (HyperstatError, ValueError, ArithmeticError) as err:
        report.partial = True
        report.wall_clock = time.perf_counter() - start
        logger.error(f"Experiment on {p.name} failed; writing partial report: {err}")
        artifacts.emit_artifacts(report, out)
        raise

    report.wall_clock = time.perf_counter() - start
    if len(report.rows) >= 3:
        try:
            report.slope, report.intercept = fit_rate((r.T, r.mean) for r in report.rows)
        except ValueError as err:
            logger.warning(f"Could not fit a rate for {p.name}: {err}")
    else:
        logger.info(f"Only {len(report.rows)} T values; not fitting a rate")
    artifacts.emit_artifacts(report, out)
    return report
