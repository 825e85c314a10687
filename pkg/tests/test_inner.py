import math
import time
from dataclasses import replace

import numpy as np
import pytest

from hyperstat.errors import BudgetExceeded, NoOracle, UnboundedInner
from hyperstat.inner import (
    HyperOracle,
    certified_max,
    golden_section_max,
    inner_argopt,
    inner_value,
)
from hyperstat.problems import ConstantsBundle, Mode, ProblemSpec, registry_get
from hyperstat.structure import theory_moduli


def test_golden_section_finds_peak():
    t, v, evals = golden_section_max(lambda t: -((t - 0.3) ** 2), -1.0, 2.0, 1e-10)
    assert t == pytest.approx(0.3, abs=1e-9)
    assert v == pytest.approx(0.0, abs=1e-15)
    assert evals > 2


def test_certified_max_meets_requested_gap():
    t, v, gap, _ = certified_max(math.sin, 0.0, 10.0, 1.0, 1.0, 1e-9)
    assert gap <= 1e-9
    assert v == pytest.approx(1.0, abs=1e-9)
    assert math.sin(t) == v


def test_certified_max_budget(p1):
    with pytest.raises(BudgetExceeded) as info:
        inner_value(p1, [0.5], 1e-8, use_exact=False, max_evals=20)
    assert info.value.best_value == pytest.approx(1.5, abs=1e-6)
    assert info.value.achieved_tol > 1e-8


def test_box_counterexample_matches_closed_form(p3):
    # The solution map is a single point, so the search is exact
    start = time.perf_counter()
    for x in np.linspace(-1.0, 2.0, 301):
        searched = inner_value(p3, [x], 1e-8, use_exact=False).value
        exact = -min(max(x, 0.0), 1.0) - 1.0
        assert abs(searched - exact) <= 1e-8
    assert time.perf_counter() - start < 5.0


@pytest.mark.parametrize("mode, offset", [(Mode.PESSIMISTIC, 1.0), (Mode.OPTIMISTIC, -1.0)])
def test_line_search_matches_closed_form(mode, offset):
    p = registry_get("P1-line", mode)
    for x in (-3.0, 0.0, 0.5, 4.0):
        result = inner_value(p, [x], 1e-8, use_exact=False)
        assert abs(result.value - (x + offset)) <= 1e-8
        assert result.achieved_tol <= 1e-8
        assert result.truncation_bound == pytest.approx(4 * math.pi)
        assert p.descriptor.contains(np.array([x]), result.witness_y)


@pytest.mark.parametrize("mode", list(Mode))
def test_interval_search_matches_closed_form(mode):
    p = registry_get("P2-sin-interval", mode)
    for x in np.linspace(-2.0, 2.0, 9):
        searched = inner_value(p, [x], 1e-9, use_exact=False).value
        assert searched == pytest.approx(float(p.exact_hyper_fn(np.array([x]))), abs=1e-9)


@pytest.mark.parametrize("w", [1e-4, 1e-6, 1e-8])
@pytest.mark.parametrize("mode", list(Mode))
@pytest.mark.parametrize("name", ["P1-line-coercive", "P2-sin-interval", "P5-plane-coercive"])
def test_search_is_within_accuracy_on_a_grid(name, mode, w):
    p = registry_get(name, mode)
    lo, hi = p.constants.working_box[0]
    for s in np.linspace(lo, hi, 101):
        x = np.full(p.m, s)
        result = inner_value(p, x, w, use_exact=False)
        assert abs(result.value - float(p.exact_hyper_fn(x))) <= w
        assert result.achieved_tol <= w


@pytest.mark.parametrize("name", ["P1-line", "P1-line-coercive", "P2-sin-interval"])
def test_smaller_accuracy_never_loosens_the_certified_gap(name, rng):
    p = registry_get(name)
    for _ in range(20):
        x = p.constants.sample_box(rng)
        gaps = [
            inner_value(p, x, w, use_exact=False).achieved_tol for w in (1e-2, 1e-4, 1e-6, 1e-8)
        ]
        assert all(b <= a for a, b in zip(gaps, gaps[1:]))


def test_larger_budget_never_loosens_the_certified_gap(p1):
    def certified_gap(budget):
        try:
            return inner_value(p1, [0.5], 1e-12, use_exact=False, max_evals=budget).achieved_tol
        except BudgetExceeded as err:
            return err.achieved_tol

    gaps = [certified_gap(budget) for budget in (80, 120, 200, 400, 1000)]
    assert all(b <= a for a, b in zip(gaps, gaps[1:]))


@pytest.mark.parametrize("name", ["P1-line-coercive", "P2-sin-interval"])
def test_inexact_oracle_respects_lipschitz_bound(name, rng):
    p = registry_get(name)
    w = 1e-4
    oracle = HyperOracle(replace(p, exact_hyper={}), w)
    m_phi = theory_moduli(p.constants).hyper_lipschitz
    for _ in range(200):
        x1, x2 = p.constants.sample_box(rng), p.constants.sample_box(rng)
        assert abs(oracle(x1) - oracle(x2)) <= m_phi * np.linalg.norm(x1 - x2) + 2 * w


def test_plane_search_matches_closed_form(p5):
    x = np.array([1.0, -2.0])
    searched = inner_value(p5, x, 1e-8, use_exact=False).value
    assert searched == pytest.approx(1.0 + math.sqrt(6.0), abs=1e-8)


def test_closed_form_is_exact_at_zero_accuracy(p1_coercive):
    result = inner_value(p1_coercive, [0.0], 0.0)
    assert result.value == 2.0
    assert result.achieved_tol == 0.0


def test_accuracy_preconditions(p1, p4):
    with pytest.raises(ValueError):
        inner_value(p1, [0.0], -1.0)
    with pytest.raises(ValueError):
        inner_value(p1, [0.0], 0.0, use_exact=False)
    with pytest.raises(NoOracle, match="no upper-level objective"):
        inner_value(p4, [0.0], 1e-6)


def test_unbounded_inner_problem_is_detected(p1):
    ray = ProblemSpec(
        name="ray",
        m=1,
        n=2,
        upper_fn=lambda x, y: y[0],
        lower_fn=p1.lower_fn,
        mode=Mode.PESSIMISTIC,
        constants=ConstantsBundle(1.0, 0.0, 3.0, 0.0, 0.5, ((-1.0, 1.0),)),
        descriptor=p1.descriptor,
    )
    with pytest.raises(UnboundedInner):
        inner_value(ray, [0.0], 1e-6)


def test_argopt_witness_attains_value(p2):
    result = inner_argopt(p2, [1.2], 1e-9)
    assert p2.descriptor.contains(np.array([1.2]), result.witness_y)
    assert 1.2 * result.witness_y[0] == pytest.approx(result.value, abs=1e-9)


def test_argopt_on_singleton(p3):
    result = inner_argopt(p3, [0.25], 1e-9)
    np.testing.assert_allclose(result.witness_y, [0.25, 1.0])
    assert result.value == pytest.approx(-1.25)


def test_hyper_oracle_counts_and_accuracy(p1):
    exact = HyperOracle(p1)
    assert exact.w == 0.0
    assert exact([0.5]) == 1.5
    assert exact([1.5]) == 2.5
    assert exact.calls == 2

    searched = HyperOracle(replace(p1, exact_hyper={}))
    assert searched.w == 1e-10
    assert searched([0.5]) == pytest.approx(1.5, abs=1e-10)
    assert searched.with_accuracy(1e-6).w == 1e-6
