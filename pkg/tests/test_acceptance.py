"""Acceptance suite: every criterion at its stated tolerance, one line each.

Run as ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
pass lines; each test also enforces its runtime budget where one is stated.
"""

import json
import math
import time
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from truncpicard import bounds
from truncpicard.delay_ode import check_strip_contraction, check_truncation_m1, integrate
from truncpicard.iteration import solve_fixed_point
from truncpicard.operators import (
    AffineOperator,
    ContractionClass,
    DiagonalOperator,
    apply,
    exact_fixed_point,
    iterate,
)
from truncpicard.presets import (
    curated_contractive_instances,
    reference_delay_scenario,
    undelayed_delay_scenario,
)
from truncpicard.scenario import run_scenario
from truncpicard.space import (
    BasisSpec,
    Element,
    MetricKind,
    TailSpec,
    basis_constant_estimate,
    distance,
    norm,
    project,
    random_elements,
)

CANON = BasisSpec.canonical()
L2 = MetricKind.L2
SUP = MetricKind.SUP_PARTIAL_SUM
SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"


def _report(number: int, description: str) -> None:
    print(f"ACCEPTANCE {number:02d} PASS  {description}")


def _random_geometric_element(rng) -> Element:
    prefix = tuple(rng.standard_normal(int(rng.integers(0, 4))))
    amplitude = float(rng.uniform(0.5, 2.0) * rng.choice((-1.0, 1.0)))
    ratio = float(rng.uniform(0.1, 0.9) * rng.choice((-1.0, 1.0)))
    return Element(prefix, TailSpec.geometric(amplitude, ratio))


def _random_diagonal(rng, sup_cap: float) -> DiagonalOperator:
    count = int(rng.integers(0, 5))
    prefix = tuple(rng.uniform(-sup_cap, sup_cap, size=count))
    if rng.random() < 0.5:
        tail = ("constant", float(rng.uniform(-sup_cap, sup_cap)))
    else:
        tail = ("geometric", float(rng.uniform(-sup_cap, sup_cap)),
                float(rng.uniform(-0.9, 0.9)))
    probe = DiagonalOperator(prefix, tail, ContractionClass.nonexpansive())
    sup = probe.sup_multiplier()
    klass = ContractionClass.contractive(sup) if sup < 1 else ContractionClass.nonexpansive()
    return DiagonalOperator(prefix, tail, klass)


def _random_affine(rng, rate_cap: float, block: int) -> AffineOperator:
    raw = rng.standard_normal((block, block))
    target = float(rng.uniform(0.3, rate_cap))
    matrix = raw * (target / float(np.linalg.norm(raw, 2)))
    gamma = float(rng.uniform(0.0, target))
    b = tuple(rng.standard_normal(block))
    offset = Element(b)
    offset = offset.scaled(1.0 / max(1.0, norm(offset, CANON, L2)))
    rate = max(float(np.linalg.norm(matrix, 2)), abs(gamma))
    return AffineOperator(matrix, gamma, offset, ContractionClass.contractive(rate))


def test_criterion_01_prop21_commutation():
    started = time.perf_counter()
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(100):
        x = _random_geometric_element(rng)
        T = _random_diagonal(rng, sup_cap=0.95)
        check = bounds.check_prop21(T, x, n=20, m=64)
        assert check.hypothesis_met and check.passed
        worst = max(worst, check.lhs)
    assert worst <= 1e-12
    elapsed = time.perf_counter() - started
    assert elapsed < 5.0
    _report(1, f"coordinatewise commutation discrepancy {worst:.2e} <= 1e-12 "
               f"on 100 instances (n=20, m=64) in {elapsed:.2f}s")


def test_criterion_02_monotone_basis():
    samples = random_elements(1000, seed=202, max_support=16)
    rng = np.random.default_rng(203)
    estimate = 0.0
    for x in samples:
        denominator = norm(x, CANON, L2)
        orders = {int(rng.integers(1, 17)), 16, max(1, min(x.prefix_len, 16))}
        for m in orders:
            estimate = max(estimate, norm(project(x, m), CANON, L2) / denominator)
    assert abs(estimate - 1.0) <= 1e-12
    official = basis_constant_estimate(CANON, 1000, 16, seed=202)
    assert abs(official - 1.0) <= 1e-12
    worst_gap = max(abs(norm(x, CANON, SUP) - norm(x, CANON, L2)) for x in samples)
    assert worst_gap <= 1e-12
    _report(2, f"canonical projection bound {estimate!r}, sup-partial-sum vs "
               f"l2 gap {worst_gap:.2e} over 1000 samples")


def test_criterion_03_four_epsilon_ball():
    started = time.perf_counter()
    epsilon = 1e-3
    rng = np.random.default_rng(303)
    domain = []
    for x in random_elements(100, seed=304, max_support=6, max_ratio=0.8):
        domain.append(x.scaled(1.0 / max(1.0, norm(x, CANON, L2))))
    operators = [DiagonalOperator.constant(0.5)]
    operators += [_random_affine(rng, rate_cap=0.9, block=int(rng.integers(1, 4)))
                  for _ in range(10)]
    worst = 0.0
    for T in operators:
        result = solve_fixed_point(T, domain[0], epsilon, domain, CANON, L2)
        assert result.certificate.passed
        z = exact_fixed_point(T).z
        n_bar, m_bar = result.params.n_bar, result.params.m_bar
        orders = sorted({n_bar, n_bar + 1, n_bar + 3, n_bar + 5,
                         n_bar + 10, n_bar + 20})
        for x in domain:
            iterates = {}
            current, level = iterate(T, x, orders[0]), orders[0]
            iterates[level] = current
            for n in orders[1:]:
                current = iterate(T, current, n - level)
                level = n
                iterates[n] = current
            for n in orders:
                ahead = apply(T, iterates[n])
                for m in orders:
                    worst = max(worst, distance(project(ahead, m), z, CANON, L2))
        assert m_bar >= 1 and n_bar >= m_bar
    assert worst <= 4.0 * epsilon
    elapsed = time.perf_counter() - started
    assert elapsed < 30.0
    _report(3, f"max d([T^(n+1)x]_m, z) = {worst:.2e} <= 4e-3 over 11 operators x "
               f"100 samples in {elapsed:.1f}s")


def test_criterion_04_thm32_main_bound():
    started = time.perf_counter()
    rng = np.random.default_rng(404)
    m_values = list(range(1, 65))
    worst_slack = math.inf
    for index in range(50):
        if index % 2 == 0:
            T = _random_diagonal(rng, sup_cap=0.95)
            if T.klass.kind != "contractive":
                T = DiagonalOperator(T.multipliers, T.multiplier_tail,
                                     ContractionClass.contractive(
                                         min(T.sup_multiplier(), 0.95)))
        else:
            T = _random_affine(rng, rate_cap=0.9, block=int(rng.integers(1, 4)))
        x = _random_geometric_element(rng)
        y = _random_geometric_element(rng)
        check = bounds.check_thm32_bound_grid(T, x, y, 30, m_values, CANON, L2)
        assert check.passed, check.context
        worst_slack = min(worst_slack, check.slack)
    assert worst_slack >= -1e-9
    elapsed = time.perf_counter() - started
    assert elapsed < 60.0
    _report(4, f"worst slack {worst_slack:.2e} >= -1e-9 over 50 instances, "
               f"n <= 30, m <= 64, in {elapsed:.1f}s")


def test_criterion_05_thm32_limit_display():
    worst = 0.0
    for name, T, x, _ in curated_contractive_instances():
        top = iterate(T, x, 60)
        value = distance(project(top, 60), project(apply(T, top), 60), CANON, L2)
        assert value <= 1e-8, name
        worst = max(worst, value)
    _report(5, f"diagonal-horizon step distance at n=m=60 is {worst:.2e} <= 1e-8 "
               f"on all curated instances")


def test_criterion_06_prop23_coincidence():
    rng = np.random.default_rng(606)
    worst = 0.0
    for _ in range(20):
        block = int(rng.integers(1, 5))
        T = _random_affine(rng, rate_cap=0.8, block=block)
        m = block + int(rng.integers(0, 4))
        check = bounds.check_prop23(T, m, CANON, L2)
        assert check.hypothesis_met and check.passed
        worst = max(worst, check.lhs)
    assert worst <= 1e-10
    _report(6, f"restricted vs global fixed-point distance {worst:.2e} <= 1e-10 "
               f"on 20 block instances")


def test_criterion_07_constants_behavior():
    rng = np.random.default_rng(707)
    for _ in range(30):
        prefix = tuple(rng.standard_normal(int(rng.integers(0, 4))))
        ratio = float(rng.uniform(0.2, 0.9) * rng.choice((-1.0, 1.0)))
        first = float(rng.uniform(0.5, 2.0) * rng.choice((-1.0, 1.0)))
        x = Element.geometric(first, ratio, prefix=prefix)
        m_star = math.ceil(math.log(1e-6) / math.log(abs(ratio))) + x.prefix_len
        for m in (m_star, m_star + 4):
            report = bounds.constants(x, Element.zero(), m, CANON, L2)
            assert report.c1_xm <= 1e-6
        for m in (1, 3, 8):
            report = bounds.constants(x, Element.zero(), m, CANON, L2)
            n = norm(x, CANON, L2)
            scale = max(1.0, n)
            assert abs(norm(project(x, m), CANON, L2) - report.c_xm * n) <= 1e-12 * scale
            assert abs(bounds.tail_norm(x, m, CANON, L2)
                       - report.c1_xm * (1.0 + report.c_xm) * n) <= 1e-12 * scale
    _report(7, "C1 vanishing schedule and equality-by-construction identities hold")


def test_criterion_08_delay_reference():
    started = time.perf_counter()
    scenario = reference_delay_scenario()
    trace = integrate(scenario)
    sups = trace.strip_sups
    assert all(sups[n + 1] < sups[n] for n in range(2, len(sups) - 1))
    contraction = check_strip_contraction(trace, scenario)
    assert contraction.passed and contraction.lhs < 1.0
    half = integrate(replace(scenario, dt=scenario.dt / 2))
    assert abs(trace.y[-1]) < 1e-6
    assert abs(trace.y[-1] - half.y[-1]) < 1e-6
    truncation = check_truncation_m1(trace, scenario)
    assert truncation.passed
    assert truncation.context["closed_form_discrepancy"] <= 1e-12
    undelayed = integrate(undelayed_delay_scenario())
    k2 = round(2.0 / undelayed.dt)
    assert abs(undelayed.y[k2] - math.exp(-2.0)) < 1e-6
    residual = abs(trace.y[-1] - trace.truncation_m1[-1])
    assert residual < 1e-6
    elapsed = time.perf_counter() - started
    assert elapsed < 20.0
    _report(8, f"strips decay (rho={contraction.lhs:.3f}), |y(40)|={abs(trace.y[-1]):.1e}, "
               f"residual {residual:.1e}, all < 1e-6, in {elapsed:.1f}s")


def test_criterion_09_thm22_ii_finder():
    rng = np.random.default_rng(909)
    operators = [DiagonalOperator((1.0, -1.0, 0.9), ("constant", 0.8),
                                  ContractionClass.nonexpansive())]
    for _ in range(4):
        count = int(rng.integers(1, 5))
        prefix = (1.0,) + tuple(rng.uniform(-1.0, 1.0, size=count))
        tail = ("constant", float(rng.uniform(-1.0, 1.0)))
        operators.append(DiagonalOperator(prefix, tail, ContractionClass.nonexpansive()))
    elements = [Element.unit(1), Element.geometric(1.0, 0.5),
                _random_geometric_element(rng)]
    for T in operators:
        for x in elements:
            for k in (1, 2):
                check = bounds.check_thm22_ii(T, x, k, 1e-2, CANON, L2,
                                              n_max=48, m_max=48)
                assert check.passed, (T, k)
                assert check.context["n0"] >= 1 and check.context["m0"] >= 1
    _report(9, "finite (n0, m0) found and the (1+eps) d(x, T^k x) + eps bound "
               "holds beyond them for all nonexpansive instances, k in {1, 2}")


def test_criterion_10_end_to_end_determinism():
    files = sorted(SCENARIO_DIR.glob("*.json"))
    assert files, "shipped scenario files missing"
    for path in files:
        doc = json.loads(path.read_text())
        first = run_scenario(doc)
        second = run_scenario(doc)
        assert first.artifacts == second.artifacts, path.name
        for (_, content_a), (_, content_b) in zip(first.artifacts, second.artifacts):
            assert content_a.encode() == content_b.encode()
    _report(10, f"byte-identical reports across re-runs of {len(files)} scenario files")
