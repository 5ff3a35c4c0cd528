"""Space model: closed-form norms against brute-force partial sums, projections,
metric axioms as properties."""

import math

import hypothesis.strategies as st
import numpy as np
import pytest
from hypothesis import given

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
    tail_norm,
)

CANON = BasisSpec.canonical()
L2 = MetricKind.L2
SUP = MetricKind.SUP_PARTIAL_SUM

# x_i = 2^{-(i-1)}: the running geometric example
GEO = Element.geometric(1.0, 0.5)


def brute_force_coeffs(x: Element, count: int) -> np.ndarray:
    return np.array([x.coefficient(i) for i in range(1, count + 1)])


def brute_force_norm(x: Element, basis: BasisSpec, count: int = 600) -> float:
    """Independent oracle: materialize `count` ambient coordinates and sum.

    For |ratio| <= 0.9 the discarded remainder is below 0.9**600 ~ 1e-27.
    """
    coeffs = brute_force_coeffs(x, count)
    weights = np.array([basis.weight_at(i) for i in range(1, count + 1)])
    return float(np.sqrt(np.sum((coeffs * weights) ** 2)))


finite_elements = st.lists(
    st.floats(min_value=-10, max_value=10), min_size=0, max_size=6).map(
    lambda cs: Element(tuple(cs)))

geometric_elements = st.tuples(
    st.lists(st.floats(min_value=-10, max_value=10), min_size=0, max_size=4),
    st.floats(min_value=-5, max_value=5),
    st.floats(min_value=-0.9, max_value=0.9)).map(
    lambda t: Element(tuple(t[0]), TailSpec.geometric(t[1], t[2])))

elements = st.one_of(finite_elements, geometric_elements)

scalars = st.floats(min_value=-8, max_value=8)


class TestExamples:
    def test_norm_geometric_closed_form(self):
        assert norm(GEO, CANON, L2) == pytest.approx(math.sqrt(4.0 / 3.0), abs=1e-15)
        assert norm(GEO, CANON, L2) == pytest.approx(1.1547005383792515, abs=1e-15)

    def test_norm_zero_element(self):
        assert norm(Element.zero(), CANON, L2) == 0.0
        assert norm(Element.zero(), CANON, SUP) == 0.0

    def test_tail_norm_geometric(self):
        assert tail_norm(GEO, 2, CANON, L2) == pytest.approx(math.sqrt(1.0 / 12.0), abs=1e-15)

    def test_tail_norm_trivial_cases(self):
        finite = Element.from_coeffs((1.0, 2.0, 3.0))
        assert tail_norm(finite, 3, CANON, L2) == 0.0
        assert tail_norm(finite, 7, CANON, L2) == 0.0
        assert tail_norm(GEO, 0, CANON, L2) == norm(GEO, CANON, L2)

    def test_project_expands_tail(self):
        p = project(GEO, 2)
        assert p.coeffs == (1.0, 0.5)
        assert p.tail.is_zero

    def test_project_conventions(self):
        assert project(GEO, 0) == Element.zero()
        finite = Element.from_coeffs((1.0, 2.0))
        assert project(finite, 5).coeffs[:2] == (1.0, 2.0)
        assert norm(project(finite, 5) - finite, CANON, L2) == 0.0

    def test_project_idempotent(self):
        assert project(project(GEO, 4), 4) == project(GEO, 4)

    def test_distance_examples(self):
        assert distance(GEO, GEO, CANON, L2) == 0.0
        assert distance(Element.unit(1), Element.zero(), CANON, L2) == 1.0
        a = Element.from_coeffs((1.0, 0.5))
        b = Element.from_coeffs((0.0, 0.5))
        assert distance(a, b, CANON, L2) == 1.0

    def test_distance_mixed_ratio_tails_vs_brute_force(self):
        x = Element((1.0,), TailSpec.geometric(2.0, 0.5))
        y = Element((), TailSpec.geometric(-1.5, -0.7))
        expected = brute_force_norm(x - y, CANON)
        assert distance(x, y, CANON, L2) == pytest.approx(expected, rel=1e-13)

    def test_weighted_norm_vs_brute_force(self):
        basis = BasisSpec.weighted((2.0, 1.5), (1.0, 0.9))
        for x in (GEO, Element.from_coeffs((1.0, -2.0, 3.0)),
                  Element((0.5,), TailSpec.geometric(-1.0, 0.8))):
            assert norm(x, basis, L2) == pytest.approx(brute_force_norm(x, basis), rel=1e-13)

    def test_geometric_tail_ratio_rejected(self):
        with pytest.raises(ValueError):
            TailSpec.geometric(1.0, 1.0)
        with pytest.raises(ValueError):
            TailSpec.geometric(1.0, -1.2)

    def test_basis_constant_canonical_exact(self):
        assert abs(basis_constant_estimate(CANON, 1000, 16, seed=2024) - 1.0) <= 1e-12

    def test_basis_constant_weighted(self):
        weighted = BasisSpec.weighted((2.0, 1.5), (1.0, 0.9))
        estimate = basis_constant_estimate(weighted, 400, 16, seed=7)
        assert estimate >= 1.0 - 1e-12
        assert estimate <= weighted.basis_constant + 1e-9

    def test_basis_constant_unit_weights_reduce_to_canonical(self):
        unit = BasisSpec.weighted((), (1.0, 1.0))
        assert abs(basis_constant_estimate(unit, 400, 16, seed=7) - 1.0) <= 1e-12

    def test_serialization_round_trip(self):
        for x in (GEO, Element.zero(), Element.from_coeffs((1.0, -2.0)),
                  Element((1.0,), TailSpec(((2.0, 0.5), (-1.0, -0.25))))):
            assert Element.from_dict(x.to_dict()) == x
        for basis in (CANON, BasisSpec.weighted((2.0,), (0.5, 0.9))):
            assert BasisSpec.from_dict(basis.to_dict()) == basis
        assert MetricKind.from_name("l2") is L2
        assert MetricKind.from_name("sup_partial_sum") is SUP
        with pytest.raises(ValueError):
            MetricKind.from_name("l1")


class TestBruteForceAgreement:
    def test_norm_family(self):
        family = [
            GEO,
            Element.from_coeffs((3.0, -1.0, 0.5)),
            Element((1.0, -2.0), TailSpec.geometric(1.5, -0.8)),
            Element((), TailSpec(((1.0, 0.5), (2.0, -0.3)))),
        ]
        for x in family:
            assert norm(x, CANON, L2) == pytest.approx(brute_force_norm(x, CANON), rel=1e-13)

    def test_tail_norm_family(self):
        for m in (0, 1, 3, 10):
            coeffs = brute_force_coeffs(GEO, 600)
            expected = float(np.sqrt(np.sum(coeffs[m:] ** 2)))
            assert tail_norm(GEO, m, CANON, L2) == pytest.approx(expected, rel=1e-13)


class TestProperties:
    @given(elements, elements, scalars, scalars, st.integers(min_value=0, max_value=12))
    def test_projection_linear(self, x, y, alpha, beta, m):
        lhs = project(alpha * x + beta * y, m)
        rhs = alpha * project(x, m) + beta * project(y, m)
        assert distance(lhs, rhs, CANON, L2) <= 1e-12

    @given(elements, scalars)
    def test_norm_homogeneous(self, x, alpha):
        n = norm(x, CANON, L2)
        assert norm(alpha * x, CANON, L2) == pytest.approx(abs(alpha) * n,
                                                           rel=1e-12, abs=1e-12)

    @given(elements, elements, elements)
    def test_translation_invariant(self, x, y, w):
        base = distance(x, y, CANON, L2)
        shifted = distance(x + w, y + w, CANON, L2)
        assert shifted == pytest.approx(base, rel=1e-9, abs=1e-12)

    @given(elements, elements, elements)
    def test_triangle_inequality(self, x, y, z):
        assert distance(x, z, CANON, L2) <= \
            distance(x, y, CANON, L2) + distance(y, z, CANON, L2) + 1e-12

    @given(geometric_elements)
    def test_tail_norm_vanishes(self, x):
        values = [tail_norm(x, m, CANON, L2) for m in (0, 2, 4, 8, 16, 32, 64)]
        assert all(a >= b - 1e-15 for a, b in zip(values, values[1:]))
        # single geometric tail: tail_norm(m) = |r|**(m - L) * tail_norm(L)
        ratio = abs(x.tail.terms[0][1]) if x.tail.terms else 0.0
        L = x.prefix_len
        bound = ratio ** max(0, 64 - L) * (tail_norm(x, L, CANON, L2) + 1e-30)
        assert values[-1] <= bound * (1 + 1e-12)

    def test_tail_norm_ratio_limit(self):
        # for a single geometric tail the successive-tail ratio is exactly |ratio|
        x = Element((), TailSpec.geometric(2.0, -0.6))
        for m in (3, 6, 12):
            ratio = tail_norm(x, m + 1, CANON, L2) / tail_norm(x, m, CANON, L2)
            assert ratio == pytest.approx(0.6, rel=1e-12)

    @given(elements)
    def test_sup_partial_sum_matches_l2(self, x):
        # coordinate bases have nondecreasing partial-sum magnitudes
        assert norm(x, CANON, SUP) == pytest.approx(norm(x, CANON, L2),
                                                    rel=1e-12, abs=1e-15)

    @given(elements, st.integers(min_value=0, max_value=20))
    def test_tail_norm_is_distance_to_projection(self, x, m):
        direct = tail_norm(x, m, CANON, L2)
        via_subtraction = distance(x, project(x, m), CANON, L2)
        assert direct == pytest.approx(via_subtraction, rel=1e-10, abs=1e-13)


def test_random_elements_deterministic():
    a = random_elements(20, seed=5)
    b = random_elements(20, seed=5)
    assert a == b
