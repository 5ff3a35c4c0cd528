"""Quantitative checks: explicit constants and per-claim inequality records.

Each check evaluates one verifiable conclusion on concrete operators and
elements and returns a :class:`BoundCheck` (left side, right side, slack,
pass flag, probe context).  Limit statements are verified through finite
horizons: the surrogate for a limsup is the maximum over the final quarter of
the probe range, with the horizon recorded in the context.  Two of the
checked limit statements admit more than one reading; the one implemented is
stamped into each emitted record via ``interpretation``:

* the vanishing-coefficient claim is read as the magnitude of the m-th
  coefficient of (T^{n+k} x - T^n x), scaled by ||e_m||;
* the step-distance claim is read as d([T^{n+k} x]_m, [T^n x]_m) -> 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .operators import (
    ClassMismatchError,
    OperatorSpec,
    AffineOperator,
    ComponentwiseOperator,
    DiagonalOperator,
    apply,
    commutes_with_truncation,
    exact_fixed_point,
    iterate,
)
from .space import BasisSpec, Element, MetricKind, distance, norm, project, tail_norm

__all__ = [
    "BoundCheck",
    "ConstantsReport",
    "Thm32EmpiricalConstants",
    "constants",
    "check_prop21",
    "check_thm22_i",
    "check_thm22_ii",
    "check_thm22_iii",
    "check_thm31_ii",
    "check_thm31_iii",
    "check_thm32_bound",
    "check_thm32_bound_grid",
    "check_thm32_ratios",
    "check_thm32_subset",
    "check_prop23",
]

DEFAULT_TOLERANCE = 1e-9

INTERP_COEFFICIENT = "m-th coefficient reading: |(T^{n+k}x - T^n x)_m| * ||e_m||"
INTERP_STEP_DISTANCE = "step-distance reading: d([T^{n+k}x]_m, [T^n x]_m)"
INTERP_PRODUCT_CONSTANT = "empirical K*eps treated as a single product (eps factor fixed to 1)"


@dataclass(frozen=True)
class BoundCheck:
    """One verified inequality lhs <= rhs (+ tolerance).

    ``hypothesis_met=False`` marks a vacuous record: the check's premise did
    not hold, which is reported as met-with-no-content rather than failure.
    """

    name: str
    lhs: float
    rhs: float
    slack: float
    passed: bool
    hypothesis_met: bool = True
    tolerance: float = DEFAULT_TOLERANCE
    context: dict = field(default_factory=dict)
    interpretation: str | None = None

    def to_dict(self) -> dict:
        data = {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "pass": self.passed,
            "hypothesis_met": self.hypothesis_met,
            "tolerance": self.tolerance,
            "context": self.context,
        }
        if self.interpretation:
            data["interpretation"] = self.interpretation
        return data


def make_check(name: str, lhs: float, rhs: float, *, tolerance: float = DEFAULT_TOLERANCE,
               context: dict | None = None, interpretation: str | None = None,
               require: bool = True) -> BoundCheck:
    slack = rhs - lhs
    return BoundCheck(name, lhs, rhs, slack, passed=bool(require and slack >= -tolerance),
                      tolerance=tolerance, context=context or {},
                      interpretation=interpretation)


def hypothesis_unmet(name: str, reason: str, context: dict | None = None) -> BoundCheck:
    ctx = dict(context or {})
    ctx["hypothesis"] = reason
    return BoundCheck(name, 0.0, 0.0, 0.0, passed=True, hypothesis_met=False, context=ctx)


@dataclass(frozen=True)
class ConstantsReport:
    """Minimal feasible projection/tail constants at truncation order m."""

    c_xm: float
    c1_xm: float
    g_xm: float
    m: int


@dataclass(frozen=True)
class Thm32EmpiricalConstants:
    """Measured bounded-subset constants; the product is what the bound uses."""

    k_bar_mE: float
    eps_bar_mE: float
    subset_tag: str
    m: int


def _c_c1(x: Element, m: int, basis: BasisSpec, metric: MetricKind) -> tuple[float, float]:
    norm_x = norm(x, basis, metric)
    if norm_x <= 0.0:
        return 0.0, 0.0
    c = norm(project(x, m), basis, metric) / norm_x
    c1 = tail_norm(x, m, basis, metric) / ((1.0 + c) * norm_x)
    return c, c1


def _abs_weighted_tail(x: Element, m: int, basis: BasisSpec) -> float:
    """sum_{i > m} |x_i| ||e_i||; exact for single-term tails, a per-term
    triangle bound for sum tails."""
    weight_tail = (1.0, 1.0) if basis.kind == "canonical" else basis.weight_tail
    cutoff = max(m, x.prefix_len,
                 len(basis.weights) if basis.kind == "weighted" else 0)
    total = sum(abs(x.coefficient(i)) * basis.weight_at(i) for i in range(m + 1, cutoff + 1))
    a_w, r_w = weight_tail
    for a, r in x.tail.terms:
        q = abs(r) * r_w
        total += abs(a) * a_w * q ** (cutoff + 1) / (1.0 - q)
    return total


def constants(x: Element, y: Element, m: int, basis: BasisSpec,
              metric: MetricKind) -> ConstantsReport:
    """Projection constant, tail constant and the joint absolute tail sum.

    The constants are the minimal feasible ones: ||[x]_m|| = c_xm ||x|| and
    ||x - [x]_m|| = c1_xm (1 + c_xm) ||x|| hold with equality by construction;
    a zero element reports zeros by convention.
    """
    c, c1 = _c_c1(x, m, basis, metric)
    g = _abs_weighted_tail(x, m, basis) + _abs_weighted_tail(y, m, basis)
    return ConstantsReport(c_xm=c, c1_xm=c1, g_xm=g, m=m)


def check_prop21(T: OperatorSpec, x: Element, n: int, m: int) -> BoundCheck:
    """Coordinatewise commutation of iterates with truncation (exact claim)."""
    context = {"n": n, "m": m}
    if not commutes_with_truncation(T, x, m):
        return hypothesis_unmet("prop21", "operator does not commute with truncation "
                                          "on the first m coordinates", context)
    canonical, l2 = BasisSpec.canonical(), MetricKind.L2
    image = iterate(T, x, n)
    worst = 0.0
    for i in range(1, m + 1):
        lhs_elem = iterate(T, Element.unit(i, x.coefficient(i)), n)
        rhs_elem = Element.unit(i, image.coefficient(i))
        worst = max(worst, distance(lhs_elem, rhs_elem, canonical, l2))
    return make_check("prop21", worst, 0.0, tolerance=1e-12, context=context)


def check_thm22_i(T: OperatorSpec, x: Element, k: int, n: int, m_values: list[int],
                  basis: BasisSpec | None = None, limit_tol: float = 1e-8) -> BoundCheck:
    """Vanishing m-th coefficient of T^{n+k}x - T^n x along increasing m."""
    if not T.klass.is_asymptotically_nonexpansive:
        return hypothesis_unmet("thm22_i", "requires an asymptotically nonexpansive class")
    basis = basis or BasisSpec.canonical()
    diff = iterate(T, x, n + k) - iterate(T, x, n)
    series = [abs(diff.coefficient(m)) * basis.weight_at(m) for m in m_values]
    return make_check("thm22_i", series[-1], limit_tol, tolerance=0.0,
                      context={"n": n, "k": k, "m_values": list(m_values), "series": series},
                      interpretation=INTERP_COEFFICIENT)


def _suffix_max(grid: list[list[float]]) -> list[list[float]]:
    """suffix_max[i][j] = max of grid[i:][j:] (reverse running maximum)."""
    rows, cols = len(grid), len(grid[0])
    out = [[0.0] * cols for _ in range(rows)]
    for i in range(rows - 1, -1, -1):
        for j in range(cols - 1, -1, -1):
            best = grid[i][j]
            if i + 1 < rows:
                best = max(best, out[i + 1][j])
            if j + 1 < cols:
                best = max(best, out[i][j + 1])
            out[i][j] = best
    return out


def check_thm22_ii(T: OperatorSpec, x: Element, k: int, epsilon: float,
                   basis: BasisSpec, metric: MetricKind,
                   n_max: int = 96, m_max: int = 96) -> BoundCheck:
    """Find (n0, m0) past which d([T^{n+k}x]_m, [T^n x]_m) <= (1+eps) d(x, T^k x) + eps."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if not T.klass.is_asymptotically_nonexpansive:
        return hypothesis_unmet("thm22_ii", "requires an asymptotically nonexpansive class")
    iterates = [x]
    for _ in range(n_max + k):
        iterates.append(apply(T, iterates[-1]))
    d_base = distance(x, iterates[k], basis, metric)
    rhs = (1.0 + epsilon) * d_base + epsilon
    grid = [[distance(project(iterates[n + k], m), project(iterates[n], m), basis, metric)
             for m in range(1, m_max + 1)] for n in range(1, n_max + 1)]
    worst = _suffix_max(grid)
    found = None
    for n0 in range(1, n_max + 1):
        row = worst[n0 - 1]
        for m0 in range(1, m_max + 1):
            if row[m0 - 1] <= rhs + DEFAULT_TOLERANCE:
                found = (n0, m0)
                break
        if found:
            break
    q_n, q_m = 3 * n_max // 4, 3 * m_max // 4
    surrogate = max(grid[n][m] - d_base for n in range(q_n, n_max) for m in range(q_m, m_max))
    if found is None:
        return make_check("thm22_ii", worst[0][0], rhs,
                          context={"k": k, "epsilon": epsilon, "n_max": n_max, "m_max": m_max,
                                   "diagnostic": "no (n0, m0) within the probe horizon",
                                   "limsup_surrogate": surrogate},
                          require=False)
    n0, m0 = found
    return make_check("thm22_ii", worst[n0 - 1][m0 - 1], rhs,
                      context={"k": k, "epsilon": epsilon, "n0": n0, "m0": m0,
                               "n_max": n_max, "m_max": m_max,
                               "limsup_surrogate": surrogate},
                      require=surrogate <= DEFAULT_TOLERANCE)


def check_thm22_iii(T: OperatorSpec, x: Element, k: int, basis: BasisSpec,
                    metric: MetricKind, horizon: int = 60,
                    limit_tol: float = 1e-8) -> BoundCheck:
    """Truncated iterate step distance vanishing at the top of the horizon."""
    if not T.klass.is_asymptotically_contractive:
        return hypothesis_unmet("thm22_iii", "requires an asymptotically contractive class")
    top = iterate(T, x, horizon)
    ahead = iterate(T, top, k)
    lhs = distance(project(ahead, horizon), project(top, horizon), basis, metric)
    return make_check("thm22_iii", lhs, limit_tol, tolerance=0.0,
                      context={"k": k, "horizon": horizon},
                      interpretation=INTERP_STEP_DISTANCE)


def check_thm31_ii(T: OperatorSpec, domain_samples: list[Element], epsilon: float,
                   basis: BasisSpec, metric: MetricKind, window: int = 6,
                   n_probe_max: int = 200, m_probe_max: int = 4096,
                   domain_norm_bound: float | None = None) -> list[BoundCheck]:
    """Uniform epsilon / epsilon / 2 epsilon inequalities past a common m-bar."""
    from .iteration import select_adaptive_params  # local import: sibling module cycle

    if not T.klass.is_asymptotically_contractive:
        return [hypothesis_unmet("thm31_ii", "requires an asymptotically contractive class")]
    params = select_adaptive_params(T, domain_samples, epsilon, basis, metric,
                                    n_probe_max=n_probe_max, m_probe_max=m_probe_max,
                                    domain_norm_bound=domain_norm_bound)
    m_bar = params.n_bar  # single threshold covering both tail and contraction orders
    top = m_bar + window
    iterates = {id(x): [x] for x in domain_samples}
    for x in domain_samples:
        seq = iterates[id(x)]
        for _ in range(top):
            seq.append(apply(T, seq[-1]))
    worst_pair = worst_full = worst_tail = 0.0
    samples = list(domain_samples)
    for a in range(len(samples)):
        for b in range(a + 1, len(samples)):
            for n in range(m_bar, top + 1):
                xa, xb = iterates[id(samples[a])][n], iterates[id(samples[b])][n]
                worst_full = max(worst_full, distance(xa, xb, basis, metric))
                for m in range(m_bar, top + 1):
                    worst_pair = max(worst_pair, distance(project(xa, m), project(xb, m),
                                                          basis, metric))
    for x in samples:
        for n in range(m_bar, top + 1):
            for m in range(m_bar, top + 1):
                worst_tail = max(worst_tail, tail_norm(iterates[id(x)][n], m, basis, metric))
    context = {"epsilon": epsilon, "m_bar": m_bar, "window": window,
               "samples": len(samples), "domain_norm_bound": params.domain_norm_bound}
    return [
        make_check("thm31_ii_trunc_pair", worst_pair, epsilon, context=context),
        make_check("thm31_ii_full_pair", worst_full, epsilon, context=context),
        make_check("thm31_ii_trunc_vs_full", worst_tail, 2.0 * epsilon, context=context),
    ]


def check_thm31_iii(T: OperatorSpec, domain_samples: list[Element], epsilon: float,
                    basis: BasisSpec, metric: MetricKind, window: int = 5,
                    n_probe_max: int = 200, m_probe_max: int = 4096,
                    domain_norm_bound: float | None = None) -> BoundCheck:
    """Membership of [T^{n+1} x]_m in the closed 4-epsilon ball around z."""
    from .iteration import select_adaptive_params  # local import: sibling module cycle

    if not T.klass.is_asymptotically_contractive:
        return hypothesis_unmet("thm31_iii", "requires an asymptotically contractive class")
    z = exact_fixed_point(T).z
    params = select_adaptive_params(T, domain_samples, epsilon, basis, metric,
                                    n_probe_max=n_probe_max, m_probe_max=m_probe_max,
                                    domain_norm_bound=domain_norm_bound)
    n_bar = params.n_bar
    # probe the window corner plus a sparse diagonal; the distance shrinks in
    # both n and m beyond n_bar, so the worst cell sits at the near corner
    orders = sorted({n_bar + d for d in range(window + 1)}
                    | {n_bar + 2 * window, n_bar + 4 * window})
    worst = 0.0
    for x in domain_samples:
        top = iterate(T, x, orders[0])
        seq = {orders[0]: top}
        current, level = top, orders[0]
        for n in orders[1:]:
            current = iterate(T, current, n - level)
            level = n
            seq[n] = current
        for n in orders:
            ahead = apply(T, seq[n])
            for m in orders:
                worst = max(worst, distance(project(ahead, m), z, basis, metric))
    return make_check("thm31_iii", worst, 4.0 * epsilon,
                      context={"epsilon": epsilon, "n_bar": n_bar, "m_bar": params.m_bar,
                               "window": window, "samples": len(domain_samples),
                               "domain_norm_bound": params.domain_norm_bound})


def _require_contractive(T: OperatorSpec) -> float:
    if T.klass.kind != "contractive":
        raise ClassMismatchError("this bound is stated for contractive operators")
    return T.klass.rate


def check_thm32_bound(T: OperatorSpec, x: Element, y: Element, n: int, m: int,
                      basis: BasisSpec, metric: MetricKind) -> BoundCheck:
    """Main explicit bound with the pairwise constants of the difference iterates."""
    K = _require_contractive(T)
    xs, ys = x, y
    sup_term = 0.0
    for _ in range(n + 1):
        c, c1 = _c_c1(xs - ys, m, basis, metric)
        sup_term = max(sup_term, c1 * (1.0 + c))
        xs, ys = apply(T, xs), apply(T, ys)
    lhs = distance(project(iterate(T, x, n), m), project(iterate(T, y, n), m), basis, metric)
    rhs = K**n * (1.0 + sup_term) * distance(x, y, basis, metric)
    return make_check("thm32_bound", lhs, rhs,
                      context={"n": n, "m": m, "K": K, "sup_term": sup_term})


def check_thm32_bound_grid(T: OperatorSpec, x: Element, y: Element, n_max: int,
                           m_values: list[int], basis: BasisSpec,
                           metric: MetricKind) -> BoundCheck:
    """Worst-slack sweep of the main bound over the whole (n, m) grid.

    Same inequality as :func:`check_thm32_bound`, evaluated with shared
    difference iterates so an n_max x |m_values| sweep stays affordable.
    """
    K = _require_contractive(T)
    d0 = distance(x, y, basis, metric)
    xs = [x]
    ys = [y]
    for _ in range(n_max):
        xs.append(apply(T, xs[-1]))
        ys.append(apply(T, ys[-1]))
    diffs = [a - b for a, b in zip(xs, ys)]
    worst_slack = math.inf
    worst_ctx: dict = {}
    for m in m_values:
        sup_term = 0.0
        for n in range(0, n_max + 1):
            c, c1 = _c_c1(diffs[n], m, basis, metric)
            sup_term = max(sup_term, c1 * (1.0 + c))
            lhs = norm(project(diffs[n], m), basis, metric)
            rhs = K**n * (1.0 + sup_term) * d0
            if rhs - lhs < worst_slack:
                worst_slack = rhs - lhs
                worst_ctx = {"n": n, "m": m, "lhs": lhs, "rhs": rhs}
    return make_check("thm32_bound_grid", worst_ctx["lhs"], worst_ctx["rhs"],
                      context={"n_max": n_max, "m_values": list(m_values),
                               "K": K, "worst_cell": worst_ctx})


def check_thm32_ratios(T: OperatorSpec, x: Element, y: Element, basis: BasisSpec,
                       metric: MetricKind, horizon: int = 60) -> list[BoundCheck]:
    """Limsup ratio displays and the vanishing step-distance limit (diagonal probe)."""
    K = _require_contractive(T)
    xs = [x]
    ys = [y]
    for _ in range(horizon + 1):
        xs.append(apply(T, xs[-1]))
        ys.append(apply(T, ys[-1]))
    pair = lambda n, m: distance(project(xs[n], m), project(ys[n], m), basis, metric)
    step = lambda n, m: distance(project(xs[n], m), project(xs[n + 1], m), basis, metric)
    ts = range(1, horizon + 1)
    pair_excess = {t: pair(t, t) - K * pair(t - 1, t) for t in ts}
    step_excess = {t: step(t, t) - K * step(t - 1, t) for t in ts}
    tail_start = 1 + 3 * horizon // 4
    surrogate_pair = max(pair_excess[t] for t in range(tail_start, horizon + 1))
    surrogate_step = max(step_excess[t] for t in range(tail_start, horizon + 1))
    terminal_step = step(horizon, horizon)
    context = {"horizon": horizon, "K": K, "surrogate_window_start": tail_start}
    return [
        make_check("thm32_pair_ratio", surrogate_pair, 0.0, context=context),
        make_check("thm32_step_ratio", surrogate_step, 0.0, context=context),
        make_check("thm32_step_limit", terminal_step, 1e-8, tolerance=0.0, context=context),
    ]


def check_thm32_subset(T: OperatorSpec, subset_samples: list[Element], m: int,
                       basis: BasisSpec, metric: MetricKind, horizon: int = 80,
                       tag: str = "E") -> tuple[BoundCheck, Thm32EmpiricalConstants]:
    """Smallest nonnegative product constant closing the bounded-subset display."""
    K = _require_contractive(T)
    iterates = []
    for x in subset_samples:
        seq = [x]
        for _ in range(horizon):
            seq.append(apply(T, seq[-1]))
        iterates.append(seq)
    tail_start = 1 + 3 * horizon // 4
    excess = 0.0
    for a in range(len(subset_samples)):
        for b in range(a + 1, len(subset_samples)):
            base = distance(project(subset_samples[a], m), project(subset_samples[b], m),
                            basis, metric)
            for n in range(tail_start, horizon + 1):
                d_n = distance(project(iterates[a][n], m), project(iterates[b][n], m),
                               basis, metric)
                excess = max(excess, d_n - base)
    product = max(0.0, excess) * (1.0 - K)
    result = Thm32EmpiricalConstants(k_bar_mE=product, eps_bar_mE=1.0, subset_tag=tag, m=m)
    check = make_check("thm32_subset", excess - product / (1.0 - K), 0.0,
                       context={"m": m, "K": K, "horizon": horizon, "tag": tag,
                                "product_constant": product,
                                "pairs": len(subset_samples) * (len(subset_samples) - 1) // 2},
                       interpretation=INTERP_PRODUCT_CONSTANT)
    return check, result


def _restriction_stays_in_subspace(T: OperatorSpec, m: int) -> bool:
    if isinstance(T, (DiagonalOperator, ComponentwiseOperator)):
        return True
    if isinstance(T, AffineOperator):
        b = T.offset
        if any(b.coefficient(i) != 0.0 for i in range(m + 1, max(b.prefix_len, m) + 1)):
            return False
        m0 = T.block_size
        if m < m0:
            return not T.matrix[m:, :m].any()
        return True
    raise TypeError(f"unknown operator type {type(T).__name__}")


def check_prop23(T: OperatorSpec, m: int, basis: BasisSpec, metric: MetricKind) -> BoundCheck:
    """Fixed point of the restriction to X_m versus the global fixed point."""
    import numpy as np

    if not T.klass.is_asymptotically_contractive:
        raise ClassMismatchError("fixed-point coincidence needs an asymptotically "
                                 "contractive class")
    context = {"m": m}
    if not _restriction_stays_in_subspace(T, m):
        return hypothesis_unmet("prop23", "restriction of T does not map X_m into itself",
                                context)
    if isinstance(T, AffineOperator):
        m0 = T.block_size
        b = T.offset.with_prefix_len(max(m, m0, T.offset.prefix_len))
        p = min(m, m0)
        head = np.linalg.solve(np.eye(p) - T.matrix[:p, :p], np.array(b.coeffs[:p])) \
            if p else np.zeros(0)
        beyond = tuple(c / (1.0 - T.gamma) for c in b.coeffs[m0:m]) if m > m0 else ()
        restricted = Element(tuple(float(v) for v in head) + beyond)
    else:
        # Picard inside X_m from a nonzero start; geometric convergence
        current = project(Element.from_coeffs((1.0,) * m), m)
        for _ in range(100_000):
            nxt = project(apply(T, current), m)
            if distance(nxt, current, basis, metric) <= 1e-15:
                current = nxt
                break
            current = nxt
        restricted = current
    global_z = exact_fixed_point(T).z
    lhs = distance(restricted, global_z, basis, metric)
    return make_check("prop23", lhs, 0.0, tolerance=1e-10, context=context)
