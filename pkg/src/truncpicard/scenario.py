"""Scenario documents: validation, suite execution and report rendering.

A scenario is one self-describing JSON document (``schema_version`` 1):

.. code-block:: text

    {
      "schema_version": 1,
      "name": "...",
      "basis": "canonical" | preset name | inline basis object,
      "metric": "l2" | "sup_partial_sum",
      "operator": preset name | inline operator object,      # optional
      "elements": {"x": {"coeffs": [...], "tail": {...}}, ...},
      "delay": preset name | inline delay object,            # optional
      "suite": [{"check": <name>, ...params}, ...],          # nonempty
      "output": {"dir": "relative/or/absolute"}              # optional
    }

Configuration problems (unknown references, empty suite, class mismatches,
invalid parameters) raise :class:`ConfigError`; a run that completes returns
every emitted :class:`BoundCheck` plus the rendered report artifacts, whose
bytes are a pure function of the document.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from . import bounds
from .bounds import BoundCheck, make_check
from .delay_ode import (
    DelayScenario,
    check_strip_contraction,
    check_truncation_m1,
    integrate,
)
from .iteration import run_grid, solve_fixed_point
from .operators import (
    ClassMismatchError,
    OperatorSpec,
    UnsupportedCompositionError,
    estimate_contraction_constant,
    operator_from_dict,
)
from .presets import basis_preset, delay_preset, operator_preset
from .space import BasisSpec, Element, MetricKind, basis_constant_estimate

__all__ = ["ConfigError", "RunResult", "run_scenario", "render_artifacts"]

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Scenario document cannot be executed as configured."""


@dataclass(frozen=True)
class RunResult:
    name: str
    all_passed: bool
    checks: tuple[BoundCheck, ...]
    artifacts: tuple[tuple[str, str], ...]  # (relative path, file content)
    output_dir: str | None


def _resolve_basis(spec) -> BasisSpec:
    if spec is None:
        return BasisSpec.canonical()
    if isinstance(spec, str):
        try:
            return basis_preset(spec)
        except KeyError as exc:
            raise ConfigError(str(exc)) from None
    if isinstance(spec, dict):
        try:
            return BasisSpec.from_dict(spec)
        except ValueError as exc:
            raise ConfigError(f"bad basis spec: {exc}") from None
    raise ConfigError(f"basis must be a name or object, got {type(spec).__name__}")


def _resolve_operator(spec) -> OperatorSpec:
    if isinstance(spec, str):
        try:
            return operator_preset(spec)
        except KeyError as exc:
            raise ConfigError(str(exc)) from None
    if isinstance(spec, dict):
        try:
            return operator_from_dict(spec)
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"bad operator spec: {exc}") from None
    raise ConfigError(f"operator must be a name or object, got {type(spec).__name__}")


def _resolve_delay(spec) -> DelayScenario:
    if isinstance(spec, str):
        try:
            return delay_preset(spec)
        except KeyError as exc:
            raise ConfigError(str(exc)) from None
    if isinstance(spec, dict):
        try:
            return DelayScenario.from_dict(spec)
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"bad delay scenario: {exc}") from None
    raise ConfigError("delay must be a preset name or object")


class _Runner:
    def __init__(self, doc: dict):
        if not isinstance(doc, dict):
            raise ConfigError("scenario document must be an object")
        if doc.get("schema_version") != SCHEMA_VERSION:
            raise ConfigError(f"schema_version must be {SCHEMA_VERSION}")
        name = doc.get("name")
        if not isinstance(name, str) or not name:
            raise ConfigError("scenario needs a nonempty string name")
        self.name = name
        self.basis = _resolve_basis(doc.get("basis"))
        try:
            self.metric = MetricKind.from_name(doc.get("metric", "l2"))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        self.operator = _resolve_operator(doc["operator"]) if "operator" in doc else None
        self.delay = _resolve_delay(doc["delay"]) if "delay" in doc else None
        self._delay_trace = None
        elements = doc.get("elements", {})
        if not isinstance(elements, dict):
            raise ConfigError("elements must map names to element objects")
        self.elements: dict[str, Element] = {}
        for ename, edata in elements.items():
            try:
                self.elements[ename] = Element.from_dict(edata)
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError(f"bad element {ename!r}: {exc}") from None
        suite = doc.get("suite")
        if not isinstance(suite, list) or not suite:
            raise ConfigError("suite must be a nonempty list of check entries")
        self.suite = suite
        self.output_dir = (doc.get("output") or {}).get("dir")
        self.checks: list[BoundCheck] = []
        self.extra_artifacts: list[tuple[str, str]] = []

    # -- entry helpers ----------------------------------------------------

    def element(self, entry: dict, key: str) -> Element:
        name = entry.get(key)
        if not isinstance(name, str):
            raise ConfigError(f"entry field {key!r} must name an element")
        if name not in self.elements:
            raise ConfigError(f"unresolved element reference {name!r}")
        return self.elements[name]

    def element_list(self, entry: dict, key: str) -> list[Element]:
        names = entry.get(key)
        if not isinstance(names, list) or not names:
            raise ConfigError(f"entry field {key!r} must be a nonempty list of element names")
        return [self.element({key: n}, key) for n in names]

    def need_operator(self) -> OperatorSpec:
        if self.operator is None:
            raise ConfigError("this suite entry needs an operator in the scenario")
        return self.operator

    def need_delay_trace(self):
        if self.delay is None:
            raise ConfigError("this suite entry needs a delay scenario")
        if self._delay_trace is None:
            try:
                self._delay_trace = integrate(self.delay)
            except ValueError as exc:
                raise ConfigError(f"delay scenario invalid: {exc}") from None
            self.extra_artifacts.append(("delay_trace.csv", self._delay_trace.to_csv_text()))
            self.extra_artifacts.append(("delay_strips.csv",
                                         self._delay_trace.strips_csv_text()))
        return self._delay_trace

    @staticmethod
    def require_seed(entry: dict) -> int:
        if "seed" not in entry:
            raise ConfigError(f"entry {entry.get('check')!r} samples randomly and "
                              "must carry a seed")
        return int(entry["seed"])

    # -- dispatch ----------------------------------------------------------

    def run_entry(self, index: int, entry: dict) -> None:
        if not isinstance(entry, dict) or "check" not in entry:
            raise ConfigError(f"suite entry {index} must be an object with a 'check' field")
        kind = entry["check"]
        handler = getattr(self, f"_entry_{kind}", None)
        if handler is None:
            raise ConfigError(f"unknown check {kind!r}")
        handler(index, entry)

    def _entry_prop21(self, index: int, entry: dict) -> None:
        self.checks.append(bounds.check_prop21(self.need_operator(),
                                               self.element(entry, "x"),
                                               int(entry["n"]), int(entry["m"])))

    def _entry_thm22_i(self, index: int, entry: dict) -> None:
        self.checks.append(bounds.check_thm22_i(
            self.need_operator(), self.element(entry, "x"), int(entry["k"]),
            int(entry["n"]), [int(m) for m in entry["m_values"]], basis=self.basis))

    def _entry_thm22_ii(self, index: int, entry: dict) -> None:
        self.checks.append(bounds.check_thm22_ii(
            self.need_operator(), self.element(entry, "x"), int(entry["k"]),
            float(entry["epsilon"]), self.basis, self.metric,
            n_max=int(entry.get("n_max", 96)), m_max=int(entry.get("m_max", 96))))

    def _entry_thm22_iii(self, index: int, entry: dict) -> None:
        self.checks.append(bounds.check_thm22_iii(
            self.need_operator(), self.element(entry, "x"), int(entry["k"]),
            self.basis, self.metric, horizon=int(entry.get("horizon", 60))))

    @staticmethod
    def _norm_bound(entry: dict) -> float | None:
        raw = entry.get("domain_norm_bound")
        return None if raw is None else float(raw)

    def _entry_thm31_ii(self, index: int, entry: dict) -> None:
        self.checks.extend(bounds.check_thm31_ii(
            self.need_operator(), self.element_list(entry, "domain"),
            float(entry["epsilon"]), self.basis, self.metric,
            window=int(entry.get("window", 6)),
            domain_norm_bound=self._norm_bound(entry)))

    def _entry_thm31_iii(self, index: int, entry: dict) -> None:
        self.checks.append(bounds.check_thm31_iii(
            self.need_operator(), self.element_list(entry, "domain"),
            float(entry["epsilon"]), self.basis, self.metric,
            window=int(entry.get("window", 5)),
            domain_norm_bound=self._norm_bound(entry)))

    def _entry_thm32_bound(self, index: int, entry: dict) -> None:
        T = self.need_operator()
        x, y = self.element(entry, "x"), self.element(entry, "y")
        if "n_max" in entry:
            m_values = [int(m) for m in entry.get("m_values", [1, 2, 4, 8, 16, 32, 64])]
            self.checks.append(bounds.check_thm32_bound_grid(
                T, x, y, int(entry["n_max"]), m_values, self.basis, self.metric))
        else:
            self.checks.append(bounds.check_thm32_bound(
                T, x, y, int(entry["n"]), int(entry["m"]), self.basis, self.metric))

    def _entry_thm32_ratios(self, index: int, entry: dict) -> None:
        self.checks.extend(bounds.check_thm32_ratios(
            self.need_operator(), self.element(entry, "x"), self.element(entry, "y"),
            self.basis, self.metric, horizon=int(entry.get("horizon", 60))))

    def _entry_thm32_subset(self, index: int, entry: dict) -> None:
        check, constants = bounds.check_thm32_subset(
            self.need_operator(), self.element_list(entry, "subset"), int(entry["m"]),
            self.basis, self.metric, horizon=int(entry.get("horizon", 80)),
            tag=str(entry.get("tag", "E")))
        self.checks.append(check)
        self.extra_artifacts.append((f"thm32_constants_{index}.json", _dumps({
            "k_bar_mE": constants.k_bar_mE, "eps_bar_mE": constants.eps_bar_mE,
            "subset_tag": constants.subset_tag, "m": constants.m})))

    def _entry_prop23(self, index: int, entry: dict) -> None:
        self.checks.append(bounds.check_prop23(self.need_operator(), int(entry["m"]),
                                               self.basis, self.metric))

    def _entry_grid(self, index: int, entry: dict) -> None:
        label = str(entry.get("label", f"grid_{index}"))
        grid = run_grid(self.need_operator(), self.element(entry, "x"),
                        self.element(entry, "y"),
                        [int(n) for n in entry["n_values"]],
                        [int(m) for m in entry["m_values"]], self.basis, self.metric)
        worst = max(
            float(grid.d_trunc_pair[i, j]
                  - (grid.d_trunc_vs_full[i, j] + grid.d_full[i, j]
                     + grid.d_trunc_vs_full_y[i, j]))
            for i in range(len(grid.n_values)) for j in range(len(grid.m_values)))
        self.checks.append(make_check("grid_triangle", worst, 0.0,
                                      context={"label": label}))
        self.extra_artifacts.append((f"grids/{label}.csv", grid.to_csv_text()))
        self.extra_artifacts.append((f"grids/{label}.json", _dumps(grid.to_dict())))

    def _entry_solve_fixed_point(self, index: int, entry: dict) -> None:
        result = solve_fixed_point(
            self.need_operator(), self.element(entry, "x0"), float(entry["epsilon"]),
            self.element_list(entry, "domain"), self.basis, self.metric,
            n_probe_max=int(entry.get("n_probe_max", 200)),
            m_probe_max=int(entry.get("m_probe_max", 4096)),
            domain_norm_bound=self._norm_bound(entry))
        self.checks.append(result.certificate)
        self.extra_artifacts.append((f"solve_{index}.json", _dumps({
            "z_approx": result.z_approx.to_dict(),
            "epsilon": result.params.epsilon,
            "m_bar": result.params.m_bar,
            "n_bar": result.params.n_bar,
            "domain_norm_bound": result.params.domain_norm_bound})))

    def _entry_basis_constant(self, index: int, entry: dict) -> None:
        seed = self.require_seed(entry)
        estimate = basis_constant_estimate(self.basis, int(entry["sample_count"]),
                                           int(entry["max_m"]), seed)
        self.checks.append(make_check(
            "basis_constant", estimate, self.basis.basis_constant,
            context={"sample_count": int(entry["sample_count"]),
                     "max_m": int(entry["max_m"]), "seed": seed},
            require=estimate >= 1.0 - 1e-12))

    def _entry_contraction_estimate(self, index: int, entry: dict) -> None:
        T = self.need_operator()
        if T.klass.kind == "contractive":
            declared = T.klass.rate
        elif T.klass.kind == "nonexpansive":
            declared = 1.0
        else:
            raise ConfigError("contraction_estimate needs a one-step rate "
                              "(contractive or nonexpansive class)")
        seed = self.require_seed(entry)
        estimate = estimate_contraction_constant(T, int(entry["sample_count"]), seed,
                                                 self.basis, self.metric)
        self.checks.append(make_check(
            "contraction_estimate", estimate, declared,
            context={"sample_count": int(entry["sample_count"]), "seed": seed}))

    def _entry_delay_strip_contraction(self, index: int, entry: dict) -> None:
        trace = self.need_delay_trace()
        self.checks.append(check_strip_contraction(
            trace, self.delay, n0=int(entry.get("n0", 2)),
            decay_threshold=float(entry.get("decay_threshold", 1e-6))))

    def _entry_delay_truncation_m1(self, index: int, entry: dict) -> None:
        trace = self.need_delay_trace()
        self.checks.append(check_truncation_m1(
            trace, self.delay,
            decay_threshold=float(entry.get("decay_threshold", 1e-6))))

    # -- execution ---------------------------------------------------------

    def run(self) -> RunResult:
        for index, entry in enumerate(self.suite):
            try:
                self.run_entry(index, entry)
            except ConfigError as exc:
                raise ConfigError(f"suite entry {index}: {exc}") from None
            except (ClassMismatchError, UnsupportedCompositionError) as exc:
                raise ConfigError(f"suite entry {index}: {exc}") from None
            except KeyError as exc:
                raise ConfigError(f"suite entry {index}: missing field {exc}") from None
            except ValueError as exc:
                raise ConfigError(f"suite entry {index}: {exc}") from None
        all_passed = all(c.passed for c in self.checks)
        artifacts = render_artifacts(self.name, self.checks) + tuple(self.extra_artifacts)
        return RunResult(name=self.name, all_passed=all_passed,
                         checks=tuple(self.checks), artifacts=artifacts,
                         output_dir=self.output_dir)


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def render_artifacts(name: str, checks: list[BoundCheck]) -> tuple[tuple[str, str], ...]:
    """Render the JSON report, the CSV summary and the human-readable summary."""
    report = _dumps([c.to_dict() for c in checks])
    csv_lines = ["name,lhs,rhs,slack,pass"]
    for c in checks:
        csv_lines.append(f"{c.name},{c.lhs!r},{c.rhs!r},{c.slack!r},{str(c.passed).lower()}")
    passed = sum(1 for c in checks if c.passed and c.hypothesis_met)
    unmet = sum(1 for c in checks if not c.hypothesis_met)
    failed = sum(1 for c in checks if not c.passed)
    lines = [f"scenario: {name}",
             f"checks: {len(checks)} total, {passed} passed, {failed} failed, "
             f"{unmet} hypothesis-unmet"]
    for c in checks:
        status = "SKIP" if not c.hypothesis_met else ("PASS" if c.passed else "FAIL")
        note = f"  ({c.interpretation})" if c.interpretation else ""
        lines.append(f"{status} {c.name}: lhs={c.lhs!r} rhs={c.rhs!r} slack={c.slack!r}{note}")
    summary = "\n".join(lines) + "\n"
    return (("report.json", report), ("checks.csv", "\n".join(csv_lines) + "\n"),
            ("summary.txt", summary))


def run_scenario(doc: dict) -> RunResult:
    """Validate and execute one scenario document (raises ConfigError)."""
    return _Runner(doc).run()
