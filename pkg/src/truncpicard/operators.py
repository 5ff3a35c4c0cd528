"""Operator families T : X -> X with validated contraction classification.

Three concrete families act exactly on the analytic tail representation:

* diagonal coordinatewise multipliers (finite prefix + constant or geometric
  rule), which commute with basis truncation by construction;
* affine maps with a dense leading block, ``gamma``-scaled identity beyond it
  and a finite-support offset;
* componentwise scalar contractions (saturating shapes through the origin),
  defined on finite-support elements only -- a geometric tail has no
  closed-form image under a nonlinear coordinate map, and that combination is
  rejected rather than approximated.

The declared contraction class is checked against the concrete data when the
operator is built, so downstream checks can trust it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .space import BasisSpec, Element, MetricKind, distance, norm, random_elements

__all__ = [
    "ContractionClass",
    "DiagonalOperator",
    "AffineOperator",
    "ComponentwiseOperator",
    "OperatorSpec",
    "FixedPointResult",
    "UnsupportedCompositionError",
    "ClassMismatchError",
    "apply",
    "iterate",
    "image_coefficient",
    "exact_fixed_point",
    "estimate_contraction_constant",
    "commutes_with_truncation",
]

_CONSISTENCY_TOL = 1e-9


class UnsupportedCompositionError(ValueError):
    """Operator/element tail combination with no closed-form image."""


class ClassMismatchError(ValueError):
    """Operation requires a contraction class the operator does not declare."""


@dataclass(frozen=True)
class ContractionClass:
    """Declared contraction behaviour of an operator.

    ``contractive``: d(Tx, Ty) <= K d(x, y), K < 1.
    ``nonexpansive``: K = 1 allowed, no uniqueness guarantees.
    ``asymptotically_contractive``: d(T^n x, T^n y) <= K**(n - p_n) d(T^p_n x,
    T^p_n y) with the bounded rule p_n = min(n, p_bar).
    ``asymptotically_nonexpansive``: iterate Lipschitz constants
    L_n = 1 + l_excess / n -> 1.
    """

    kind: str
    rate: float | None = None
    p_bar: int = 0
    l_excess: float = 0.0

    _KINDS = ("contractive", "nonexpansive",
              "asymptotically_contractive", "asymptotically_nonexpansive")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown contraction class {self.kind!r}")
        if self.kind in ("contractive", "asymptotically_contractive"):
            if self.rate is None or not (0.0 <= self.rate < 1.0):
                raise ValueError("contractive classes need K in [0, 1)")
        if self.p_bar < 0:
            raise ValueError("p_bar must be >= 0")
        if self.l_excess < 0:
            raise ValueError("l_excess must be >= 0")

    @classmethod
    def contractive(cls, rate: float) -> "ContractionClass":
        return cls("contractive", rate=rate)

    @classmethod
    def nonexpansive(cls) -> "ContractionClass":
        return cls("nonexpansive")

    @classmethod
    def asymptotically_contractive(cls, rate: float, p_bar: int = 3) -> "ContractionClass":
        return cls("asymptotically_contractive", rate=rate, p_bar=p_bar)

    @classmethod
    def asymptotically_nonexpansive(cls, l_excess: float = 0.0) -> "ContractionClass":
        return cls("asymptotically_nonexpansive", l_excess=l_excess)

    @property
    def is_asymptotically_contractive(self) -> bool:
        return self.kind in ("contractive", "asymptotically_contractive")

    @property
    def is_asymptotically_nonexpansive(self) -> bool:
        # every supported class is dominated by an L_n -> 1 envelope
        return True

    def p_n(self, n: int) -> int:
        """Bounded iterate offset used by the asymptotic contraction bound."""
        return min(n, self.p_bar)

    def lipschitz_envelope(self, n: int) -> float:
        if self.kind == "asymptotically_nonexpansive" and n >= 1:
            return 1.0 + self.l_excess / n
        if self.is_asymptotically_contractive:
            return self.rate ** max(0, n - self.p_bar)
        return 1.0

    def to_dict(self) -> dict:
        data: dict = {"kind": self.kind}
        if self.rate is not None:
            data["K"] = self.rate
        if self.kind == "asymptotically_contractive":
            data["p_bar"] = self.p_bar
        if self.kind == "asymptotically_nonexpansive":
            data["l_excess"] = self.l_excess
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "ContractionClass":
        kind = data["kind"]
        if kind == "contractive":
            return cls.contractive(float(data["K"]))
        if kind == "nonexpansive":
            return cls.nonexpansive()
        if kind == "asymptotically_contractive":
            return cls.asymptotically_contractive(float(data["K"]), int(data.get("p_bar", 3)))
        if kind == "asymptotically_nonexpansive":
            return cls.asymptotically_nonexpansive(float(data.get("l_excess", 0.0)))
        raise ValueError(f"unknown contraction class {kind!r}")


@dataclass(frozen=True)
class DiagonalOperator:
    """T(sum x_i e_i) = sum k_i x_i e_i, multipliers with an analytic tail rule.

    ``multiplier_tail`` is ``("constant", c)`` or ``("geometric", c, q)`` with
    k_i = c * q**i beyond the prefix (|q| < 1).
    """

    multipliers: tuple[float, ...]
    multiplier_tail: tuple = ("constant", 0.0)
    klass: ContractionClass = field(default_factory=lambda: ContractionClass.contractive(0.0))

    def __post_init__(self):
        object.__setattr__(self, "multipliers", tuple(float(k) for k in self.multipliers))
        rule = self.multiplier_tail
        if rule[0] == "constant":
            if len(rule) != 2 or not math.isfinite(rule[1]):
                raise ValueError("constant multiplier tail is ('constant', c)")
        elif rule[0] == "geometric":
            if len(rule) != 3 or abs(rule[2]) >= 1.0:
                raise ValueError("geometric multiplier tail is ('geometric', c, q) with |q| < 1")
        else:
            raise ValueError(f"unknown multiplier tail rule {rule[0]!r}")
        sup = self.sup_multiplier()
        if self.klass.kind == "contractive" and sup > self.klass.rate + _CONSISTENCY_TOL:
            raise ValueError(f"declared K={self.klass.rate} below sup|k_i|={sup}")
        if self.klass.kind == "nonexpansive" and sup > 1.0 + _CONSISTENCY_TOL:
            raise ValueError(f"sup|k_i|={sup} exceeds 1 for a nonexpansive declaration")
        if self.klass.kind == "asymptotically_contractive" and sup > self.klass.rate + _CONSISTENCY_TOL:
            raise ValueError("diagonal iterates obey sup|k_i|**n; K must dominate sup|k_i|")
        if self.klass.kind == "asymptotically_nonexpansive" and sup > 1.0 + _CONSISTENCY_TOL:
            raise ValueError("diagonal iterates diverge when sup|k_i| > 1")

    @classmethod
    def constant(cls, value: float, klass: ContractionClass | None = None) -> "DiagonalOperator":
        if klass is None:
            klass = (ContractionClass.contractive(abs(value)) if abs(value) < 1.0
                     else ContractionClass.nonexpansive())
        return cls((), ("constant", value), klass)

    def multiplier_at(self, i: int) -> float:
        if i <= len(self.multipliers):
            return self.multipliers[i - 1]
        if self.multiplier_tail[0] == "constant":
            return self.multiplier_tail[1]
        _, c, q = self.multiplier_tail
        return c * q**i

    def sup_multiplier(self) -> float:
        sup = max((abs(k) for k in self.multipliers), default=0.0)
        if self.multiplier_tail[0] == "constant":
            return max(sup, abs(self.multiplier_tail[1]))
        _, c, q = self.multiplier_tail
        # |c q**i| is largest at the first tail index
        return max(sup, abs(c * q ** (len(self.multipliers) + 1)))

    def to_dict(self) -> dict:
        rule = self.multiplier_tail
        tail = ({"kind": "constant", "value": rule[1]} if rule[0] == "constant"
                else {"kind": "geometric", "amplitude": rule[1], "ratio": rule[2]})
        return {"kind": "diagonal", "multipliers": list(self.multipliers),
                "multiplier_tail": tail, "class": self.klass.to_dict()}


@dataclass(frozen=True)
class AffineOperator:
    """T x = A x_block + gamma * x_rest + b on coefficients.

    ``matrix`` acts on the first m0 coordinates, gamma scales every coordinate
    beyond, and ``b`` is a finite-support offset.
    """

    matrix: np.ndarray
    gamma: float = 0.0
    offset: Element = field(default_factory=Element.zero)
    klass: ContractionClass = field(default_factory=lambda: ContractionClass.contractive(0.0))

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError("leading block must be a square matrix")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)
        if not self.offset.tail.is_zero:
            raise ValueError("offset must have finite support")
        if abs(self.gamma) >= 1.0:
            raise ValueError("|gamma| < 1 required beyond the leading block")
        spectral = float(np.linalg.norm(matrix, 2)) if matrix.size else 0.0
        if self.klass.kind == "contractive":
            if max(spectral, abs(self.gamma)) > self.klass.rate + _CONSISTENCY_TOL:
                raise ValueError(f"declared K={self.klass.rate} below operator norm "
                                 f"{max(spectral, abs(self.gamma))}")
        elif self.klass.kind == "asymptotically_contractive":
            self._check_asymptotic_powers(matrix)
        elif self.klass.kind == "nonexpansive":
            if max(spectral, abs(self.gamma)) > 1.0 + _CONSISTENCY_TOL:
                raise ValueError("operator norm exceeds 1 for a nonexpansive declaration")

    def _check_asymptotic_powers(self, matrix: np.ndarray) -> None:
        K, p_bar = self.klass.rate, self.klass.p_bar
        if abs(self.gamma) > K + _CONSISTENCY_TOL:
            raise ValueError("|gamma| must not exceed the asymptotic rate K")
        if matrix.size == 0:
            return
        eigen = float(np.max(np.abs(np.linalg.eigvals(matrix))))
        if eigen > K + _CONSISTENCY_TOL:
            raise ValueError(f"spectral radius {eigen} exceeds asymptotic rate {K}")
        base = np.linalg.matrix_power(matrix, p_bar)
        base_norm = float(np.linalg.norm(base, 2))
        power = base
        for j in range(1, 33):
            power = power @ matrix
            if float(np.linalg.norm(power, 2)) > K**j * base_norm + _CONSISTENCY_TOL:
                raise ValueError("matrix powers violate the declared asymptotic bound")

    @property
    def block_size(self) -> int:
        return self.matrix.shape[0]

    def to_dict(self) -> dict:
        return {"kind": "affine", "matrix": self.matrix.tolist(), "gamma": self.gamma,
                "offset": self.offset.to_dict(), "class": self.klass.to_dict()}


_COMPONENT_SHAPES = {
    # 1-Lipschitz odd shapes through the origin; scaled by the shared rate
    "tanh": math.tanh,
    "sin": math.sin,
    "atan": math.atan,
}


@dataclass(frozen=True)
class ComponentwiseOperator:
    """Coordinatewise scalar contraction (Tx)_i = K * shape(x_i).

    Every shape fixes 0, so finite-support elements stay finite-support.
    """

    shape: str
    rate: float
    klass: ContractionClass = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.shape not in _COMPONENT_SHAPES:
            raise ValueError(f"unknown componentwise shape {self.shape!r}; "
                             f"options: {sorted(_COMPONENT_SHAPES)}")
        if not (0.0 <= self.rate < 1.0):
            raise ValueError("componentwise operators require K in [0, 1)")
        if self.klass is None:
            object.__setattr__(self, "klass", ContractionClass.contractive(self.rate))
        elif self.klass.kind not in ("contractive", "asymptotically_contractive") \
                or self.klass.rate + _CONSISTENCY_TOL < self.rate:
            raise ValueError("declared class must dominate the componentwise rate")

    def scalar_map(self, t: float) -> float:
        return self.rate * _COMPONENT_SHAPES[self.shape](t)

    def to_dict(self) -> dict:
        return {"kind": "componentwise", "shape": self.shape, "rate": self.rate,
                "class": self.klass.to_dict()}


OperatorSpec = Union[DiagonalOperator, AffineOperator, ComponentwiseOperator]


def operator_from_dict(data: dict) -> OperatorSpec:
    kind = data["kind"]
    klass = ContractionClass.from_dict(data["class"])
    if kind == "diagonal":
        tail = data.get("multiplier_tail", {"kind": "constant", "value": 0.0})
        rule = (("constant", float(tail["value"])) if tail["kind"] == "constant"
                else ("geometric", float(tail["amplitude"]), float(tail["ratio"])))
        return DiagonalOperator(tuple(data.get("multipliers", ())), rule, klass)
    if kind == "affine":
        return AffineOperator(np.array(data["matrix"], dtype=float), float(data.get("gamma", 0.0)),
                              Element.from_dict(data.get("offset", {"coeffs": []})), klass)
    if kind == "componentwise":
        return ComponentwiseOperator(data["shape"], float(data["rate"]), klass)
    raise ValueError(f"unknown operator kind {kind!r}")


@dataclass(frozen=True)
class FixedPointResult:
    """Fixed point z = Tz with a flag for closed-form vs iterated origin."""

    z: Element
    exact: bool


def apply(T: OperatorSpec, x: Element) -> Element:
    """One application T x, exact on the analytic representation."""
    if isinstance(T, DiagonalOperator):
        L = max(x.prefix_len, len(T.multipliers))
        xm = x.with_prefix_len(L)
        coeffs = tuple(T.multiplier_at(i + 1) * c for i, c in enumerate(xm.coeffs))
        rule = T.multiplier_tail
        if rule[0] == "constant":
            tail = xm.tail.scaled(rule[1])
        else:
            tail = xm.tail.ratio_scaled(rule[1], rule[2])
        return Element(coeffs, tail)
    if isinstance(T, AffineOperator):
        m0 = T.block_size
        L = max(x.prefix_len, m0, T.offset.prefix_len)
        xm = x.with_prefix_len(L)
        head = T.matrix @ np.array(xm.coeffs[:m0]) if m0 else np.zeros(0)
        rest = tuple(T.gamma * c for c in xm.coeffs[m0:])
        image = Element(tuple(float(v) for v in head) + rest, xm.tail.scaled(T.gamma))
        return image + T.offset
    if isinstance(T, ComponentwiseOperator):
        if not x.tail.is_zero:
            raise UnsupportedCompositionError(
                "componentwise nonlinear maps have no closed-form image of a geometric tail")
        return Element(tuple(T.scalar_map(c) for c in x.coeffs))
    raise TypeError(f"unknown operator type {type(T).__name__}")


def iterate(T: OperatorSpec, x: Element, n: int) -> Element:
    """n-fold composition T^n x (n = 0 is the identity)."""
    if n < 0:
        raise ValueError("iteration count must be >= 0")
    for _ in range(n):
        x = apply(T, x)
    return x


def image_coefficient(T: OperatorSpec, x: Element, i: int) -> float:
    """Coefficient (Tx)_i without materializing the full image."""
    if isinstance(T, DiagonalOperator):
        return T.multiplier_at(i) * x.coefficient(i)
    if isinstance(T, AffineOperator):
        m0 = T.block_size
        if i <= m0:
            row = T.matrix[i - 1]
            return float(row @ np.array([x.coefficient(j) for j in range(1, m0 + 1)])) \
                + T.offset.coefficient(i)
        return T.gamma * x.coefficient(i) + T.offset.coefficient(i)
    if isinstance(T, ComponentwiseOperator):
        return T.scalar_map(x.coefficient(i))
    raise TypeError(f"unknown operator type {type(T).__name__}")


def exact_fixed_point(T: OperatorSpec) -> FixedPointResult:
    """Closed-form fixed point for contractive / asymptotically contractive T."""
    if not T.klass.is_asymptotically_contractive:
        raise ClassMismatchError(
            f"exact fixed point needs a (asymptotically) contractive class, "
            f"got {T.klass.kind!r}")
    if isinstance(T, DiagonalOperator):
        return FixedPointResult(Element.zero(), exact=True)
    if isinstance(T, ComponentwiseOperator):
        # every shape fixes the origin
        return FixedPointResult(Element.zero(), exact=True)
    if isinstance(T, AffineOperator):
        m0 = T.block_size
        b = T.offset.with_prefix_len(max(m0, T.offset.prefix_len))
        system = np.eye(m0) - T.matrix
        try:
            head = np.linalg.solve(system, np.array(b.coeffs[:m0])) if m0 else np.zeros(0)
        except np.linalg.LinAlgError as exc:
            raise ValueError("I - A is singular; declared contractivity is violated") from exc
        rest = tuple(c / (1.0 - T.gamma) for c in b.coeffs[m0:])
        return FixedPointResult(Element(tuple(float(v) for v in head) + rest), exact=True)
    raise TypeError(f"unknown operator type {type(T).__name__}")


def _probe_dims(T: OperatorSpec) -> int:
    if isinstance(T, DiagonalOperator):
        return len(T.multipliers) + 1
    if isinstance(T, AffineOperator):
        return max(T.block_size, T.offset.prefix_len) + 1
    return 8


def _sample_pairs(T: OperatorSpec, sample_count: int, seed: int) -> list[tuple[Element, Element]]:
    finite_only = isinstance(T, ComponentwiseOperator)
    elements = random_elements(sample_count, seed=seed, max_support=8,
                               finite_fraction=1.0 if finite_only else 0.5)
    pairs: list[tuple[Element, Element]] = []
    # coordinate directions at unit and small scale: the sup ratio of a
    # coordinatewise map is attained along them
    for i in range(1, max(8, _probe_dims(T)) + 1):
        pairs.append((Element.unit(i), Element.zero()))
        pairs.append((Element.unit(i, 1e-6), Element.zero()))
    rng = np.random.default_rng(seed + 1)
    for idx, x in enumerate(elements):
        other = elements[int(rng.integers(len(elements)))]
        pairs.append((x, other if idx % 2 else Element.zero()))
    return pairs


def estimate_contraction_constant(T: OperatorSpec, sample_count: int, seed: int,
                                  basis: BasisSpec, metric: MetricKind) -> float:
    """Empirical sup of d(Tx, Ty) / d(x, y) over a seeded sample of pairs."""
    if sample_count < 2:
        raise ValueError("need at least two samples")
    best = 0.0
    for x, y in _sample_pairs(T, sample_count, seed):
        denom = distance(x, y, basis, metric)
        if denom <= 1e-12:
            continue
        best = max(best, distance(apply(T, x), apply(T, y), basis, metric) / denom)
    return best


def commutes_with_truncation(T: OperatorSpec, x: Element, m: int) -> bool:
    """True iff T(x_i e_i) equals (Tx)_i e_i to 1e-12 for every i <= m."""
    canonical, l2 = BasisSpec.canonical(), MetricKind.L2
    for i in range(1, m + 1):
        coordinate_image = apply(T, Element.unit(i, x.coefficient(i)))
        expected = Element.unit(i, image_coefficient(T, x, i))
        if distance(coordinate_image, expected, canonical, l2) > 1e-12:
            return False
    return True
