"""Named presets addressable from scenario files and the presets listing."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .delay_ode import DelayScenario, TimeFunction
from .operators import (
    AffineOperator,
    ComponentwiseOperator,
    ContractionClass,
    DiagonalOperator,
    OperatorSpec,
)
from .space import BasisSpec, Element

__all__ = [
    "PresetInfo",
    "operator_preset",
    "basis_preset",
    "delay_preset",
    "list_presets",
    "curated_contractive_instances",
]


@dataclass(frozen=True)
class PresetInfo:
    name: str
    kind: str
    description: str


def _diag_half() -> OperatorSpec:
    return DiagonalOperator.constant(0.5)


def _diag_identity() -> OperatorSpec:
    return DiagonalOperator.constant(1.0, ContractionClass.nonexpansive())


def _diag_zero() -> OperatorSpec:
    return DiagonalOperator.constant(0.0)


def _diag_geometric() -> OperatorSpec:
    # multipliers 0.5, -0.4, 0.3 then 0.7 * 0.5**i: sup |k_i| = 0.5
    return DiagonalOperator((0.5, -0.4, 0.3), ("geometric", 0.7, 0.5),
                            ContractionClass.contractive(0.5))


def _diag_nonexpansive() -> OperatorSpec:
    return DiagonalOperator((1.0, -1.0, 0.9), ("constant", 0.8),
                            ContractionClass.nonexpansive())


def _affine_1d() -> OperatorSpec:
    return AffineOperator(np.array([[0.5]]), 0.0, Element.unit(1),
                          ContractionClass.contractive(0.5))


def _affine_block() -> OperatorSpec:
    return AffineOperator(np.array([[0.5, 0.0], [0.0, 0.25]]), 0.25,
                          Element.from_coeffs((1.0, 0.75)),
                          ContractionClass.contractive(0.5))


def _affine_coupled() -> OperatorSpec:
    matrix = np.array([[0.3, 0.2], [-0.1, 0.4]])
    return AffineOperator(matrix, 0.2, Element.from_coeffs((0.5, -0.25, 0.125)),
                          ContractionClass.contractive(float(np.linalg.norm(matrix, 2))))


def _affine_nilpotent() -> OperatorSpec:
    # A^2 = 0: not a contraction in one step, contracts after the offset p_bar
    return AffineOperator(np.array([[0.0, 2.0], [0.0, 0.0]]), 0.3, Element.zero(),
                          ContractionClass.asymptotically_contractive(0.5, p_bar=2))


def _componentwise_tanh() -> OperatorSpec:
    return ComponentwiseOperator("tanh", 0.6)


def _componentwise_sin() -> OperatorSpec:
    return ComponentwiseOperator("sin", 0.7)


_OPERATORS: dict[str, tuple[Callable[[], OperatorSpec], str]] = {
    "diag-half": (_diag_half, "diagonal, every multiplier 0.5 (contractive K=0.5)"),
    "diag-geometric": (_diag_geometric,
                       "diagonal with mixed-sign prefix and geometric multiplier tail (K=0.5)"),
    "diag-identity": (_diag_identity, "identity map (nonexpansive isometry)"),
    "diag-zero": (_diag_zero, "zero map (contractive K=0)"),
    "diag-nonexpansive": (_diag_nonexpansive,
                          "diagonal with |k_i| <= 1, some equal to 1 (nonexpansive)"),
    "affine-1d": (_affine_1d, "x -> 0.5 x_1 e_1 + e_1 (contractive, fixed point 2 e_1)"),
    "affine-block": (_affine_block,
                     "diagonal 2x2 block, gamma=0.25, offset (1, 0.75) (contractive K=0.5)"),
    "affine-coupled": (_affine_coupled, "dense 2x2 block with off-diagonal coupling"),
    "affine-nilpotent": (_affine_nilpotent,
                         "nilpotent block, asymptotically contractive with p_bar=2"),
    "componentwise-tanh": (_componentwise_tanh,
                           "coordinatewise 0.6*tanh saturation (contractive K=0.6)"),
    "componentwise-sin": (_componentwise_sin,
                          "coordinatewise 0.7*sin saturation (contractive K=0.7)"),
}

_BASES: dict[str, tuple[Callable[[], BasisSpec], str]] = {
    "canonical": (BasisSpec.canonical, "coordinate unit vectors, basis constant exactly 1"),
    "weighted-decay": (lambda: BasisSpec.weighted((2.0, 1.5), (1.0, 0.9)),
                       "weights 2, 1.5 then 0.9**i (bounded, strictly positive)"),
    "weighted-unit": (lambda: BasisSpec.weighted((), (1.0, 1.0)),
                      "weighted basis with every weight 1 (reduces to canonical)"),
}


def reference_delay_scenario() -> DelayScenario:
    return DelayScenario(a=-1.0, a0=TimeFunction.constant(0.4),
                         lam=TimeFunction.harmonic(0.5), h=0.5, sample_period=1.0,
                         phi=TimeFunction.constant(1.0), dt=1e-3, horizon=40.0)


def undelayed_delay_scenario() -> DelayScenario:
    return DelayScenario(a=-1.0, a0=TimeFunction.constant(0.0),
                         lam=TimeFunction.harmonic(0.5), h=0.5, sample_period=1.0,
                         phi=TimeFunction.constant(1.0), dt=1e-3, horizon=4.0)


_DELAYS: dict[str, tuple[Callable[[], DelayScenario], str]] = {
    "delay-reference": (reference_delay_scenario,
                        "a=-1, a0=0.4, lambda=0.5/(1+t), T=1, phi=1, dt=1e-3, horizon 40"),
    "delay-undelayed": (undelayed_delay_scenario,
                        "a0=0 variant with the exp(-t) closed form, horizon 4"),
}


def operator_preset(name: str) -> OperatorSpec:
    try:
        return _OPERATORS[name][0]()
    except KeyError:
        raise KeyError(f"unknown operator preset {name!r}") from None


def basis_preset(name: str) -> BasisSpec:
    try:
        return _BASES[name][0]()
    except KeyError:
        raise KeyError(f"unknown basis preset {name!r}") from None


def delay_preset(name: str) -> DelayScenario:
    try:
        return _DELAYS[name][0]()
    except KeyError:
        raise KeyError(f"unknown delay preset {name!r}") from None


_FUNCTION_RULES = {
    "constant": "constant(value): fixed value at every time",
    "linear": "linear(value, slope): value + slope * t",
    "sin": "sin(amplitude, frequency): amplitude * sin(frequency * t)",
    "harmonic": "harmonic(scale): scale / (1 + t), decaying and positive",
}


def list_presets() -> list[PresetInfo]:
    out = [PresetInfo(name, "operator", desc) for name, (_, desc) in _OPERATORS.items()]
    out += [PresetInfo(name, "basis", desc) for name, (_, desc) in _BASES.items()]
    out += [PresetInfo(name, "delay", desc) for name, (_, desc) in _DELAYS.items()]
    out += [PresetInfo(name, "function", desc) for name, desc in _FUNCTION_RULES.items()]
    return out


def curated_contractive_instances() -> list[tuple[str, OperatorSpec, Element, Element]]:
    """Contractive (operator, x, y) triples used by the terminal-limit sweeps.

    Rates are capped at 0.7 and the elements at unit scale so K**60-sized
    quantities sit safely below the 1e-8 terminal threshold.
    """
    geometric = Element.geometric(1.0, 0.5)
    alternating = Element.geometric(0.8, -0.6, prefix=(1.0, -0.5))
    finite = Element.from_coeffs((1.0, 0.5, 0.25))
    e1 = Element.unit(1)
    return [
        ("diag-half", operator_preset("diag-half"), geometric, e1),
        ("diag-geometric", operator_preset("diag-geometric"), alternating, Element.zero()),
        ("diag-seventenths", DiagonalOperator.constant(0.7), geometric, finite),
        ("affine-1d", operator_preset("affine-1d"), finite, e1),
        ("affine-block", operator_preset("affine-block"), geometric, Element.zero()),
        ("affine-coupled", operator_preset("affine-coupled"), finite, Element.zero()),
        ("componentwise-tanh", operator_preset("componentwise-tanh"), finite, e1),
        ("componentwise-sin", operator_preset("componentwise-sin"), finite, Element.zero()),
    ]
