r"""Smooth scalar kernels and their derivatives.

The loss semantics replaces hard max/min with the log-sum-exp pair

    max_gamma(a, b) =  gamma * ln(e^{a/gamma} + e^{b/gamma})
    min_gamma(a, b) = -gamma * ln(e^{-a/gamma} + e^{-b/gamma})

and uses a Gaussian bump e^{-a^2/(2 gamma^2)} for the "not equal" atom.
gamma <= 0 selects the exact (hard) forms.

The naive formulas overflow as soon as |a|/gamma exceeds ~709, which small
gamma reaches immediately, so the default kernels use the equivalent stable
form that factors out the larger operand:

    max_gamma(a, b) = max(a, b) + gamma * ln(1 + e^{-|a - b|/gamma})

with the exponent never positive.  The naive forms are kept behind
``kernel_mode="naive"`` purely for differential testing.

Derivative kernels return the chain-rule combination w_a*da + w_b*db where
the weights are logistic sigmoids; at gamma <= 0 the subgradient convention
routes everything to the winning argument, ties to the first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .tensor import Tensor, binop, unop

LN2 = math.log(2.0)

_MODES = ("stable", "naive")


@dataclass(frozen=True)
class Gamma:
    """Smoothing factor plus the kernel-form switch.

    value <= 0 means exact (non-smooth) semantics; differentiability is only
    meaningful for value > 0.
    """

    value: float
    kernel_mode: str = "stable"

    def __post_init__(self) -> None:
        if self.kernel_mode not in _MODES:
            raise ValueError(f"kernel_mode must be one of {_MODES}, got {self.kernel_mode!r}")

    @property
    def smooth(self) -> bool:
        return self.value > 0


def as_gamma(gamma: float | Gamma) -> Gamma:
    """Accept a bare float (stable mode) or a fully specified Gamma."""
    if isinstance(gamma, Gamma):
        return gamma
    return Gamma(float(gamma))


def _sigmoid(x: float) -> float:
    # Evaluated on whichever side keeps the exponent non-positive.
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    z = math.exp(x)
    return z / (1.0 + z)


def max_gamma(a: float, b: float, gamma: float | Gamma) -> float:
    g = as_gamma(gamma)
    if g.value <= 0:
        return max(a, b)
    if g.kernel_mode == "naive":
        return g.value * math.log(math.exp(a / g.value) + math.exp(b / g.value))
    if a < b:
        lo, hi = a, b
    elif b < a:
        lo, hi = b, a
    else:
        return a + g.value * LN2
    return hi + g.value * math.log1p(math.exp((lo - hi) / g.value))


def min_gamma(a: float, b: float, gamma: float | Gamma) -> float:
    g = as_gamma(gamma)
    if g.value <= 0:
        return min(a, b)
    if g.kernel_mode == "naive":
        return -g.value * math.log(math.exp(-a / g.value) + math.exp(-b / g.value))
    return -max_gamma(-a, -b, g)


def gaussian_gamma(a: float, gamma: float | Gamma) -> float:
    g = as_gamma(gamma)
    if g.value <= 0:
        return 1.0 if a == 0 else 0.0
    return math.exp(-(a * a) / (2.0 * g.value * g.value))


def max_gamma_weights(a: float, b: float, gamma: float | Gamma) -> tuple[float, float]:
    """(d/da, d/db) of max_gamma; hard subgradient sends ties to the first argument."""
    g = as_gamma(gamma)
    if g.value <= 0:
        return (1.0, 0.0) if a >= b else (0.0, 1.0)
    return _sigmoid((a - b) / g.value), _sigmoid((b - a) / g.value)


def min_gamma_weights(a: float, b: float, gamma: float | Gamma) -> tuple[float, float]:
    g = as_gamma(gamma)
    if g.value <= 0:
        return (1.0, 0.0) if a <= b else (0.0, 1.0)
    return _sigmoid((b - a) / g.value), _sigmoid((a - b) / g.value)


def gaussian_gamma_dcoeff(a: float, gamma: float | Gamma) -> float:
    """d/da of gaussian_gamma; zero in the hard case (the indicator is flat a.e.)."""
    g = as_gamma(gamma)
    if g.value <= 0:
        return 0.0
    return (-a / (g.value * g.value)) * gaussian_gamma(a, g)


def dmax_gamma(a: float, da: Tensor, b: float, db: Tensor, gamma: float | Gamma) -> Tensor:
    """Chain rule through max_gamma: w_a*da + w_b*db for gradient tensors da, db."""
    w_a, w_b = max_gamma_weights(a, b, gamma)
    return binop(lambda x, y: w_a * x + w_b * y, da, db)


def dmin_gamma(a: float, da: Tensor, b: float, db: Tensor, gamma: float | Gamma) -> Tensor:
    w_a, w_b = min_gamma_weights(a, b, gamma)
    return binop(lambda x, y: w_a * x + w_b * y, da, db)


def dgaussian_gamma(a: float, da: Tensor, gamma: float | Gamma) -> Tensor:
    w = gaussian_gamma_dcoeff(a, gamma)
    return unop(lambda x: w * x, da)
