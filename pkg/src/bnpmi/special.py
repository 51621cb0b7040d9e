"""Special functions used by the entropy estimators and the closed-form MI oracles."""

from __future__ import annotations

import math

import numpy as np

EULER_GAMMA = 0.57721566490153286061

# Bernoulli-number coefficients B_2j / (2j) of the digamma asymptotic series.
_DIGAMMA_SERIES = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)
_DIGAMMA_SHIFT = 10.0


def digamma(x: float) -> float:
    """Digamma function psi(x) for x > 0.

    Shifts the argument above 10 with psi(x) = psi(x + 1) - 1/x and then
    applies the asymptotic expansion, which is accurate to well below 1e-12
    there.
    """
    x = float(x)
    if not x > 0.0:
        raise ValueError(f"digamma requires x > 0, got {x}")
    acc = 0.0
    while x < _DIGAMMA_SHIFT:
        acc -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    series = 0.0
    power = inv2
    for coef in _DIGAMMA_SERIES:
        series += coef * power
        power *= inv2
    return acc + math.log(x) - 0.5 / x - series


def log_gamma(x: float) -> float:
    if not x > 0.0:
        raise ValueError(f"log_gamma requires x > 0, got {x}")
    return math.lgamma(x)


def log_beta(a: float, b: float) -> float:
    return log_gamma(a) + log_gamma(b) - log_gamma(a + b)


def harmonic_number(j: int) -> float:
    """L_j = 1 + 1/2 + ... + 1/j, with L_0 = 0."""
    if j < 0:
        raise ValueError(f"harmonic number needs j >= 0, got {j}")
    return math.fsum(1.0 / r for r in range(1, j + 1))


def unit_ball_log_volume(d: int) -> float:
    """Log-volume of the Euclidean unit ball in R^d."""
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    return 0.5 * d * math.log(math.pi) - log_gamma(0.5 * d + 1.0)


def knn_entropy_offset(k: int) -> float:
    """The constant ``gamma - L_{k-1}`` shared by both kNN entropy estimators."""
    return EULER_GAMMA - harmonic_number(k - 1)
