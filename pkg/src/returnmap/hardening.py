"""Isotropic hardening curves ``kappa = H(eps_bar_p)``."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class HardeningCurve:
    """Base class: perfect plasticity (``H = 0``)."""

    @property
    def is_linear(self) -> bool:
        """True when ``H`` is linear so the scalar corrector has a closed form."""
        return True

    @property
    def slope(self) -> float:
        return 0.0

    def __call__(self, eps_bar_p):
        return np.zeros_like(np.asarray(eps_bar_p, dtype=float))

    def left_derivative(self, eps_bar_p):
        return np.zeros_like(np.asarray(eps_bar_p, dtype=float))


@dataclass(frozen=True)
class ZeroHardening(HardeningCurve):
    pass


@dataclass(frozen=True)
class LinearHardening(HardeningCurve):
    modulus: float = 0.0

    def __post_init__(self):
        if self.modulus < 0:
            raise ValueError("hardening modulus must be nonnegative")

    @property
    def slope(self) -> float:
        return self.modulus

    def __call__(self, eps_bar_p):
        return self.modulus * np.asarray(eps_bar_p, dtype=float)

    def left_derivative(self, eps_bar_p):
        return np.full_like(np.asarray(eps_bar_p, dtype=float), self.modulus)


@dataclass(frozen=True)
class SaturatingHardening(HardeningCurve):
    """Parabolic hardening from ``c0`` up to the cohesion ``c``.

    ``H(x) = Ht x - Ht^2 x^2 / (4 (c - c0))`` until it reaches ``c - c0`` at
    ``x = 2 (c - c0) / Ht``; constant beyond that point.
    """

    c: float = 50.0
    c0: float = 40.0
    initial_modulus: float = 10000.0

    def __post_init__(self):
        if not (self.c > self.c0 and self.initial_modulus > 0):
            raise ValueError("need c > c0 and a positive initial modulus")

    @property
    def is_linear(self) -> bool:
        return False

    @property
    def _x_sat(self):
        return 2.0 * (self.c - self.c0) / self.initial_modulus

    def __call__(self, eps_bar_p):
        x = np.asarray(eps_bar_p, dtype=float)
        ht, dc = self.initial_modulus, self.c - self.c0
        xc = np.minimum(x, self._x_sat)
        return ht * xc - ht * ht * xc * xc / (4.0 * dc)

    def left_derivative(self, eps_bar_p):
        x = np.asarray(eps_bar_p, dtype=float)
        ht, dc = self.initial_modulus, self.c - self.c0
        return np.where(x <= self._x_sat, ht - ht * ht * x / (2.0 * dc), 0.0)
