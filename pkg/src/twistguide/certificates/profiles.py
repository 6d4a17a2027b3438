"""Longitudinal profiles used by the Hardy and 1D arguments.

``side='right'`` is the configuration with the window to the right of the
twist (the Hardy weight lives on ``(-inf, p]``); ``side='left'`` is its mirror
image under ``s -> 2p - s``.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ProfileSet:
    p: float
    r: float
    a: float
    l: float
    E1: float
    side: str = "right"

    def _u(self, s):
        # signed distance from p, oriented so the weighted half-line is u <= 0
        s = np.asarray(s, dtype=float)
        return s - self.p if self.side == "right" else self.p - s

    def g(self, s):
        s = np.asarray(s, dtype=float)
        inside = (s > self.a) & (s < self.a + self.l)
        return np.where(inside, 0.0, self.E1)

    def rho(self, s):
        u = self._u(s)
        return np.where(u <= 0, 1.0 / (1.0 + u * u), 0.0)

    def Phi(self, s):
        u = self._u(s)
        return np.where(u < 0, np.pi / 2 + np.arctan(u), np.pi / 2)

    def cutoff(self, s):
        u = self._u(s)
        return np.clip(-u / self.r, 0.0, 1.0) * (u <= 0)


def rho_integral(p, lower):
    """Closed form of the integral of rho over ``[lower, p]``."""
    return np.arctan(p - lower)


def phi_squared_integral(t, p):
    """Closed form of the integral of Phi**2 over ``(-inf, t]`` for ``t >= p``."""
    return np.pi * np.log(2) + np.pi**2 / 4 * (t - p)
