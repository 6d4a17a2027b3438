"""Closed-form constants of the non-existence chain and the existence threshold.

All functions are plain scalar formulas. The sup-norms of the twist enter
through a :class:`~twistguide.geometry.TwistProfile`.
"""

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import brentq

from ..errors import (InvalidAlpha, InvalidOrdering, InvalidSplit, NoPositiveDmax,
                      NonpositiveE1)

LN2 = np.log(2.0)


def lmin(E1):
    """Window width beyond which the plateau trial function beats ``E1``."""
    if not E1 > 0:
        raise NonpositiveE1(f"E1 must be positive, got {E1}")
    return float(np.sqrt(300.0 / (13.0 * E1)))


def existence_gap(l, E1, area):
    """``q(phi) - E1 ||phi||^2`` for the plateau profile of width ``l``."""
    return area * (20.0 / l - 13.0 * l / 15.0 * E1)


@dataclass(frozen=True)
class HardyPoint:
    p: float
    r: float
    rate0: float      # lower bound of |thetadot| on [p - r, p]
    side: str = "right"


def select_hardy_point(twist, side="right", p=None, r=None):
    """Default choice: ``p`` at the peak rate, ``rate0`` half the peak, ``r`` the
    largest radius on which the rate stays above ``rate0``.

    For the cos^2 family this is ``p = mid``, ``rate0 = beta/2``, ``r = L/4``.
    Overrides for ``p``/``r`` are honoured; ``rate0`` is then the minimum rate on
    the segment.
    """
    if twist.is_zero:
        raise ValueError("the Hardy point needs a non-zero twist")
    p = twist.mid if p is None else float(p)
    if not twist.theta_m < p < twist.theta_M:
        raise ValueError("p must lie strictly inside the twist support")
    if r is None:
        peak = float(twist.rate(p))
        rate0 = peak / 2
        # rate(p -/+ x) decreases monotonically away from mid for this family
        x_edge = (p - twist.theta_m) if side == "right" else (twist.theta_M - p)
        sgn = -1 if side == "right" else 1
        r = brentq(lambda x: float(twist.rate(p + sgn * x)) - rate0, 0.0, x_edge) \
            if float(twist.rate(p + sgn * x_edge)) < rate0 else x_edge
    else:
        r = float(r)
        seg = np.linspace(p - r, p, 2001) if side == "right" else np.linspace(p, p + r, 2001)
        rate0 = float(np.min(twist.rate(seg)))
    return HardyPoint(float(p), float(r), float(rate0), side)


def _check_split(alpha, beta):
    if not (0 < alpha <= 1 and 0 < beta <= 1):
        raise InvalidSplit(f"splitting parameters must lie in (0, 1], got ({alpha}, {beta})")


def gamma_coefficients(alpha, beta, twist, d, lam, hp):
    """``(c1, c2, c3, gamma_ab)`` bounding the cross term on ``(theta_m, p)``."""
    _check_split(alpha, beta)
    rate, acc = twist.sup_rate, twist.sup_accel
    dist = (hp.p - twist.theta_m) if hp.side == "right" else (twist.theta_M - hp.p)
    c1 = 2.0 / alpha * d**2 * rate**2
    c2 = max(2.0 + 16.0 * dist**2 / hp.r**2, 4.0 * dist**2)
    if twist.is_zero:
        return c1, c2, 0.0, c1
    c3 = max(d * acc * rate * np.sqrt(c2) / (hp.rate0 * np.sqrt(lam)),
             d**2 * acc**2 * c2 / alpha,
             d**2 * acc**2 * c2 / (2.0 * beta * hp.rate0**2 * lam))
    return c1, c2, c3, c1 + c3


def gamma_half(twist, d, lam, hp):
    """``(f(L), tilde_gamma, gamma_half)`` for the whole twist support."""
    L, rate, acc = twist.length, twist.sup_rate, twist.sup_accel
    fL = max(2.0 + 16.0 * L**2 / hp.r**2, 4.0 * L**2)
    if twist.is_zero:
        return fL, 0.0, 0.0
    tilde = max(d * rate * acc * np.sqrt(fL) / (hp.rate0 * np.sqrt(lam)),
                d**2 * acc**2 * fL / (lam * hp.rate0**2),
                2.0 * d**2 * acc**2 * fL)
    return fL, tilde, tilde + 4.0 * d**2 * rate**2


def gamma_half_conservative(twist, d, lam, hp):
    """Larger of the two available evaluations of ``gamma_{1/2,1/2}``."""
    _, _, g_support = gamma_half(twist, d, lam, hp)
    _, _, _, g_appendix = gamma_coefficients(0.5, 0.5, twist, d, lam, hp)
    return max(g_support, g_appendix)


def solve_dmax(twist, lam, hp, rtol=1e-8):
    """Largest diameter with ``gamma_{1/2,1/2}(d) <= 1`` (``inf`` without twist)."""
    if twist.is_zero:
        return np.inf
    f = lambda d: gamma_half_conservative(twist, d, lam, hp) - 1.0
    hi = 1.0
    while f(hi) < 0:
        hi *= 2.0
        if hi > 1e12:
            raise NoPositiveDmax("gamma stays below 1 for every diameter")
    lo = 0.0
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if f(mid) <= 0:
            lo = mid
        else:
            hi = mid
    if lo <= 0:
        raise NoPositiveDmax("gamma exceeds 1 for all d > 0")
    return lo


def hardy_constant(alpha, gamma_alpha1, lam0, r):
    """``(c', C)`` with ``C^{-1} = 8 (1 + c') + 2 / lam0``."""
    if not 0 < alpha < 1:
        raise InvalidAlpha(f"alpha must lie in (0, 1), got {alpha}")
    if not lam0 > 0:
        raise ValueError("lam0 must be positive")
    gamma = max(1.0, gamma_alpha1)
    cprime = 2.0 * gamma / (1.0 - alpha) * (1.0 + 1.0 / (lam0 * r**2))
    C = 1.0 / (8.0 * (1.0 + cprime) + 2.0 / lam0)
    return cprime, C


def _K(C, dist):
    return 1.0 / (np.pi * C) + 4.0 * LN2 / np.pi + dist


def c_second(l, C, dist):
    """``c''(l) = 2 l K + l^2`` where ``dist`` is the gap between ``p`` and the window."""
    return 2.0 * l * _K(C, dist) + l * l


def lmax(C, E1, dist):
    """Positive root of ``4 E1 c''(l) = 1``.

    ``dist`` is ``a - p`` (window to the right); it must be positive.
    Written as ``q / (K + sqrt(K^2 + q))`` to avoid cancellation.
    """
    if not dist > 0:
        raise InvalidOrdering(f"the window must lie beyond p (distance {dist})")
    if not (C > 0 and E1 > 0):
        raise ValueError("C and E1 must be positive")
    K = _K(C, dist)
    q = 1.0 / (4.0 * E1)
    value = q / (K + np.sqrt(K * K + q))
    check = 4.0 * E1 * c_second(value, C, dist)
    assert check <= 1.0 + 1e-10, check
    return float(value)


@dataclass
class EffectiveConstants:
    """The full scalar chain, with a provenance tag per field."""

    E1: float
    d: float
    p: float
    r: float
    rate0: float
    alpha: float
    beta: float
    lam: float
    lam0: float
    c1: float
    c2: float
    c3: float
    gamma_ab: float
    gamma_alpha1: float
    gamma: float
    f_L: float
    gamma_tilde: float
    gamma_half: float
    cprime: float
    C: float
    d_max: float
    l_min: float
    l_max: float
    c_second_at_lmax: float
    provenance: dict = field(default_factory=dict)

    def as_dict(self):
        return asdict(self)


def effective_constants(E1, d, twist, hp, lam, lam0, alpha=0.5, beta=0.5, dist=None,
                        provenance=None):
    """Evaluate the chain for given numeric inputs (``lam``, ``lam0``, ``E1``)."""
    c1, c2, c3, g_ab = gamma_coefficients(alpha, beta, twist, d, lam, hp)
    g_a1 = gamma_coefficients(alpha, 1.0, twist, d, lam, hp)[3]
    fL, gt, gh = gamma_half(twist, d, lam, hp)
    gh = max(gh, gamma_half_conservative(twist, d, lam, hp))
    cprime, C = hardy_constant(alpha, g_a1, lam0, hp.r)
    lmx = lmax(C, E1, dist) if dist is not None else float("nan")
    prov = {k: "closed-form" for k in ("p", "r", "rate0", "c1", "c2", "c3", "gamma_ab",
                                      "gamma_alpha1", "gamma", "f_L", "gamma_tilde",
                                      "gamma_half", "cprime", "C", "d_max", "l_min",
                                      "l_max", "c_second_at_lmax", "alpha", "beta", "d")}
    prov.update(E1="numeric", lam="numeric", lam0="numeric")
    prov.update(provenance or {})
    return EffectiveConstants(
        E1=E1, d=d, p=hp.p, r=hp.r, rate0=hp.rate0, alpha=alpha, beta=beta, lam=lam,
        lam0=lam0, c1=c1, c2=c2, c3=c3, gamma_ab=g_ab, gamma_alpha1=g_a1,
        gamma=max(1.0, g_a1), f_L=fL, gamma_tilde=gt, gamma_half=gh, cprime=cprime, C=C,
        d_max=solve_dmax(twist, lam, hp), l_min=lmin(E1), l_max=lmx,
        c_second_at_lmax=c_second(lmx, C, dist) if dist is not None else float("nan"),
        provenance=prov)
