"""Existence and non-existence certificates, ``lambda0`` and the Hardy test."""

from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.sparse as sp

from ..eigensolver import EigenRequest, lowest_eigenpairs
from ..errors import (HypothesisViolated, NonpositiveLambda0, ResolutionBudgetExceeded,
                      WindowMismatch)
from ..form import BCMask, Domain, LongitudinalGrid, assemble_form, interpolate_phi
from ..geometry import validate_scenario
from .constants import existence_gap, lmin
from .profiles import ProfileSet


@dataclass(frozen=True)
class ExistenceCertificate:
    l: float
    l_min: float
    analytic_gap: float
    discrete_gap: float
    relative_difference: float

    @property
    def verdict(self):
        return bool(self.analytic_gap < 0)

    @property
    def discrete_verdict(self):
        """Rigorous for the discrete problem: a trial field below ``E1(h)``."""
        return bool(self.discrete_gap < 0)


def variational_existence(scenario, E1, fm):
    """Plateau trial function over the whole window.

    ``E1`` is used for the analytic gap; the discrete gap uses ``E1`` as well,
    so pass the discrete transverse energy to compare like with like.
    """
    win = scenario.window
    if fm.domain.scenario.window != win:
        raise WindowMismatch("form was assembled for a different window")
    phi = interpolate_phi(win.l, win.a, fm.domain).values
    discrete = float(phi @ (fm.A @ phi) - E1 * (phi @ (fm.M @ phi)))
    area = fm.domain.geometry.discrete_area
    analytic = float(existence_gap(win.l, E1, area))
    rel = abs(discrete - analytic) / abs(analytic) if analytic != 0 else np.inf
    return ExistenceCertificate(win.l, lmin(E1), analytic, discrete, float(rel))


def _segment_matrices(scenario, transverse, lo, hi, h_s):
    """Form on ``[lo, hi]`` with free ends and Dirichlet lateral boundary."""
    n = max(int(np.ceil((hi - lo) / h_s - 1e-9)), 2)
    nodes = np.linspace(lo, hi, n + 1)
    geom = scenario.cross_section
    grid = LongitudinalGrid(nodes, (hi - lo) / n, (0, n), None)
    free = np.broadcast_to(geom.interior, (n + 1, geom.n_nodes)).copy()
    dom = Domain(scenario, grid, BCMask(free, np.zeros_like(free), "neumann"))
    return assemble_form(dom, scenario.twist, transverse)


def compute_lambda0(scenario, transverse, E1, p, r, side="right", h_s=1 / 16):
    """Bottom of ``Q(psi) / ||psi||^2`` on the segment next to ``p``.

    ``Q`` is the shifted form restricted to ``(p - r, p)`` (or ``(p, p + r)``
    for ``side='left'``). ``E1`` must be the discrete transverse energy of the
    same section grid. Returns ``(lam0, form_matrices)``.
    """
    lo, hi = (p - r, p) if side == "right" else (p, p + r)
    win = scenario.window
    if win.a < hi and win.end > lo:
        raise NonpositiveLambda0("the Hardy segment meets the window")
    s = np.linspace(lo, hi, 2001)
    if np.min(np.abs(scenario.twist.rate(s))) <= 0:
        raise NonpositiveLambda0("the twist vanishes somewhere on the Hardy segment")
    fm = _segment_matrices(scenario, transverse, lo, hi, h_s)
    res = lowest_eigenpairs(fm.A, fm.M, EigenRequest(k=1), scale=E1)
    lam0 = float(res.eigenvalues[0] - E1)
    if not lam0 > 0:
        raise NonpositiveLambda0(f"lambda0 = {lam0:.3e}; grid too coarse or twist too weak")
    return lam0, fm


def lambda0_defect(fm, E1, lam0, trials=1000, seed=0):
    """Smallest ``(Q(psi) - lam0 ||psi||^2) / ||psi||^2`` over random fields."""
    rng = np.random.default_rng(seed)
    Q = fm.A - E1 * fm.M
    full = smooth_fields(fm, rng, trials)
    worst = np.inf
    for u in full:
        x = fm.from_full(u)
        m = x @ (fm.M @ x)
        worst = min(worst, (x @ (Q @ x) - lam0 * m) / m)
    return float(worst)


def smooth_fields(fm, rng, n):
    """Random admissible fields on the form's grid, as (slices, nodes) arrays.

    A third is white noise, the rest products of low transverse content and
    random longitudinal bumps, some carrying lateral boundary values where the
    window frees them.
    """
    grid, geom = fm.domain.grid, fm.domain.geometry
    s = grid.nodes
    xy = geom.coords
    ext = np.abs(xy).max(axis=0)
    span = s[-1] - s[0]
    chi = _transverse_shape(fm)
    out = []
    for i in range(n):
        kind = i % 3
        if kind == 0:
            u = rng.standard_normal((grid.n, geom.n_nodes))
        else:
            centre = rng.uniform(s[0], s[-1])
            width = span * 10 ** rng.uniform(-2.5, 0)
            prof = np.exp(-((s - centre) / width) ** 2)
            prof *= 1 + 0.3 * rng.standard_normal() * np.cos(rng.uniform(0, 6) * s)
            m = rng.integers(0, 3, size=2)
            poly = (xy[:, 0] / ext[0]) ** m[0] * (xy[:, 1] / ext[1]) ** m[1]
            trans = chi * (1 + rng.standard_normal() * poly)
            if kind == 2:
                trans = trans + rng.uniform(0, 1) * chi.max()
            u = prof[:, None] * trans[None, :]
            u += 1e-3 * np.abs(u).max() * rng.standard_normal(u.shape)
        u = u * fm.domain.mask.free
        out.append(u)
    return out


def _transverse_shape(fm):
    from ..transverse import solve_transverse_modes
    tm = fm.transverse
    modes = solve_transverse_modes(tm)
    chi = np.zeros(fm.n_section)
    chi[tm.interior] = modes.ground_state
    return chi


@dataclass(frozen=True)
class HardyStatistics:
    trials: int
    seed: int
    C: float
    minimum: float
    mean: float
    violations: int
    threshold: float

    @property
    def passed(self):
        return self.violations == 0


def hardy_weights(fm, profiles):
    """Diagonal matrices ``G`` (``int g |psi|^2``) and ``R`` (``int rho |psi|^2``)."""
    grid = fm.domain.grid
    s = grid.nodes
    w_t = fm.transverse.full_mass.diagonal()
    mid = 0.5 * (s[:-1] + s[1:])
    g_cell = profiles.g(mid)
    wg = np.zeros(grid.n)
    wg[:-1] += 0.5 * grid.h * g_cell
    wg[1:] += 0.5 * grid.h * g_cell
    wr = grid.trapezoid() * profiles.rho(s)
    free = fm.domain.free_index
    G = sp.diags(np.kron(wg, w_t)[free])
    R = sp.diags(np.kron(wr, w_t)[free])
    return G, R


def hardy_extremals(fm, profiles, C, k=2):
    """Lowest eigenvectors of ``(A - G - C R, M)``: the hardest fields on this grid."""
    G, R = hardy_weights(fm, profiles)
    E1 = float(np.max(profiles.g(fm.domain.grid.nodes)))
    # these are only trial fields, so the residual is judged on the scale of E1
    req = EigenRequest(k=k, shift=-1.05 * (E1 + C) - 1.0, tol=1e-8 * max(1.0, E1))
    res = lowest_eigenpairs(fm.A - G - C * R, fm.M, req)
    return res.eigenvalues, res.eigenvectors


def hardy_property_test(fm, profiles, C, trials=1000, seed=0, threshold=1e-8, extremal=2):
    """Check ``q(psi) - int g |psi|^2 >= C int rho |psi|^2`` on random fields.

    ``extremal`` of the ``trials`` fields are the lowest pencil eigenvectors,
    the rest are drawn by :func:`smooth_fields`.
    """
    G, R = hardy_weights(fm, profiles)
    rng = np.random.default_rng(seed)
    margins = []
    fields = []
    if extremal:
        fields = [fm.to_full(v) for v in hardy_extremals(fm, profiles, C, extremal)[1].T]
    fields += smooth_fields(fm, rng, trials - len(fields))
    for u in fields:
        x = fm.from_full(u)
        m = x @ (fm.M @ x)
        lhs = x @ (fm.A @ x) - x @ (G @ x)
        margins.append((lhs - C * (x @ (R @ x))) / m)
    margins = np.array(margins)
    return HardyStatistics(trials, seed, float(C), float(margins.min()), float(margins.mean()),
                           int(np.sum(margins < -threshold)), threshold)


@dataclass(frozen=True)
class SubCheck:
    name: str
    passed: bool
    value: float = float("nan")
    detail: str = ""


@dataclass
class NonexistenceCertificate:
    hypotheses: dict
    d: float
    l: float
    d_max: float
    l_max: float
    checks: list = field(default_factory=list)

    @property
    def verdict(self):
        return bool(all(self.hypotheses.values()) and len(self.checks) == 5
                    and all(c.passed for c in self.checks))

    def as_dict(self):
        out = asdict(self)
        out["verdict"] = self.verdict
        return out


def nonexistence_certificate(scenario, constants, oned=None, hardy=None, bracket=None,
                             unavailable=None):
    """Combine the five sufficient conditions.

    ``oned`` is a :class:`~twistguide.certificates.oned.OneDVerdict`, ``hardy``
    a :class:`HardyStatistics`, ``bracket`` a spectral bracket; any of them may
    be missing, in which case the check fails with the reason taken from
    ``unavailable`` (a dict keyed by check name).
    """
    rep = validate_scenario(scenario)
    if scenario.twist.is_zero:
        raise HypothesisViolated("the non-existence chain needs a non-zero twist")
    if not rep.nonexistence_admissible:
        raise HypothesisViolated("the window must be disjoint from and on one side of the twist")
    unavailable = unavailable or {}
    d = scenario.cross_section.diameter
    l = scenario.window.l
    checks = [SubCheck("d<=d_max", bool(d <= constants.d_max), d),
              SubCheck("l<=l_max", bool(l <= constants.l_max), l)]
    if oned is None:
        checks.append(SubCheck("1d_positivity", False, detail=unavailable.get("1d_positivity", "not run")))
    else:
        checks.append(SubCheck("1d_positivity", oned.positive, oned.ground,
                               f"eps_disc={oned.eps_disc:.3e} violations={oned.violations}"))
    if hardy is None:
        checks.append(SubCheck("hardy", False, detail=unavailable.get("hardy", "not run")))
    else:
        checks.append(SubCheck("hardy", hardy.passed, hardy.minimum,
                               f"violations={hardy.violations} of {hardy.trials}"))
    if bracket is None:
        checks.append(SubCheck("spectral", False, detail=unavailable.get("spectral", "not run")))
    else:
        checks.append(SubCheck("spectral", bracket.no_bound_state_detected,
                               float(bracket.lower[-1, 0] - bracket.threshold),
                               f"lower={bracket.lower[-1, 0]:.10g} threshold={bracket.threshold:.10g}"))
    hyp = dict(twist_nonzero=True, window_disjoint=rep.window_disjoint_from_twist,
               one_sided=rep.nonexistence_admissible)
    return NonexistenceCertificate(hyp, d, l, constants.d_max, constants.l_max, checks)


def try_resolved(fn, *args, **kw):
    """Run ``fn``; a resolution budget failure becomes ``(None, reason)``."""
    try:
        return fn(*args, **kw), ""
    except ResolutionBudgetExceeded as exc:
        return None, f"window not resolvable: {exc}"


def compute_constants(scenario, transverse=None, modes=None, h_s=1 / 16, alpha=0.5, beta=0.5,
                      p=None, r=None, lam=None, lam0=None):
    """Numeric inputs (``E1``, ``lambda``, ``lambda0``) plus the closed-form chain.

    ``lam``/``lam0`` overrides are tagged ``override`` in the provenance.
    Returns ``(constants, side)``.
    """
    from ..transverse import assemble_transverse, estimate_lambda, solve_transverse_modes
    from .constants import effective_constants, select_hardy_point
    rep = validate_scenario(scenario)
    if scenario.twist.is_zero:
        raise HypothesisViolated("the constant chain needs a non-zero twist")
    if not rep.nonexistence_admissible:
        raise HypothesisViolated("the window must be disjoint from and on one side of the twist")
    side = rep.side
    tm = transverse or assemble_transverse(scenario.cross_section)
    md = modes or solve_transverse_modes(tm)
    E1 = md.E1
    prov = {}
    if lam is None:
        lam = estimate_lambda(tm, md)
    else:
        prov["lam"] = "override"
    hp = select_hardy_point(scenario.twist, side, p, r)
    if lam0 is None:
        lam0, _ = compute_lambda0(scenario, tm, E1, hp.p, hp.r, side, h_s)
    else:
        prov["lam0"] = "override"
    win = scenario.window
    dist = win.a - hp.p if side == "right" else hp.p - win.end
    const = effective_constants(E1, scenario.cross_section.diameter, scenario.twist, hp, lam,
                                lam0, alpha, beta, dist, prov)
    return const, side
