from types import SimpleNamespace

import numpy as np
import pytest
from numpy.testing import assert_allclose

from twistguide.certificates import (ProfileSet, compute_constants, compute_lambda0,
                                     existence_gap, hardy_property_test, lambda0_defect, lmin,
                                     nonexistence_certificate, variational_existence)
from twistguide.certificates.certify import hardy_extremals, hardy_weights
from twistguide.eigensolver import EigenRequest, bracket_spectrum, smallest_eigenpairs
from twistguide.errors import HypothesisViolated, NonpositiveLambda0, WindowMismatch
from twistguide.form import assemble_form, build_domain
from twistguide.geometry import WindowSpec, make_twist_profile

E1_EXACT = 5 * np.pi**2


def _fm(sc, tm, h_s=1 / 8, **kw):
    return assemble_form(build_domain(sc, h_s, **kw), sc.twist, tm)


def test_analytic_gap_values():
    assert_allclose(existence_gap(1.0, E1_EXACT, 0.5), -11.384, atol=5e-4)
    assert abs(existence_gap(lmin(E1_EXACT), E1_EXACT, 0.5)) < 1e-12


def test_variational_existence(straight, rect_tm, rect_modes):
    sc = straight.with_(window=WindowSpec(0.0, 1.0))
    fm = _fm(sc, rect_tm, h_s=1 / 64, subdivide=10)
    cert = variational_existence(sc, rect_modes.E1, fm)
    assert cert.verdict and cert.discrete_verdict
    assert cert.relative_difference < 0.02
    # the trial field lives in the discrete space, so the Dirichlet-end minimum is below E1(h)
    low = smallest_eigenpairs(fm, EigenRequest(k=1), rect_modes.E1).eigenvalues[0]
    assert low < rect_modes.E1


def test_existence_negative_below_lmin(straight, rect_tm, rect_modes):
    sc = straight.with_(window=WindowSpec(0.0, 0.25))
    cert = variational_existence(sc, rect_modes.E1, _fm(sc, rect_tm, h_s=1 / 80, subdivide=10))
    assert not cert.verdict and cert.analytic_gap > 0


def test_existence_window_mismatch(straight, rect_tm, rect_modes):
    fm = _fm(straight, rect_tm)
    with pytest.raises(WindowMismatch):
        variational_existence(straight.with_(window=WindowSpec(-1.0, 0.5)), rect_modes.E1, fm)


def test_lambda0(twisted, rect_tm, rect_modes):
    lam0, fm = compute_lambda0(twisted, rect_tm, rect_modes.E1, 0.0, 0.5)
    assert lam0 > 0
    assert lambda0_defect(fm, rect_modes.E1, lam0, trials=1000) >= -1e-8
    half, _ = compute_lambda0(twisted, rect_tm, rect_modes.E1, 0.0, 0.25)
    # no monotonicity is claimed; record the pair for regression
    assert_allclose([lam0, half], [0.4753367349136397, 0.5092022596813024], rtol=1e-6)


def test_lambda0_guards(twisted, rect_tm, rect_modes):
    with pytest.raises(NonpositiveLambda0):
        compute_lambda0(twisted, rect_tm, rect_modes.E1, -1.0, 0.5)   # twist vanishes at -1
    with pytest.raises(NonpositiveLambda0):
        compute_lambda0(twisted.with_(window=WindowSpec(-0.3, 0.2)), rect_tm, rect_modes.E1,
                        0.0, 0.5)


@pytest.fixture(scope="module")
def hardy_setup(request):
    from twistguide.geometry import WaveguideScenario, build_cross_section
    from twistguide.transverse import assemble_transverse
    g = build_cross_section("rectangle", (1.0, 0.5), 16)
    sc = WaveguideScenario(g, make_twist_profile(1.0, -1.0, 1.0), WindowSpec(1.5, 0.5), S=4.0)
    tm = assemble_transverse(g)
    const, side = compute_constants(sc, tm)
    fm = _fm(sc, tm)
    prof = ProfileSet(const.p, const.r, 1.5, 0.5, const.E1, side)
    return sc, const, fm, prof


def test_hardy_random_fields(hardy_setup):
    _, const, fm, prof = hardy_setup
    stats = hardy_property_test(fm, prof, const.C, trials=1000, seed=0)
    assert stats.violations == 0 and stats.passed
    assert stats.minimum > -1e-8 and stats.seed == 0 and stats.trials == 1000


def test_hardy_bump_left_of_twist(hardy_setup, rect_modes):
    _, const, fm, prof = hardy_setup
    s = fm.domain.grid.nodes
    chi = np.zeros(fm.n_section)
    chi[fm.transverse.interior] = rect_modes.ground_state
    u = np.exp(-((s + 2.0) / 0.4) ** 2)[:, None] * chi[None, :]
    x = fm.from_full(u)
    G, R = hardy_weights(fm, prof)
    lhs = x @ (fm.A @ x) - x @ (G @ x)
    rhs = const.C * (x @ (R @ x))
    assert lhs > rhs > 0


def test_hardy_breaks_for_huge_constant(hardy_setup):
    _, const, fm, prof = hardy_setup
    stats = hardy_property_test(fm, prof, 1e6 * const.C, trials=50, seed=0)
    assert stats.violations > 0
    vals, _ = hardy_extremals(fm, prof, const.C)
    assert vals[0] > 0


def _stub_constants(d_max=1.0, l_max=1.0):
    return SimpleNamespace(d_max=d_max, l_max=l_max)


def test_nonexistence_refuses_without_twist(straight):
    with pytest.raises(HypothesisViolated):
        nonexistence_certificate(straight, _stub_constants())


def test_nonexistence_refuses_overlap(twisted):
    with pytest.raises(HypothesisViolated):
        nonexistence_certificate(twisted.with_(window=WindowSpec(0.5, 1.0)), _stub_constants())


def test_nonexistence_verdict_logic(twisted):
    ok1d = SimpleNamespace(positive=True, ground=1e-4, eps_disc=1e-9, violations=0)
    okh = SimpleNamespace(passed=True, minimum=0.1, violations=0, trials=10)
    okb = SimpleNamespace(no_bound_state_detected=True, lower=np.array([[50.0]]), threshold=49.0)
    const = _stub_constants(d_max=2.0, l_max=1.0)
    assert nonexistence_certificate(twisted, const, ok1d, okh, okb).verdict
    cert = nonexistence_certificate(twisted, const, ok1d, None, okb,
                                    unavailable={"hardy": "window not resolvable"})
    assert not cert.verdict
    assert [c.name for c in cert.checks] == ["d<=d_max", "l<=l_max", "1d_positivity",
                                             "hardy", "spectral"]
    assert cert.checks[3].detail == "window not resolvable"
    assert not nonexistence_certificate(twisted, _stub_constants(0.1, 1.0), ok1d, okh, okb).verdict
    assert cert.as_dict()["verdict"] is False


@pytest.mark.slow
def test_nonexistence_red_for_wide_window(twisted, rect_tm, rect_modes):
    l = 2 * lmin(rect_modes.E1)
    sc = twisted.with_(window=WindowSpec(1.5, l), S=4.0)
    const, side = compute_constants(sc, rect_tm, rect_modes, h_s=1 / 8)
    b = bracket_spectrum(sc, [4.0, 8.0], h_s=1 / 8)
    cert = nonexistence_certificate(sc, const, None, None, b)
    spectral = cert.checks[-1]
    assert not spectral.passed and b.bound_state_below_E1
    assert not cert.verdict and l > const.l_max
