import numpy as np
import pytest
from numpy.testing import assert_allclose

from twistguide.errors import (EmptySupport, InvalidShape, InvalidWindow,
                               RotationallyInvariant)
from twistguide.geometry import (WaveguideScenario, WindowSpec, build_cross_section,
                                 make_twist_profile, reflect_scenario, scale_cross_section,
                                 validate_scenario)


def test_rectangle_area_and_diameter():
    g = build_cross_section("rectangle", (1.0, 0.5), 64)
    assert_allclose(g.area, 0.5, rtol=1e-8)
    assert_allclose(g.diameter, np.sqrt(1.25), rtol=1e-8)
    assert_allclose(g.discrete_area, 0.5, rtol=1e-12)
    assert g.n_nodes == 65 * 33
    assert g.interior.sum() == 63 * 31


def test_rectangle_is_centred():
    g = build_cross_section("rectangle", (1.0, 0.5), 16)
    assert_allclose(g.coords.mean(axis=0), 0.0, atol=1e-14)
    assert_allclose(np.abs(g.coords).max(axis=0), [0.5, 0.25])


def test_square_is_accepted():
    g = build_cross_section("rectangle", (1.0, 1.0), 32)
    assert g.kind == "rectangle"


@pytest.mark.parametrize("kind,params", [("ellipse", (1.0, 1.0)), ("disk", (1.0, 1.0)),
                                         ("annulus", (0.5, 1.0))])
def test_rotationally_invariant_sections_are_rejected(kind, params):
    with pytest.raises(RotationallyInvariant):
        build_cross_section(kind, params, 16)


@pytest.mark.parametrize("params", [(0.0, 1.0), (-1.0, 0.5), (1.0,)])
def test_bad_parameters(params):
    with pytest.raises(InvalidShape):
        build_cross_section("rectangle", params, 16)


def test_too_coarse_and_unknown_kind():
    with pytest.raises(InvalidShape):
        build_cross_section("rectangle", (1.0, 0.5), 4)
    with pytest.raises(InvalidShape):
        build_cross_section("triangle", (1.0, 0.5), 16)


def test_ellipse_staircase():
    g = build_cross_section("ellipse", (1.0, 0.5), 32)
    assert_allclose(g.area, np.pi * 0.5)
    assert g.diameter == 2.0
    inner = g.coords[g.interior]
    assert np.all((inner[:, 0] / 1.0) ** 2 + (inner[:, 1] / 0.5) ** 2 < 1)
    # staircase quadrature converges to the true area at first order
    assert abs(g.discrete_area - g.area) / g.area < 0.05


def test_scale_keeps_cell_counts():
    g = build_cross_section("rectangle", (1.0, 0.5), 16)
    h = scale_cross_section(g, 0.1)
    assert h.n_nodes == g.n_nodes
    assert_allclose(h.diameter, 0.1)
    assert_allclose(h.coords, g.coords * 0.1 / g.diameter, atol=1e-15)


def test_zero_twist():
    tw = make_twist_profile(0.0, -1.0, 1.0)
    s = np.linspace(-3, 3, 101)
    assert np.all(tw.rate(s) == 0) and np.all(tw.angle(s) == 0)
    assert tw.sup_rate == 0.0 and tw.is_zero


def test_cos2_twist_profile():
    tw = make_twist_profile(1.0, -1.0, 1.0)
    s = np.linspace(-1.5, 1.5, 30001)
    rate = tw.rate(s)
    assert_allclose(rate.max(), 1.0, atol=1e-10)
    assert_allclose(s[np.argmax(rate)], 0.0, atol=1e-3)
    assert_allclose(tw.rate(np.array([-1.0, 1.0])), 0.0, atol=1e-15)
    assert np.all(rate[np.abs(s) > 1] == 0)
    # total rotation is half the support width
    assert_allclose(tw.angle(5.0), 1.0, rtol=1e-14)
    assert_allclose(tw.angle(-5.0), 0.0, atol=1e-15)
    # derivatives agree with finite differences
    ds = s[1] - s[0]
    assert_allclose(np.gradient(tw.angle(s), ds)[1:-1], rate[1:-1], atol=1e-6)
    inner = np.abs(s) < 0.99
    assert_allclose(np.gradient(rate, ds)[inner], tw.accel(s)[inner], atol=1e-6)
    assert_allclose(np.abs(tw.accel(s)).max(), tw.sup_accel, rtol=1e-6)


def test_empty_support():
    with pytest.raises(EmptySupport):
        make_twist_profile(1.0, 1.0, 1.0)


def test_window_width_must_be_positive():
    with pytest.raises(InvalidWindow):
        WindowSpec(0.0, 0.0)
    with pytest.raises(InvalidWindow):
        WindowSpec(0.0, -1.0)


@pytest.mark.parametrize("a,l,right,left,disjoint", [(2.0, 0.5, True, False, True),
                                                     (0.0, 0.5, False, False, False),
                                                     (-3.0, 1.0, False, True, True)])
def test_validate_scenario(rect, a, l, right, left, disjoint):
    sc = WaveguideScenario(rect, make_twist_profile(1.0, -1.0, 1.0), WindowSpec(a, l), S=6.0)
    rep = validate_scenario(sc)
    assert rep.window_right_of_twist == right
    assert rep.window_left_of_twist == left
    assert rep.window_disjoint_from_twist == disjoint
    assert rep.truncation_adequate
    assert rep.nonexistence_admissible == (right or left)


def test_truncation_margin(rect):
    sc = WaveguideScenario(rect, make_twist_profile(1.0, -1.0, 1.0), WindowSpec(2.0, 0.5), S=3.0)
    # margin max(L, l) = 2 beyond the window end 2.5 is not met
    assert not validate_scenario(sc).truncation_adequate


def test_reflection(twisted):
    r = reflect_scenario(twisted)
    assert validate_scenario(r).side == "left"
    rr = reflect_scenario(r)
    assert rr.window == twisted.window and rr.twist == twisted.twist
    s = np.linspace(-2, 2, 41)
    assert_allclose(r.twist.rate(-s), twisted.twist.rate(s), atol=1e-15)
