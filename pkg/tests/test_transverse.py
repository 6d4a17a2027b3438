import numpy as np
import pytest
from numpy.testing import assert_allclose

from twistguide.errors import DegenerateSection, GridTooCoarse
from twistguide.geometry import build_cross_section
from twistguide.transverse import (assemble_transverse, estimate_lambda, rectangle_fd_energy,
                                   solve_transverse_modes)

E1_RECT = 5 * np.pi**2


def test_dimensions_at_res_64():
    tm = assemble_transverse(build_cross_section("rectangle", (1.0, 0.5), 64))
    assert tm.dim == 63 * 31


def test_matrix_properties(rect_tm):
    K, W, D = rect_tm.stiffness, rect_tm.mass, rect_tm.rotation
    assert abs(K - K.T).max() == 0
    assert np.all(W.diagonal() > 0)
    # centred differences on a centred rectangle: exactly antisymmetric inside
    assert abs(D + D.T).max() < 1e-12
    T = rect_tm.rotation_energy
    assert abs(T - T.T).max() < 1e-12


def test_five_point_oracle(rect_tm, rect_modes):
    g = rect_tm.geometry
    assert_allclose(rect_modes.E1, rectangle_fd_energy(1.0, 0.5, g.hx, g.hy), rtol=1e-10)
    assert_allclose(rect_modes.energies[1], rectangle_fd_energy(1.0, 0.5, g.hx, g.hy, 2, 1),
                    rtol=1e-10)


def test_E1_rectangle_res_64():
    modes = solve_transverse_modes(assemble_transverse(
        build_cross_section("rectangle", (1.0, 0.5), 64)))
    assert abs(modes.E1 - E1_RECT) / E1_RECT <= 1e-3
    assert np.all(modes.residuals <= 1e-8)


def test_second_order_convergence():
    errs = []
    for res in (16, 32, 64):
        tm = assemble_transverse(build_cross_section("rectangle", (1.0, 0.5), res))
        errs.append(abs(solve_transverse_modes(tm).E1 - E1_RECT))
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert_allclose(rates, 2.0, atol=0.05)


def test_square_degenerate_pair():
    tm = assemble_transverse(build_cross_section("rectangle", (1.0, 1.0), 32))
    modes = solve_transverse_modes(tm, k=3)
    assert_allclose(modes.energies[1], modes.energies[2], rtol=1e-9)
    assert_allclose(modes.energies[1], 5 * np.pi**2, rtol=5e-3)
    assert modes.degenerate[1] and modes.degenerate[2] and not modes.degenerate[0]


def test_rotation_of_square_ground_state_is_nonzero():
    tm = assemble_transverse(build_cross_section("rectangle", (1.0, 1.0), 32))
    chi = solve_transverse_modes(tm).ground_state
    assert chi @ (tm.rotation_energy @ chi) > 1e-2


@pytest.mark.parametrize("kind,params", [("rectangle", (1.0, 0.5)), ("ellipse", (1.0, 0.6))])
def test_ground_state_has_one_sign(kind, params):
    tm = assemble_transverse(build_cross_section(kind, params, 24))
    chi = solve_transverse_modes(tm).ground_state
    assert np.all(chi > 0)


def test_ellipse_first_mode_converges():
    # mode (0,0) of the ellipse with semi-axes (1, 0.5): reference from a fine grid
    E = [solve_transverse_modes(assemble_transverse(build_cross_section("ellipse", (1.0, 0.5), r))).E1
         for r in (32, 64)]
    assert abs(E[0] - E[1]) / E[1] < 0.05


def test_lambda_positive_and_rotation_invariant():
    a = assemble_transverse(build_cross_section("rectangle", (1.0, 0.5), 32))
    b = assemble_transverse(build_cross_section("rectangle", (0.5, 1.0), 32))
    la = estimate_lambda(a, solve_transverse_modes(a))
    lb = estimate_lambda(b, solve_transverse_modes(b))
    assert la > 0
    assert_allclose(la, lb, rtol=1e-6)


def test_lambda_regression_baseline(rect_tm, rect_modes):
    # recorded value at res 16 (changes only if the discretization changes)
    assert_allclose(estimate_lambda(rect_tm, rect_modes), 0.8218554502623618, rtol=1e-6)


def test_lambda_floor_triggers(rect_tm, rect_modes):
    with pytest.raises(DegenerateSection):
        estimate_lambda(rect_tm, rect_modes, floor=10.0)


def test_grid_too_coarse():
    g = build_cross_section("rectangle", (1.0, 1.0), 8)
    object.__setattr__(g, "boundary", g.boundary | (np.abs(g.coords[:, 0]) > 0.1))
    with pytest.raises(GridTooCoarse):
        assemble_transverse(g)
