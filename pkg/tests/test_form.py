import numpy as np
import pytest
import scipy.sparse as sp
from numpy.testing import assert_allclose

from twistguide.eigensolver import EigenRequest, lowest_eigenpairs
from twistguide.errors import (IncompatibleGrids, ResolutionBudgetExceeded, UnalignedInterval,
                               WindowMismatch, WindowOutsideTruncation, ZeroField)
from twistguide.form import (TrialField, assemble_form, build_domain, interpolate_phi,
                             phi_profile, rayleigh, read_triplets, segment_form,
                             write_triplets)
from twistguide.geometry import WindowSpec, build_cross_section, make_twist_profile
from twistguide.transverse import assemble_transverse

from conftest import random_vectors


def _form(sc, tm, h_s=1 / 8, **kw):
    return assemble_form(build_domain(sc, h_s, **kw), sc.twist, tm)


def test_window_snapping(straight):
    sc = straight.with_(window=WindowSpec(2.0, 0.5), S=10.0)
    dom = build_domain(sc, 1 / 32)
    grid = dom.grid
    j0, j1 = grid.window_nodes
    assert grid.nodes[j0] == 2.0 and grid.nodes[j1] == 2.5
    assert j1 - j0 + 1 == 17
    rings = np.flatnonzero(dom.mask.neumann.any(axis=1))
    # rings strictly inside the window carry Neumann data
    assert_allclose(grid.nodes[rings], 2.0 + np.arange(1, 16) / 32)
    assert grid.nodes[0] <= -10 and grid.nodes[-1] >= 10


def test_masks(straight):
    dom = build_domain(straight, 1 / 8)
    g = straight.cross_section
    assert np.all(dom.mask.free[:, g.interior][1:-1])       # interior nodes never masked
    assert not dom.mask.free[[0, -1]].any()                 # Dirichlet ends
    nm = build_domain(straight.with_(end="neumann"), 1 / 8).mask
    assert nm.free[[0, -1]][:, g.interior].all()
    assert not nm.free[:, g.boundary][~nm.neumann[:, g.boundary]].any()


def test_full_window(straight):
    dom = build_domain(straight.with_(window=WindowSpec(-2.0, 4.0)), 1 / 4)
    g = straight.cross_section
    assert dom.mask.neumann[1:-1][:, g.boundary].all()


def test_window_outside_and_budget(straight):
    with pytest.raises(WindowOutsideTruncation):
        build_domain(straight.with_(window=WindowSpec(1.5, 1.0)), 1 / 8)
    with pytest.raises(ResolutionBudgetExceeded):
        build_domain(straight.with_(window=WindowSpec(0.0, 1e-6)), 1 / 8)


def test_incompatible_grids(straight):
    other = assemble_transverse(build_cross_section("rectangle", (1.0, 0.5), 16))
    with pytest.raises(IncompatibleGrids):
        assemble_form(build_domain(straight, 1 / 8), straight.twist, other)


def test_symmetric_positive(twisted, rect_tm):
    fm = _form(twisted, rect_tm)
    assert abs(fm.A - fm.A.T).max() == 0
    X = random_vectors(fm.dim, 100)
    assert np.all(np.einsum("ij,ij->i", X, (fm.A @ X.T).T) >= 0)


def test_untwisted_is_tensor_sum(straight, rect_tm):
    fm = _form(straight.with_(end="neumann"), rect_tm)
    grid = fm.domain.grid
    n = grid.n
    c = np.arange(n - 1)
    B = sp.csr_matrix((np.r_[-np.ones(n - 1), np.ones(n - 1)] / grid.h, (np.r_[c, c], np.r_[c, c + 1])),
                      shape=(n - 1, n))
    L = B.T @ sp.diags(np.full(n - 1, grid.h)) @ B
    full = sp.kron(sp.diags(grid.trapezoid()), rect_tm.full_stiffness) + sp.kron(L, rect_tm.full_mass)
    idx = fm.domain.free_index
    assert abs(full.tocsr()[idx][:, idx] - fm.A).max() < 1e-10 * abs(fm.A).max()


def test_ground_state_quotient(straight, rect_tm, rect_modes):
    sc = straight.with_(end="neumann")
    dom = build_domain(sc.with_(window=WindowSpec(0.0, 0.25)), 1 / 8)
    fm = assemble_form(dom, sc.twist, rect_tm)
    chi = np.zeros(rect_tm.geometry.n_nodes)
    chi[rect_tm.interior] = rect_modes.ground_state
    psi = fm.from_full(np.tile(chi, (dom.grid.n, 1)))
    assert_allclose(rayleigh(fm, psi), rect_modes.E1, rtol=1e-8)


def test_min_max_monotone_in_window(straight, rect_tm):
    # nested windows on one grid: more Neumann rings means lower eigenvalues
    sc = straight.with_(S=2.0)
    vals = []
    for l in (0.25, 0.5, 1.0):
        fm = _form(sc.with_(window=WindowSpec(0.0, l)), rect_tm, h_s=1 / 8)
        vals.append(lowest_eigenpairs(fm.A, fm.M, EigenRequest(k=2), 50.0).eigenvalues)
    assert np.all(np.diff(np.array(vals), axis=0) <= 1e-10)


def test_segment_pieces(twisted, rect_tm, rect_modes):
    fm = _form(twisted, rect_tm)
    E1 = rect_modes.E1
    right = segment_form(fm, (1.5, 4.0), E1)
    X = random_vectors(fm.dim, 20, seed=3)
    for x in X:
        q1, q2, q3, q23 = right.energies(x)
        assert q3 == 0.0 and q23 == 0.0
    left = segment_form(fm, (-4.0, 1.5), E1)
    for x in X:
        assert left.q1 @ x @ x >= -1e-8 * (left.mass @ x @ x)
    whole = segment_form(fm, (-np.inf, np.inf), E1)
    assert abs(whole.total - (fm.A - E1 * fm.M)).max() < 1e-9 * abs(fm.A).max()


def test_segment_q2_is_difference_energy(straight, rect_tm, rect_modes):
    fm = _form(straight, rect_tm)
    seg = segment_form(fm, (-np.inf, np.inf), rect_modes.E1)
    x = random_vectors(fm.dim, 1, seed=5)[0]
    u = fm.to_full(x)
    w = rect_tm.full_mass.diagonal()
    direct = fm.domain.grid.h * np.sum(((u[1:] - u[:-1]) / fm.domain.grid.h) ** 2 * w)
    assert_allclose(seg.energies(x)[1], direct, rtol=1e-12)


def test_segment_alignment(twisted, rect_tm, rect_modes):
    fm = _form(twisted, rect_tm)
    with pytest.raises(UnalignedInterval):
        segment_form(fm, (0.01, 1.0), rect_modes.E1)


def test_rayleigh_contract(twisted, rect_tm):
    fm = _form(twisted, rect_tm)
    x = random_vectors(fm.dim, 1)[0]
    assert_allclose(rayleigh(fm, 2 * x), rayleigh(fm, x), rtol=1e-14)
    r = lowest_eigenpairs(fm.A, fm.M, EigenRequest(k=1), 50.0)
    assert_allclose(rayleigh(fm, TrialField(r.eigenvectors[:, 0])), r.eigenvalues[0], rtol=1e-8)
    assert rayleigh(fm, x) >= r.eigenvalues[0]
    with pytest.raises(ZeroField):
        rayleigh(fm, np.zeros(fm.dim))
    with pytest.raises(ValueError):
        TrialField(np.full(3, np.nan))


def test_phi_profile_shape():
    s = np.linspace(-0.5, 1.5, 2001)
    p = phi_profile(s, 1.0, 0.0)
    assert p.min() == 0 and p.max() == 1
    assert np.all(p[(s > 0.1) & (s < 0.9)] == 1)
    assert np.all(p[(s <= 0) | (s >= 1)] == 0)


def test_phi_norms(straight, rect_tm):
    sc = straight.with_(end="neumann")
    fm = _form(sc, rect_tm, h_s=1 / 64, subdivide=10)
    phi = interpolate_phi(1.0, 0.0, fm.domain)
    x = phi.values
    area = rect_tm.geometry.discrete_area
    assert_allclose(x @ (fm.M @ x), 13 / 15 * area, rtol=1e-3)
    seg = segment_form(fm, (-np.inf, np.inf), 0.0)
    assert_allclose(seg.energies(x)[1], 20 * area, rtol=1e-12)
    assert np.all(fm.twist_term @ x == 0)
    assert phi.tag == "interpolated-analytic"


def test_phi_must_fit_window(straight, rect_tm):
    dom = build_domain(straight, 1 / 8)
    with pytest.raises(WindowMismatch):
        interpolate_phi(1.0, 0.5, dom)


def test_triplet_roundtrip(tmp_path, twisted, rect_tm):
    fm = _form(twisted, rect_tm, h_s=1 / 4)
    path = tmp_path / "A.txt"
    write_triplets(fm.A, path)
    B = read_triplets(path, fm.A.shape)
    assert abs(B - fm.A).max() == 0
    first = path.read_text().splitlines()[0].split()
    assert int(first[0]) >= 1 and int(first[1]) >= 1
