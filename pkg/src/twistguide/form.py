"""Discrete quadratic form of the twisted waveguide with a Neumann window.

Everything is assembled once on the full tensor grid (all slices times all
section nodes, boundary included) as

    A = sum_j w_j K_t  +  G^T (h W_t) G,   G psi = d_s psi + thetadot * d_tau psi  on cells,

and boundary conditions only select which nodes are free. Dirichlet data is
therefore elimination, Neumann data is natural, and every masked problem is a
restriction of one form. Min-max comparisons between windows, end conditions
and truncations hold exactly at the matrix level.
"""

import hashlib
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import (IncompatibleGrids, ResolutionBudgetExceeded, UnalignedInterval,
                     WindowMismatch, WindowOutsideTruncation, ZeroField)

MAX_DOFS = 2_000_000


@dataclass(frozen=True, eq=False)
class LongitudinalGrid:
    nodes: np.ndarray
    h: float
    window_nodes: tuple      # node indices of a and a + l (equal when there is no window)
    twist_nodes: tuple       # inclusive node range where thetadot > 0, or None

    @property
    def n(self):
        return len(self.nodes)

    def node_of(self, s, tol=1e-9):
        j = int(round((s - self.nodes[0]) / self.h))
        if j < 0 or j >= self.n or abs(self.nodes[j] - s) > tol * max(1.0, abs(s)):
            raise UnalignedInterval(f"s = {s} is not a grid node")
        return j

    def trapezoid(self, lo=0, hi=None):
        """Trapezoid weights of the node range ``[lo, hi]`` (zero elsewhere)."""
        hi = self.n - 1 if hi is None else hi
        w = np.zeros(self.n)
        if hi > lo:
            w[lo:hi + 1] = self.h
            w[lo] = w[hi] = self.h / 2
        return w


@dataclass(frozen=True, eq=False)
class BCMask:
    free: np.ndarray         # (n_slices, n_section_nodes) boolean
    neumann: np.ndarray      # same shape; lateral boundary nodes on the window
    end: str


@dataclass(frozen=True, eq=False)
class Domain:
    scenario: object
    grid: LongitudinalGrid
    mask: BCMask

    @property
    def geometry(self):
        return self.scenario.cross_section

    @property
    def free_index(self):
        return np.flatnonzero(self.mask.free.ravel())


def build_domain(scenario, h_s, subdivide=1, max_dofs=MAX_DOFS):
    """Longitudinal grid snapped to the window, plus the boundary mask.

    The step is the largest ``l / n`` not exceeding ``h_s`` with ``n`` a multiple
    of ``subdivide`` (use 10 to put the kinks of the trial profile on nodes).
    The grid extends outward from ``a`` until it covers ``[-S, S]``.
    """
    win, S = scenario.window, scenario.S
    if win is None:
        # no window: anchor the grid at the origin, step h_s
        h = S / max(int(np.ceil(S / h_s - 1e-9)), 1)
        n_w, anchor = 0, 0.0
    else:
        if win.a < -S - 1e-12 or win.end > S + 1e-12:
            raise WindowOutsideTruncation(f"window [{win.a}, {win.end}] exits [-{S}, {S}]")
        n_w = max(int(np.ceil(win.l / h_s - 1e-9)), 2)
        n_w = subdivide * int(np.ceil(n_w / subdivide))
        h = win.l / n_w
        anchor = win.a
    n_left = int(np.ceil((anchor + S) / h - 1e-9))
    n_right = int(np.ceil((S - anchor) / h - 1e-9))
    n_slices = n_left + n_right + 1
    geom = scenario.cross_section
    if n_slices * geom.n_nodes > max_dofs:
        what = "the guide" if win is None else f"a window of width {win.l:.3g}"
        raise ResolutionBudgetExceeded(
            f"resolving {what} needs step {h:.3g} and "
            f"{n_slices * geom.n_nodes} unknowns (budget {max_dofs})")
    nodes = anchor + h * np.arange(-n_left, n_right + 1)
    nodes[n_left] = anchor
    if win is not None:
        nodes[n_left + n_w] = win.end

    rate = scenario.twist.rate(nodes)
    on = np.flatnonzero(rate > 0)
    twist_nodes = (int(on[0]), int(on[-1])) if len(on) else None
    grid = LongitudinalGrid(nodes, h, (n_left, n_left + n_w), twist_nodes)

    free = np.broadcast_to(geom.interior, (n_slices, geom.n_nodes)).copy()
    neumann = np.zeros_like(free)
    # only rings strictly inside (a, a + l): the boundary trace of a free ring
    # then vanishes outside the window, as in the continuous form domain
    neumann[n_left + 1:n_left + n_w] = geom.boundary
    free |= neumann
    if scenario.end == "dirichlet":
        free[[0, -1]] = False
    return Domain(scenario, grid, BCMask(free, neumann, scenario.end))


def scenario_hash(scenario, h_s=None):
    g, t, w = scenario.cross_section, scenario.twist, scenario.window
    wt = "none" if w is None else f"{w.a!r}|{w.l!r}"
    text = (f"{g.kind}|{g.params!r}|{g.resolution!r}|{t.beta!r}|{t.theta_m!r}|{t.theta_M!r}|"
            f"{wt}|{scenario.S!r}|{scenario.end}|{h_s!r}")
    return hashlib.sha256(text.encode()).hexdigest()[:16]


@dataclass(frozen=True, eq=False)
class FormMatrices:
    A: sp.csr_matrix
    M: sp.dia_matrix
    domain: Domain
    twist: object
    transverse: object
    h_s: float
    scenario_hash: str
    # building blocks on free unknowns, used by the segment forms
    d_s: sp.csr_matrix
    twist_term: sp.csr_matrix
    cell_mass: sp.dia_matrix

    @property
    def dim(self):
        return self.A.shape[0]

    @property
    def n_section(self):
        return self.domain.geometry.n_nodes

    def to_full(self, x):
        """Scatter a free-unknown vector onto the (slices, section nodes) grid."""
        out = np.zeros(self.domain.mask.free.size)
        out[self.domain.free_index] = x
        return out.reshape(self.domain.mask.free.shape)

    def from_full(self, u):
        return np.asarray(u).ravel()[self.domain.free_index]


def _kron(a, b):
    return sp.kron(a, b, format="csr")


def assemble_form(domain, twist, transverse):
    geom = domain.geometry
    if transverse.geometry is not geom:
        raise IncompatibleGrids("transverse matrices were built on a different section")
    grid = domain.grid
    n_s, n_t, h = grid.n, geom.n_nodes, grid.h
    K_t, W_t, D_t = transverse.full_stiffness, transverse.full_mass, transverse.full_rotation

    Ws = sp.diags(grid.trapezoid())
    n_c = n_s - 1
    c = np.arange(n_c)
    Bs = sp.csr_matrix((np.r_[np.full(n_c, -1 / h), np.full(n_c, 1 / h)],
                        (np.r_[c, c], np.r_[c, c + 1])), shape=(n_c, n_s))
    Av = sp.csr_matrix((np.full(2 * n_c, 0.5), (np.r_[c, c], np.r_[c, c + 1])), shape=(n_c, n_s))
    rate_c = Av @ twist.rate(grid.nodes)

    P = sp.eye(n_s * n_t, format="csr")[:, domain.free_index]
    G2 = _kron(Bs, sp.eye(n_t)) @ P
    G3 = _kron(sp.diags(rate_c) @ Av, D_t) @ P
    Wc = sp.diags(np.kron(np.full(n_c, h), W_t.diagonal()))
    G = G2 + G3
    A = P.T @ _kron(Ws, K_t) @ P + G.T @ Wc @ G
    A = 0.5 * (A + A.T)
    M = sp.diags(np.kron(grid.trapezoid(), W_t.diagonal())[domain.free_index])
    return FormMatrices(A.tocsr(), M, domain, twist, transverse, h,
                        scenario_hash(domain.scenario, h), G2.tocsr(), G3.tocsr(), Wc)


@dataclass(frozen=True, eq=False)
class SegmentForm:
    """The four pieces ``q1, q2, q3, q23`` of the shifted form on ``[lo, hi]``."""

    lo: float
    hi: float
    q1: sp.csr_matrix
    q2: sp.csr_matrix
    q3: sp.csr_matrix
    q23: sp.csr_matrix
    mass: sp.dia_matrix      # ||chi_A psi||^2

    @property
    def total(self):
        return self.q1 + self.q2 + self.q3 + self.q23

    def energies(self, psi):
        psi = np.asarray(getattr(psi, "values", psi))
        return tuple(float(psi @ (Q @ psi)) for Q in (self.q1, self.q2, self.q3, self.q23))

    def __call__(self, psi):
        return sum(self.energies(psi))


def segment_form(fm, interval, E1):
    """Segment energies over ``interval = (lo, hi)``; ends must be grid nodes.

    Infinite ends are clipped to the truncation.
    """
    grid = fm.domain.grid
    lo, hi = interval
    j0 = 0 if lo <= grid.nodes[0] else grid.node_of(lo)
    j1 = grid.n - 1 if hi >= grid.nodes[-1] else grid.node_of(hi)
    if j1 <= j0:
        raise UnalignedInterval("empty segment")
    n_t = fm.n_section
    free = fm.domain.free_index
    wn = grid.trapezoid(j0, j1)
    wc = np.zeros(grid.n - 1)
    wc[j0:j1] = 1.0

    K_t = fm.transverse.full_stiffness
    W_t = fm.transverse.full_mass
    P = sp.eye(grid.n * n_t, format="csr")[:, free]
    Q1 = P.T @ _kron(sp.diags(wn), K_t - E1 * W_t) @ P
    cw = sp.diags(np.repeat(wc, n_t)) @ fm.cell_mass
    G2, G3 = fm.d_s, fm.twist_term
    Q2 = G2.T @ cw @ G2
    Q3 = G3.T @ cw @ G3
    Q23 = G2.T @ cw @ G3
    Q23 = Q23 + Q23.T
    mass = sp.diags(np.kron(wn, W_t.diagonal())[free])
    return SegmentForm(grid.nodes[j0], grid.nodes[j1], Q1.tocsr(), Q2.tocsr(), Q3.tocsr(),
                       Q23.tocsr(), mass)


@dataclass(frozen=True, eq=False)
class TrialField:
    values: np.ndarray
    tag: str = "random"

    def __post_init__(self):
        if not np.all(np.isfinite(self.values)):
            raise ValueError("trial field has non-finite entries")


def rayleigh(fm, psi):
    x = np.asarray(getattr(psi, "values", psi), dtype=float)
    den = float(x @ (fm.M @ x))
    if den == 0.0:
        raise ZeroField("Rayleigh quotient of the zero field")
    return float(x @ (fm.A @ x)) / den


def phi_profile(s, l, a):
    """Piecewise-linear plateau: ramps of width l/10 at both ends of [a, a+l]."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    up = (s >= a) & (s < a + l / 10)
    flat = (s >= a + l / 10) & (s < a + 9 * l / 10)
    down = (s >= a + 9 * l / 10) & (s < a + l)
    out[up] = 10 / l * (s[up] - a)
    out[flat] = 1.0
    out[down] = -10 / l * (s[down] - l - a)
    return out


def interpolate_phi(l, a, domain):
    """Nodal interpolant of ``phi_{l,a}(s) * 1(t)`` on the free unknowns."""
    win = domain.scenario.window
    tol = 1e-12 * max(1.0, abs(a) + l)
    if win is None or a < win.a - tol or a + l > win.end + tol:
        raise WindowMismatch(f"support [{a}, {a + l}] leaves the Neumann window "
                             f"[{win.a}, {win.end}]")
    prof = phi_profile(domain.grid.nodes, l, a)
    full = np.repeat(prof, domain.geometry.n_nodes)
    return TrialField(full[domain.free_index], tag="interpolated-analytic")


def write_triplets(matrix, path):
    """Coordinate export: one ``row col value`` line per entry, 1-based."""
    coo = sp.coo_matrix(matrix)
    order = np.lexsort((coo.col, coo.row))
    with open(path, "w") as fh:
        for i, j, v in zip(coo.row[order], coo.col[order], coo.data[order]):
            fh.write("%d %d %.17g\n" % (i + 1, j + 1, v))


def read_triplets(path, shape=None):
    data = np.loadtxt(path, ndmin=2)
    rows, cols = data[:, 0].astype(int) - 1, data[:, 1].astype(int) - 1
    if shape is None:
        shape = (rows.max() + 1, cols.max() + 1)
    return sp.csr_matrix((data[:, 2], (rows, cols)), shape=shape)
