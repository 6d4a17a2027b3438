"""Dirichlet modes of the cross-section and the rotational constant ``lambda``."""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .eigensolver import EigenRequest, lowest_eigenpairs
from .errors import DegenerateSection, GridTooCoarse


def _node_grid_positions(geom):
    return np.argwhere(geom.index >= 0)


def _derivative(geom, axis):
    """First derivative along ``axis`` on the full node set.

    Centred where both neighbours exist, one-sided otherwise. Every row sums
    to zero, so constants are annihilated exactly.
    """
    pos = _node_grid_positions(geom)
    h = geom.hx if axis == 0 else geom.hy
    shape = geom.index.shape
    step = np.zeros(2, dtype=int)
    step[axis] = 1

    def neighbour(sign):
        q = pos + sign * step
        ok = (q[:, axis] >= 0) & (q[:, axis] < shape[axis])
        out = -np.ones(len(pos), dtype=int)
        out[ok] = geom.index[q[ok, 0], q[ok, 1]]
        return out

    plus, minus = neighbour(+1), neighbour(-1)
    n = len(pos)
    me = np.arange(n)
    both = (plus >= 0) & (minus >= 0)
    only_p = (plus >= 0) & (minus < 0)
    only_m = (plus < 0) & (minus >= 0)
    rows = np.concatenate([me[both], me[both], me[only_p], me[only_p], me[only_m], me[only_m]])
    cols = np.concatenate([plus[both], minus[both], plus[only_p], me[only_p], me[only_m], minus[only_m]])
    vals = np.concatenate([np.full(both.sum(), 0.5 / h), np.full(both.sum(), -0.5 / h),
                           np.full(only_p.sum(), 1 / h), np.full(only_p.sum(), -1 / h),
                           np.full(only_m.sum(), 1 / h), np.full(only_m.sum(), -1 / h)])
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def full_section_matrices(geom):
    """Gradient stiffness, lumped mass and ``d_tau`` over all section nodes."""
    n = geom.n_nodes
    i, j = geom.edges[:, 0], geom.edges[:, 1]
    w = geom.edge_weights
    K = sp.coo_matrix((np.concatenate([w, w, -w, -w]),
                       (np.concatenate([i, j, i, j]), np.concatenate([i, j, j, i]))),
                      shape=(n, n)).tocsr()
    W = sp.diags(geom.weights)
    t2, t3 = geom.coords[:, 0], geom.coords[:, 1]
    D = sp.diags(t2) @ _derivative(geom, 1) - sp.diags(t3) @ _derivative(geom, 0)
    return K, W, D.tocsr()


@dataclass(frozen=True, eq=False)
class TransverseOperatorMatrices:
    """Section operators restricted to interior (Dirichlet) nodes.

    ``rotation`` is ``d_tau`` between interior nodes; ``rotation_energy`` is
    ``||d_tau u||^2`` including the boundary rows of the quadrature, which is
    what the waveguide form sees on Dirichlet slices.
    """

    geometry: object
    stiffness: sp.csr_matrix
    mass: sp.dia_matrix
    rotation: sp.csr_matrix
    rotation_energy: sp.csr_matrix
    full_stiffness: sp.csr_matrix
    full_mass: sp.dia_matrix
    full_rotation: sp.csr_matrix

    @property
    def dim(self):
        return self.stiffness.shape[0]

    @property
    def interior(self):
        return np.flatnonzero(self.geometry.interior)


def assemble_transverse(geom):
    pos = _node_grid_positions(geom)
    inner = pos[geom.interior]
    for ax in (0, 1):
        if len(np.unique(inner[:, ax])) < 3:
            raise GridTooCoarse("fewer than 3 interior nodes along an axis")
    K, W, D = full_section_matrices(geom)
    idx = np.flatnonzero(geom.interior)
    Kint = K[idx][:, idx].tocsr()
    Wint = sp.diags(geom.weights[idx])
    Dcol = D[:, idx]
    T = (Dcol.T @ W @ Dcol).tocsr()
    return TransverseOperatorMatrices(geom, Kint, Wint, D[idx][:, idx].tocsr(), 0.5 * (T + T.T),
                                      K, W, D)


@dataclass(frozen=True, eq=False)
class TransverseModes:
    energies: np.ndarray
    vectors: np.ndarray      # interior-node values, mass-normalised
    residuals: np.ndarray
    degenerate: np.ndarray   # True where the gap to the next level is < 1e-6 E1

    @property
    def E1(self):
        return float(self.energies[0])

    @property
    def ground_state(self):
        return self.vectors[:, 0]


def solve_transverse_modes(matrices, k=1, tol=1e-8, seed=0):
    res = lowest_eigenpairs(matrices.stiffness, matrices.mass,
                            EigenRequest(k=k, tol=tol, seed=seed), scale=1.0)
    vals, vecs = res.eigenvalues, res.eigenvectors
    if np.sum(vecs[:, 0]) < 0:
        vecs[:, 0] = -vecs[:, 0]
    gaps = np.diff(vals)
    degenerate = np.zeros(len(vals), dtype=bool)
    close = gaps < 1e-6 * vals[0]
    degenerate[:-1] |= close
    degenerate[1:] |= close
    return TransverseModes(vals, vecs, res.residuals, degenerate)


def estimate_lambda(matrices, modes, floor=1e-10):
    """Largest ``lam`` with ``lam ||u||^2 <= ||d_tau u||^2 + ||grad u||^2 - E1 ||u||^2``.

    This is the bottom of the pencil ``(T + K - E1 W, W)`` on the interior nodes.
    """
    B = matrices.rotation_energy + matrices.stiffness - modes.E1 * matrices.mass
    B = 0.5 * (B + B.T)
    # shift to keep the pencil positive definite for the solver
    res = lowest_eigenpairs(B + modes.E1 * matrices.mass, matrices.mass,
                            EigenRequest(k=1, tol=1e-8), scale=modes.E1)
    lam = float(res.eigenvalues[0] - modes.E1)
    if lam <= floor:
        raise DegenerateSection(f"rotational constant {lam:.3e} is not positive; "
                                "the section behaves as rotationally invariant")
    return lam


def rectangle_fd_energy(width, height, hx, hy, m=1, n=1):
    """Exact five-point eigenvalue of mode (m, n) on a rectangle."""
    return (4 / hx**2 * np.sin(m * np.pi * hx / (2 * width)) ** 2
            + 4 / hy**2 * np.sin(n * np.pi * hy / (2 * height)) ** 2)
