"""Lowest eigenpairs of symmetric pencils ``A x = mu M x`` and spectral brackets.

Large problems go through ARPACK in shift-invert mode with the shift placed
below the spectrum (``A`` is positive semidefinite), so the eigenvalues nearest
the shift are the lowest ones. Small problems are solved densely.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .errors import IndefiniteMass, NoConvergence

DENSE_LIMIT = 600


@dataclass(frozen=True)
class EigenRequest:
    k: int = 3
    tol: float = 1e-8
    maxiter: int = 5000
    shift: float = None
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if not 0 < self.tol <= 1e-2:
            raise ValueError("tolerance must lie in (0, 1e-2]")


@dataclass(frozen=True, eq=False)
class EigenResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residuals: np.ndarray
    converged: np.ndarray

    def orthogonality_defect(self, M):
        X = self.eigenvectors
        G = X.T @ (M @ X)
        return float(np.max(np.abs(G - np.eye(G.shape[0]))))


def _check_mass(M):
    d = M.diagonal()
    if np.any(d <= 0) or not np.all(np.isfinite(d)):
        raise IndefiniteMass("mass matrix has non-positive diagonal entries")


def _residuals(A, M, vals, vecs):
    AX = A @ vecs
    MX = M @ vecs
    R = AX - MX * vals
    return np.linalg.norm(R, axis=0) / np.linalg.norm(MX, axis=0)


def lowest_eigenpairs(A, M, request=EigenRequest(), scale=1.0):
    """``request.k`` lowest eigenpairs of the pencil ``(A, M)``.

    ``scale`` is a typical eigenvalue magnitude; it only sets the default shift
    ``-0.05 * scale``. Eigenvectors are M-orthonormal; the sign of each is fixed
    so that its largest-magnitude entry is positive.
    """
    A = sp.csr_matrix(A)
    M = sp.csr_matrix(M)
    _check_mass(M)
    n = A.shape[0]
    k = request.k
    if k >= n:
        raise ValueError(f"k={k} must be below the matrix dimension {n}")

    if n <= DENSE_LIMIT or k >= n - 1:
        vals, vecs = sla.eigh(A.toarray(), M.toarray(), subset_by_index=[0, k - 1])
    else:
        shift = request.shift if request.shift is not None else -0.05 * abs(scale)
        v0 = np.random.default_rng(request.seed).standard_normal(n)
        try:
            vals, vecs = eigsh(A.tocsc(), k=k, M=M.tocsc(), sigma=shift, which="LM",
                               v0=v0, tol=min(request.tol * 1e-3, 1e-10),
                               maxiter=request.maxiter, ncv=max(2 * k + 1, 20))
        except ArpackNoConvergence as exc:
            vals, vecs = exc.eigenvalues, exc.eigenvectors
            res = _residuals(A, M, vals, vecs) if len(vals) else np.array([])
            raise NoConvergence(f"ARPACK returned {len(vals)} of {k} eigenpairs",
                                vals, vecs, res) from exc
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
        # re-orthonormalise in the M inner product (clusters may come back skewed)
        G = vecs.T @ (M @ vecs)
        Lc = np.linalg.cholesky(0.5 * (G + G.T))
        vecs = sla.solve_triangular(Lc, vecs.T, lower=True).T
        H = vecs.T @ (A @ vecs)
        vals, Z = np.linalg.eigh(0.5 * (H + H.T))
        vecs = vecs @ Z

    idx = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[idx, np.arange(vecs.shape[1])])
    vecs = vecs * np.where(signs == 0, 1.0, signs)
    res = _residuals(A, M, vals, vecs)
    # relative to max(1, |mu|) so rescaling the section does not change the verdict
    converged = res <= request.tol * np.maximum(1.0, np.abs(vals))
    result = EigenResult(np.asarray(vals), np.asarray(vecs), res, converged)
    if not converged.all():
        raise NoConvergence(f"residuals {res[~converged]} exceed tol {request.tol}",
                            result.eigenvalues, result.eigenvectors, res)
    return result


def smallest_eigenpairs(fm, request=EigenRequest(), E1=None):
    """Lowest eigenpairs of an assembled waveguide form.

    ``E1`` (the discrete transverse threshold) only sets the default shift; it
    is computed from the form's section matrices when omitted.
    """
    if E1 is None:
        from .transverse import solve_transverse_modes
        E1 = solve_transverse_modes(fm.transverse).E1
    return lowest_eigenpairs(fm.A, fm.M, request, scale=E1)


@dataclass(frozen=True, eq=False)
class SpectralBracket:
    """Neumann-end (lower) and Dirichlet-end (upper) eigenvalues per truncation.

    ``lower[i, j]`` / ``upper[i, j]`` are the ``j``-th eigenvalues at ``S[i]``.
    ``verdict`` is ``"yes"`` (bound state), ``"no"`` (none detected above the
    margin) or ``"uncertain"``.
    """

    S: tuple
    E1: float
    lower: np.ndarray
    upper: np.ndarray
    lower_residuals: np.ndarray
    upper_residuals: np.ndarray
    eps_disc: float
    margin: float
    h: float
    window_cells: int
    dofs: dict
    eps_detail: dict

    @property
    def threshold(self):
        return self.E1 - self.margin

    @property
    def bound_state_below_E1(self):
        return bool(self.upper[-1, 0] < self.threshold)

    @property
    def no_bound_state_detected(self):
        return bool(self.lower[-1, 0] >= self.threshold)

    @property
    def verdict(self):
        if self.bound_state_below_E1:
            return "yes"
        if self.no_bound_state_detected:
            return "no"
        return "uncertain"

    @property
    def widths(self):
        return self.upper[:, 0] - self.lower[:, 0]

    def report_rows(self, scenario_id=""):
        """Rows of the eigen-report table."""
        rows = []
        for i, S in enumerate(self.S):
            for end, vals, res in (("neumann", self.lower[i], self.lower_residuals[i]),
                                   ("dirichlet", self.upper[i], self.upper_residuals[i])):
                for j, (v, r) in enumerate(zip(vals, res)):
                    rows.append(dict(scenario_id=scenario_id, S=S, end_condition=end, index=j,
                                     eigenvalue=float(v), residual=float(r),
                                     below_E1=int(v < self.E1)))
        return rows


def _solve_scenario(scenario, h_s, subdivide, request, max_dofs):
    from .form import assemble_form, build_domain
    from .transverse import assemble_transverse, solve_transverse_modes
    tm = assemble_transverse(scenario.cross_section)
    E1 = solve_transverse_modes(tm).E1
    dom = build_domain(scenario, h_s, subdivide=subdivide, max_dofs=max_dofs)
    fm = assemble_form(dom, scenario.twist, tm)
    return E1, lowest_eigenpairs(fm.A, fm.M, request, scale=E1), fm


def discretization_error(scenario, h_s, end, ratio=1.5, subdivide=1, request=None,
                         max_dofs=None, coarse=None):
    """Two-grid Richardson estimate of the error in ``mu_1 - E1(h)``.

    The section resolution and the longitudinal step are both refined by
    ``ratio``; second order is assumed. ``coarse = (E1, mu1)`` reuses an
    existing base solve. Returns ``(eps, detail)``.
    """
    from .form import MAX_DOFS
    from .geometry import build_cross_section
    max_dofs = MAX_DOFS if max_dofs is None else max_dofs
    request = request or EigenRequest(k=1)
    sc = scenario.with_(end=end)
    g = sc.cross_section
    fine_sc = sc.with_(cross_section=build_cross_section(g.kind, g.params, g.resolution * ratio))
    if coarse is None:
        E1c, rc, _ = _solve_scenario(sc, h_s, subdivide, request, max_dofs)
        coarse = (E1c, rc.eigenvalues[0])
    E1f, rf, fmf = _solve_scenario(fine_sc, h_s / ratio, subdivide, request, max_dofs)
    gap_c = coarse[1] - coarse[0]
    gap_f = rf.eigenvalues[0] - E1f
    rho = ratio
    eps = abs(gap_c - gap_f) * rho**2 / (rho**2 - 1)
    return float(eps), dict(gap_coarse=float(gap_c), gap_fine=float(gap_f), ratio=rho,
                            h_fine=fmf.h_s, dofs_fine=fmf.dim, end=end)


def bracket_spectrum(scenario, S_list, k=1, h_s=1 / 16, subdivide=1, request=None,
                     margin_factor=5.0, ratio=1.5, eps_disc=None, max_dofs=None):
    """Bracket the lowest ``k`` eigenvalues of the infinite guide.

    Each truncation ``S`` is solved with Dirichlet ends (upper estimate) and
    Neumann ends (lower estimate) on nested grids. The margin below ``E1(h)`` is
    ``margin_factor * eps_disc`` (at least ``tol * E1``); ``eps_disc`` is the larger of the two-grid
    estimates for both end conditions at the largest ``S`` unless supplied.
    """
    from .form import MAX_DOFS
    max_dofs = MAX_DOFS if max_dofs is None else max_dofs
    S_list = tuple(sorted(float(s) for s in S_list))
    if len(S_list) < 2:
        raise ValueError("bracketing needs at least two truncation lengths")
    request = request or EigenRequest(k=k)
    if request.k != k:
        request = EigenRequest(k=k, tol=request.tol, maxiter=request.maxiter,
                               shift=request.shift, seed=request.seed)
    lower, upper, lres, ures, dofs = [], [], [], [], {}
    for S in S_list:
        for end, vals, res in (("neumann", lower, lres), ("dirichlet", upper, ures)):
            E1, r, fm = _solve_scenario(scenario.with_(S=S, end=end), h_s, subdivide,
                                        request, max_dofs)
            vals.append(r.eigenvalues)
            res.append(r.residuals)
            dofs[(S, end)] = fm.dim
    detail = {}
    if eps_disc is None:
        big = scenario.with_(S=S_list[-1])
        req1 = EigenRequest(k=1, tol=request.tol, seed=request.seed)
        eps_n, detail["neumann"] = discretization_error(big, h_s, "neumann", ratio, subdivide,
                                                        req1, max_dofs, (E1, lower[-1][0]))
        eps_d, detail["dirichlet"] = discretization_error(big, h_s, "dirichlet", ratio,
                                                          subdivide, req1, max_dofs,
                                                          (E1, upper[-1][0]))
        eps_disc = max(eps_n, eps_d)
    grid = fm.domain.grid
    # never tighter than the solver tolerance itself
    margin = max(margin_factor * float(eps_disc), request.tol * abs(E1))
    return SpectralBracket(S_list, E1, np.array(lower), np.array(upper), np.array(lres),
                           np.array(ures), float(eps_disc), margin,
                           grid.h, grid.window_nodes[1] - grid.window_nodes[0], dofs, detail)
