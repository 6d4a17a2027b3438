"""Effective 1D operator ``-d^2/ds^2 + 2 C rho(s) - 4 E1 1_I(s)`` with Neumann ends.

Linear finite elements on a mesh that is uniform inside the window and grows
geometrically away from it, so windows many orders of magnitude narrower than
the truncation can be resolved. The window ends and the Hardy point ``p`` are
always nodes.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.optimize import brentq

from ..errors import InvalidOrdering, TruncationTooShort
from .profiles import ProfileSet

_GAUSS_X = np.array([-np.sqrt(3 / 5), 0.0, np.sqrt(3 / 5)])
_GAUSS_W = np.array([5 / 9, 8 / 9, 5 / 9])


def _march(x0, x1, size):
    """Nodes from x0 to x1 following the local size function, end hit exactly."""
    xs = [x0]
    sgn = np.sign(x1 - x0)
    while abs(x1 - xs[-1]) > 1.5 * size(xs[-1]):
        xs.append(xs[-1] + sgn * size(xs[-1]))
    xs = np.asarray(xs)
    if len(xs) > 1:
        xs = x0 + (xs - x0) * (x1 - x0) / (xs[-1] + sgn * size(xs[-1]) - x0)
    return np.append(xs, x1)


def graded_mesh(lo, hi, a, l, n_window=64, h_max=0.05, growth=1.02, extra=(), h_cap=np.inf):
    h_w = min(l / n_window, h_cap)
    size = lambda x: min(h_max, h_w + (growth - 1.0) * max(a - x, x - a - l, 0.0))
    breaks = sorted({lo, hi, a, a + l, *extra})
    pieces = []
    for x0, x1 in zip(breaks[:-1], breaks[1:]):
        if x0 >= a and x1 <= a + l:
            pieces.append(np.linspace(x0, x1, max(2, int(round((x1 - x0) / h_w)) + 1)))
        elif x1 <= a:      # march away from the window, then reverse
            pieces.append(_march(x1, x0, size)[::-1])
        else:
            pieces.append(_march(x0, x1, size))
    nodes = np.concatenate([pieces[0]] + [pc[1:] for pc in pieces[1:]])
    return nodes


@dataclass(frozen=True, eq=False)
class OneDOperator:
    nodes: np.ndarray
    stiffness: sp.csr_matrix      # kinetic + potential
    mass: sp.csr_matrix
    potential: np.ndarray         # nodal values of the potential
    profiles: ProfileSet
    C: float

    @property
    def window_mask(self):
        pr = self.profiles
        return (self.nodes > pr.a) & (self.nodes < pr.a + pr.l)

    def potential_formula(self, s):
        pr = self.profiles
        return 2 * self.C * pr.rho(s) - 4 * pr.E1 * ((s > pr.a) & (s < pr.a + pr.l))


def _p1_matrices(x, pot_cell):
    """P1 stiffness(+potential) and consistent mass; ``pot_cell(x0, x1, xq)``."""
    h = np.diff(x)
    n = len(x)
    i = np.arange(n - 1)
    mid = 0.5 * (x[:-1] + x[1:])
    xq = mid[:, None] + 0.5 * h[:, None] * _GAUSS_X[None, :]
    vq = pot_cell(xq)
    phi0 = 0.5 * (1 - _GAUSS_X)
    phi1 = 0.5 * (1 + _GAUSS_X)
    wq = 0.5 * h[:, None] * _GAUSS_W[None, :]
    v00 = np.sum(wq * vq * phi0 * phi0, axis=1)
    v01 = np.sum(wq * vq * phi0 * phi1, axis=1)
    v11 = np.sum(wq * vq * phi1 * phi1, axis=1)
    rows = np.r_[i, i, i + 1, i + 1]
    cols = np.r_[i, i + 1, i, i + 1]
    kin = np.r_[1 / h, -1 / h, -1 / h, 1 / h]
    A = sp.csr_matrix((kin + np.r_[v00, v01, v01, v11], (rows, cols)), shape=(n, n))
    Mv = np.r_[h / 3, h / 6, h / 6, h / 3]
    M = sp.csr_matrix((Mv, (rows, cols)), shape=(n, n))
    return A, M


def assemble_1d(C, E1, a, l, p, side="right", pad=50.0, n_window=64, h_max=0.05,
                growth=1.02, refine=0):
    """Assemble the effective operator on ``[p - pad, a + l + pad]`` (mirrored for
    ``side='left'``). ``refine`` bisects every cell that many times."""
    if pad < 10.0:
        raise TruncationTooShort(f"pad {pad} is too short for the 1/(1+s^2) tail")
    if side == "right" and not a > p:
        raise InvalidOrdering("window must start to the right of p")
    if side == "left" and not a + l < p:
        raise InvalidOrdering("window must end to the left of p")
    lo, hi = (p - pad, a + l + pad) if side == "right" else (a - pad, p + pad)
    # the well oscillates on the scale 1/sqrt(4 E1); resolve it
    x = graded_mesh(lo, hi, a, l, n_window, h_max, growth, extra=(p,),
                    h_cap=0.05 / np.sqrt(4.0 * E1) if E1 > 0 else np.inf)
    for _ in range(refine):
        x = np.sort(np.r_[x, 0.5 * (x[:-1] + x[1:])])
    prof = ProfileSet(p=p, r=1.0, a=a, l=l, E1=E1, side=side)
    # the well is constant on cells, so cell midpoints decide membership exactly
    def pot(xq):
        m = xq.mean(axis=1, keepdims=True)
        well = (m > a) & (m < a + l)
        return 2 * C * prof.rho(xq) - 4 * E1 * well
    A, M = _p1_matrices(x, pot)
    op = OneDOperator(x, A, M, np.zeros(0), prof, C)
    object.__setattr__(op, "potential", op.potential_formula(x))
    return op


def _negative_count(diag, off, sigma_diag, sigma_off):
    """Eigenvalues of the tridiagonal pencil below the shift (LDL^T inertia)."""
    a = diag - sigma_diag
    b2 = (off - sigma_off) ** 2
    count = 0
    d = a[0]
    tiny = np.finfo(float).tiny
    for i in range(1, len(a) + 1):
        if d == 0.0:
            d = -tiny
        if d < 0:
            count += 1
        if i == len(a):
            break
        d = a[i] - b2[i - 1] / d
    return count


def ground_energy(op, atol=1e-14, rtol=1e-13):
    """Lowest eigenvalue by bisection on Sturm counts.

    Shift-and-invert Lanczos stalls on heavily graded meshes where the lowest
    levels cluster near zero; inertia counts do not care.
    """
    A, M = op.stiffness.tocsr(), op.mass.tocsr()
    da, oa = A.diagonal(), A.diagonal(1)
    dm, om = M.diagonal(), M.diagonal(1)
    lo = float(np.min(op.potential_formula(op.nodes))) - 1.0
    one = np.ones(A.shape[0])
    hi = float(one @ (A @ one) / (one @ (M @ one)))
    while hi - lo > max(atol, rtol * abs(hi)):
        mid = 0.5 * (lo + hi)
        if _negative_count(da, oa, mid * dm, mid * om) >= 1:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class OneDVerdict:
    ground: float            # fine-grid ground energy
    extrapolated: float      # two-grid Richardson value
    eps_disc: float
    trial_min: float         # smallest Rayleigh quotient among random trials
    violations: int
    positive: bool


def ground_energy_two_grid(C, E1, a, l, p, side="right", **kw):
    coarse = ground_energy(assemble_1d(C, E1, a, l, p, side, refine=0, **kw))
    fine = ground_energy(assemble_1d(C, E1, a, l, p, side, refine=1, **kw))
    return fine, (4 * fine - coarse) / 3, abs(fine - coarse) / 3


def random_trials(op, n, rng):
    """Smooth random fields: low cosine modes plus bumps around the window."""
    x = op.nodes
    lo, hi = x[0], x[-1]
    pr = op.profiles
    t = (x - lo) / (hi - lo)
    out = np.empty((n, len(x)))
    for i in range(n):
        m = rng.integers(0, 6, size=3)
        u = np.sum(rng.standard_normal(3)[:, None] * np.cos(np.pi * m[:, None] * t[None, :]), axis=0)
        width = 10 ** rng.uniform(np.log10(max(pr.l, 1e-12)), 1.5)
        centre = pr.a + pr.l * rng.uniform()
        u = u + rng.standard_normal() * 3 * np.exp(-((x - centre) / width) ** 2)
        out[i] = u
    return out


def check_1d_positivity(C, E1, a, l, p, side="right", trials=1000, seed=0, **kw):
    fine, extra, eps = ground_energy_two_grid(C, E1, a, l, p, side, **kw)
    op = assemble_1d(C, E1, a, l, p, side, refine=1, **kw)
    rng = np.random.default_rng(seed)
    U = random_trials(op, trials, rng)
    num = np.einsum("ij,ij->i", U, (op.stiffness @ U.T).T)
    den = np.einsum("ij,ij->i", U, (op.mass @ U.T).T)
    q = num / den
    viol = int(np.sum(num < -max(eps, 1e-12) * den))
    return OneDVerdict(fine, extra, eps, float(q.min()), viol,
                       bool(fine >= -eps and viol == 0))


def square_well_ground(E1, a, l, lo, hi):
    """Ground energy of ``-u'' - 4 E1 1_(a, a+l) u`` on ``[lo, hi]`` with Neumann ends.

    Matches logarithmic derivatives of cosh-type exterior solutions to the
    interior cosine.
    """
    V0 = 4.0 * E1
    DL, DR = a - lo, hi - (a + l)

    def F(mu):
        kap = np.sqrt(-mu)
        k = np.sqrt(V0 + mu)
        dl = np.arctan(kap * np.tanh(kap * DL) / k)
        dr = np.arctan(kap * np.tanh(kap * DR) / k)
        return dl + dr - k * l

    tiny = V0 * 1e-15
    # bracket near zero: for tiny wells the root is O(V0 l / length)
    hi_mu = -tiny
    while F(hi_mu) > 0:
        hi_mu *= 0.5
    return brentq(F, -V0 + tiny, hi_mu, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
