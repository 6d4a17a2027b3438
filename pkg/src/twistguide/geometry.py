"""Cross-sections, twist profiles, Neumann windows and scenario checks.

The tube is always described in straightened coordinates ``(s, t2, t3)``; the
cross-section is centred on the rotation axis ``t = 0``.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptySupport, InvalidShape, InvalidWindow, RotationallyInvariant

MIN_CELLS = 8


@dataclass(frozen=True, eq=False)
class CrossSectionGeometry:
    """A rectangle or ellipse together with its structured node grid.

    The grid covers the closed section: ``boundary`` marks the nodes carrying
    the lateral boundary condition, ``weights`` is the lumped (trapezoidal)
    quadrature, and ``edges``/``edge_weights`` define the gradient energy
    ``sum w_e (u_i - u_j)**2``.
    """

    kind: str
    params: tuple
    resolution: float
    area: float
    diameter: float
    vertices: np.ndarray
    hx: float
    hy: float
    coords: np.ndarray
    boundary: np.ndarray
    weights: np.ndarray
    edges: np.ndarray
    edge_weights: np.ndarray
    index: np.ndarray = field(repr=False)  # bounding-grid (ix, iy) -> node, -1 if absent
    offset: tuple = (0, 0)

    @property
    def n_nodes(self):
        return len(self.coords)

    @property
    def interior(self):
        return ~self.boundary

    @property
    def discrete_area(self):
        return float(self.weights.sum())

    def cells_shortest_side(self):
        if self.kind == "rectangle":
            return int(round(min(self.params) / min(self.hx, self.hy)))
        return int(round(2 * min(self.params) / self.hx))


def _rectangle(width, height, resolution):
    nx = int(round(width * resolution))
    ny = int(round(height * resolution))
    if min(nx, ny) < MIN_CELLS:
        raise InvalidShape(
            f"resolution {resolution} gives {min(nx, ny)} cells on the shortest side; "
            f"need at least {MIN_CELLS}")
    hx, hy = width / nx, height / ny
    x = -width / 2 + hx * np.arange(nx + 1)
    y = -height / 2 + hy * np.arange(ny + 1)
    wx = np.full(nx + 1, hx)
    wx[[0, -1]] = hx / 2
    wy = np.full(ny + 1, hy)
    wy[[0, -1]] = hy / 2

    index = np.arange((nx + 1) * (ny + 1)).reshape(nx + 1, ny + 1)
    X, Y = np.meshgrid(x, y, indexing="ij")
    coords = np.column_stack([X.ravel(), Y.ravel()])
    I, J = np.meshgrid(np.arange(nx + 1), np.arange(ny + 1), indexing="ij")
    boundary = ((I == 0) | (I == nx) | (J == 0) | (J == ny)).ravel()
    weights = np.outer(wx, wy).ravel()

    ex = np.column_stack([index[:-1, :].ravel(), index[1:, :].ravel()])
    wex = np.broadcast_to(wy[None, :] / hx, (nx, ny + 1)).ravel()
    ey = np.column_stack([index[:, :-1].ravel(), index[:, 1:].ravel()])
    wey = np.broadcast_to(wx[:, None] / hy, (nx + 1, ny)).ravel()
    edges = np.vstack([ex, ey])
    edge_weights = np.concatenate([wex, wey])

    vertices = np.array([[-width / 2, -height / 2], [width / 2, -height / 2],
                         [width / 2, height / 2], [-width / 2, height / 2]])
    return dict(area=width * height, diameter=float(np.hypot(width, height)),
                vertices=vertices, hx=hx, hy=hy, coords=coords, boundary=boundary,
                weights=weights, edges=edges, edge_weights=edge_weights, index=index)


def _ellipse(a, b, resolution, n_vertices=720):
    h = 1.0 / resolution
    if 2 * min(a, b) / h < MIN_CELLS:
        raise InvalidShape(f"resolution {resolution} too coarse for ellipse ({a}, {b})")
    mx = int(np.ceil(a / h)) + 1
    my = int(np.ceil(b / h)) + 1
    gx = h * np.arange(-mx, mx + 1)
    gy = h * np.arange(-my, my + 1)
    X, Y = np.meshgrid(gx, gy, indexing="ij")
    inside = (X / a) ** 2 + (Y / b) ** 2 < 1 - 1e-12
    near = np.zeros_like(inside)
    near[1:, :] |= inside[:-1, :]
    near[:-1, :] |= inside[1:, :]
    near[:, 1:] |= inside[:, :-1]
    near[:, :-1] |= inside[:, 1:]
    keep = inside | near

    index = -np.ones(X.shape, dtype=int)
    index[keep] = np.arange(keep.sum())
    coords = np.column_stack([X[keep], Y[keep]])
    boundary = ~inside[keep]
    weights = np.where(boundary, h * h / 2, h * h)

    edges = []
    for sl0, sl1 in [((slice(None, -1), slice(None)), (slice(1, None), slice(None))),
                     ((slice(None), slice(None, -1)), (slice(None), slice(1, None)))]:
        i0, i1 = index[sl0], index[sl1]
        ok = (i0 >= 0) & (i1 >= 0) & (inside[sl0] | inside[sl1])
        edges.append(np.column_stack([i0[ok], i1[ok]]))
    edges = np.vstack(edges)
    edge_weights = np.ones(len(edges))

    t = np.linspace(0, 2 * np.pi, n_vertices, endpoint=False)
    vertices = np.column_stack([a * np.cos(t), b * np.sin(t)])
    return dict(area=np.pi * a * b, diameter=2.0 * max(a, b), vertices=vertices,
                hx=h, hy=h, coords=coords, boundary=boundary, weights=weights,
                edges=edges, edge_weights=edge_weights, index=index)


def build_cross_section(kind, params, resolution):
    """Build a cross-section on a structured grid.

    ``params`` are the side lengths ``(width, height)`` of a rectangle or the
    semi-axes ``(a, b)`` of an ellipse; ``resolution`` is cells per unit length.
    """
    params = tuple(float(p) for p in params)
    if len(params) != 2 or min(params) <= 0 or not np.all(np.isfinite(params)):
        raise InvalidShape(f"shape parameters must be two positive numbers, got {params}")
    if kind in ("disk", "disc", "circle", "annulus"):
        raise RotationallyInvariant(f"{kind} cross-sections are rotationally invariant")
    if kind == "rectangle":
        data = _rectangle(*params, resolution)
    elif kind == "ellipse":
        if np.isclose(params[0], params[1], rtol=1e-12, atol=0):
            raise RotationallyInvariant("an ellipse with equal semi-axes is a disk")
        data = _ellipse(*params, resolution)
    else:
        raise InvalidShape(f"unknown cross-section kind {kind!r}")
    return CrossSectionGeometry(kind=kind, params=params, resolution=float(resolution), **data)


def scale_cross_section(geom, diameter):
    """Same shape and cell count, rescaled to the given diameter."""
    factor = diameter / geom.diameter
    return build_cross_section(geom.kind, tuple(p * factor for p in geom.params),
                               geom.resolution / factor)


@dataclass(frozen=True)
class TwistProfile:
    """Twist rate ``beta * cos(pi (s - mid) / L)**2`` on ``[theta_m, theta_M]``."""

    beta: float
    theta_m: float
    theta_M: float

    @property
    def length(self):
        return self.theta_M - self.theta_m

    @property
    def mid(self):
        return 0.5 * (self.theta_m + self.theta_M)

    @property
    def is_zero(self):
        return self.beta == 0.0

    @property
    def sup_rate(self):
        return abs(self.beta)

    @property
    def sup_accel(self):
        return abs(self.beta) * np.pi / self.length

    def _inside(self, s):
        return (s >= self.theta_m) & (s <= self.theta_M)

    def rate(self, s):
        s = np.asarray(s, dtype=float)
        u = np.pi * (s - self.mid) / self.length
        return np.where(self._inside(s), self.beta * np.cos(u) ** 2, 0.0)

    def accel(self, s):
        s = np.asarray(s, dtype=float)
        u = 2 * np.pi * (s - self.mid) / self.length
        return np.where(self._inside(s), -self.beta * np.pi / self.length * np.sin(u), 0.0)

    def angle(self, s):
        s = np.asarray(s, dtype=float)
        L = self.length
        u = np.clip(s, self.theta_m, self.theta_M) - self.mid
        return self.beta * ((u + L / 2) / 2 + L / (4 * np.pi) * np.sin(2 * np.pi * u / L))


def make_twist_profile(beta, theta_m, theta_M):
    if not theta_M > theta_m:
        if beta > 0:
            raise EmptySupport(f"twist support [{theta_m}, {theta_M}] is empty")
        theta_M = theta_m + 1.0
    if beta < 0:
        raise ValueError("twist amplitude must be non-negative")
    return TwistProfile(float(beta), float(theta_m), float(theta_M))


@dataclass(frozen=True)
class WindowSpec:
    a: float
    l: float

    def __post_init__(self):
        if not self.l > 0:
            raise InvalidWindow(f"window width must be positive, got {self.l}")

    @property
    def end(self):
        return self.a + self.l


@dataclass(frozen=True, eq=False)
class WaveguideScenario:
    """Section, twist, window (``None`` for a fully Dirichlet guide) and truncation."""

    cross_section: CrossSectionGeometry
    twist: TwistProfile
    window: WindowSpec
    S: float
    end: str = "dirichlet"

    def __post_init__(self):
        if self.end not in ("dirichlet", "neumann"):
            raise ValueError(f"end condition must be dirichlet or neumann, got {self.end!r}")
        if not self.S > 0:
            raise ValueError("truncation half-length must be positive")

    def with_(self, **changes):
        kw = dict(cross_section=self.cross_section, twist=self.twist,
                  window=self.window, S=self.S, end=self.end)
        kw.update(changes)
        return WaveguideScenario(**kw)


@dataclass(frozen=True)
class HypothesisReport:
    window_disjoint_from_twist: bool
    window_right_of_twist: bool
    window_left_of_twist: bool
    truncation_adequate: bool

    @property
    def nonexistence_admissible(self):
        return self.window_disjoint_from_twist and (
            self.window_right_of_twist or self.window_left_of_twist)

    @property
    def side(self):
        if self.window_right_of_twist:
            return "right"
        if self.window_left_of_twist:
            return "left"
        return None


def validate_scenario(scenario):
    tw, win = scenario.twist, scenario.window
    if win is None:
        lo, hi = tw.theta_m - tw.length, tw.theta_M + tw.length
        return HypothesisReport(True, False, False,
                                bool(tw.is_zero or (-scenario.S <= lo and scenario.S >= hi)))
    if tw.is_zero:
        disjoint = True
    else:
        disjoint = win.end <= tw.theta_m or win.a >= tw.theta_M
    margin = max(tw.length, win.l)
    lo = min(tw.theta_m, win.a) - margin
    hi = max(tw.theta_M, win.end) + margin
    return HypothesisReport(
        window_disjoint_from_twist=bool(disjoint),
        window_right_of_twist=bool(win.a >= tw.theta_M),
        window_left_of_twist=bool(win.end <= tw.theta_m),
        truncation_adequate=bool(-scenario.S <= lo and scenario.S >= hi),
    )


def reflect_scenario(scenario):
    """Mirror image under ``s -> -s``."""
    tw, win = scenario.twist, scenario.window
    return scenario.with_(twist=TwistProfile(tw.beta, -tw.theta_M, -tw.theta_m),
                          window=None if win is None else WindowSpec(-win.end, win.l))
