"""The six benchmark problems: geometry, supports, loads, hyperparameters.

Concrete coordinates not fixed by the usual descriptions of these
benchmarks are chosen here and documented on each constructor:

* (e) T-domain: top bar 2 x 1 on a 1 x 2 stem, total height 3, symmetric
  about x = 0 with the stem base on y = 0.
* (f) curved domain: an S-shaped band of unit thickness, length 4, bounded
  below and above by two pairs of circular arcs (sagitta 0.5, approximated
  by 32-segment polylines) joined by the two vertical end edges.
* (b) both bottom corners roll in x; the consistent free x-translation is
  gauged out by pinning x at the loaded midspan vertex, which leaves the
  strain, stress and compliance of the roller problem unchanged.
* (c) is the bridge of (b) with both bottom corners fully fixed.

Default initial densities are uniform feasible starts (volume gap zero);
structured void-grid patterns remain available through the `init` field
but reproduce the published objectives less well.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .elasticity import LinearSystem, LoadSpec, MaterialModel, apply_dirichlet, nearest_vertex
from .errors import ConfigError, SupportError
from .fields import DensityField
from .mesh import (GridGeometry, Mesh, ShearBandGeometry, build_initial_mesh,
                   _point_on_segment)
from .phasefield import OptimizerState, PhaseFieldParams
from .elasticity import interpolate_constrained

BOTH = "xy"
X_ONLY = "x"
Y_ONLY = "y"


@dataclass(frozen=True)
class Hyperparameters:
    """Algorithm constants: loop sizes, time step, multiplier seeds, model
    weights.  Defaults follow the common benchmark configuration.

    The stiffness scale is E = 100: the published objective values, and the
    multiplier seeds ell0 ~ 1 that must balance strain-energy densities at
    the material interface, are consistent only with a stiffness about two
    orders above unit Young modulus (with E = 1 and unit loads the full
    solid cantilever already has compliance ~30, so no admissible design
    could reach objectives ~0.6).
    """

    n_outer: int
    m_inner: int
    tau: float
    ell0: float
    alpha0: float
    beta: float
    gamma: float
    rho_low: float = 1e-4
    xi: float = 0.99
    p: int = 3
    E: float = 100.0
    nu: float = 0.3


@dataclass(frozen=True)
class ProblemSpec:
    """A complete benchmark instance."""

    name: str
    geometry: object
    dirichlet_segments: tuple = ()     # ((p0, p1), components)
    dirichlet_points: tuple = ()       # (p, components)
    point_loads: tuple = ()            # (p, (fx, fy))
    tractions: tuple = ()              # ((p0, p1), (gx, gy))
    body_force: tuple = (0.0, 0.0)
    volume_target: float = 0.0
    hyper: Hyperparameters = None
    init: tuple = ("uniform", 0.5)
    default_target_h: float = 0.1

    # -- derived pieces ----------------------------------------------------
    @property
    def material(self) -> MaterialModel:
        return MaterialModel(E=self.hyper.E, nu=self.hyper.nu, p=self.hyper.p,
                             rho_low=self.hyper.rho_low)

    @property
    def phase_params(self) -> PhaseFieldParams:
        return PhaseFieldParams(self.hyper.beta, self.hyper.gamma, self.hyper.rho_low)

    @property
    def load_spec(self) -> LoadSpec:
        return LoadSpec(body_force=self.body_force, point_loads=self.point_loads,
                        tractions=self.tractions)

    def optimizer_state(self) -> OptimizerState:
        return OptimizerState(self.hyper.ell0, self.hyper.alpha0, self.hyper.xi,
                              self.hyper.tau, self.hyper.n_outer, self.hyper.m_inner,
                              self.volume_target)

    def build_mesh(self, target_h: float | None = None) -> Mesh:
        h = self.default_target_h if target_h is None else target_h
        segs = tuple(seg for seg, comp in self.dirichlet_segments)
        return build_initial_mesh(self.geometry, h, dirichlet=segs)

    def fixed_dofs(self, mesh: Mesh) -> np.ndarray:
        """Constrained displacement dofs (2v for x, 2v+1 for y), with a
        rigid-body-mode audit on the resulting support set."""
        fixed = []
        fixed_x_pts, fixed_y_pts = [], []
        for (p0, p1), comp in self.dirichlet_segments:
            on = _point_on_segment(mesh.vertices, p0, p1)
            for v in np.where(on)[0]:
                if "x" in comp:
                    fixed.append(2 * v)
                    fixed_x_pts.append(mesh.vertices[v])
                if "y" in comp:
                    fixed.append(2 * v + 1)
                    fixed_y_pts.append(mesh.vertices[v])
        for p, comp in self.dirichlet_points:
            v = nearest_vertex(mesh, p)
            if "x" in comp:
                fixed.append(2 * v)
                fixed_x_pts.append(mesh.vertices[v])
            if "y" in comp:
                fixed.append(2 * v + 1)
                fixed_y_pts.append(mesh.vertices[v])
        _audit_rigid_modes(np.array(fixed_x_pts).reshape(-1, 2),
                           np.array(fixed_y_pts).reshape(-1, 2))
        return np.unique(np.array(fixed, np.int64))

    def initial_density(self, mesh: Mesh) -> DensityField:
        kind = self.init[0]
        if kind == "uniform":
            return DensityField(mesh, np.full(mesh.n_vertices, float(self.init[1])))
        if kind == "voids":
            _, nx, ny, radius, lo, hi = self.init
            pattern = _void_grid_pattern(self.geometry, nx, ny, radius, lo, hi)
            return interpolate_constrained(pattern, mesh)
        raise ConfigError(f"unknown initial density kind {kind!r}")


def _audit_rigid_modes(fixed_x, fixed_y):
    """Reject support sets that leave a translation or a rotation free."""
    if fixed_x.shape[0] == 0 or fixed_y.shape[0] == 0:
        raise SupportError("supports leave a free translation (kernel contains rigid modes)")
    # a rotation about (c1, c2) survives iff every x-support sits at y = c2
    # and every y-support at x = c1
    ys = fixed_x[:, 1]
    xs = fixed_y[:, 0]
    if np.ptp(ys) < 1e-12 and np.ptp(xs) < 1e-12:
        raise SupportError("supports leave a free rotation (add a non-collinear support)")


def mixed_dirichlet_apply(K, f, mesh: Mesh, spec: ProblemSpec) -> LinearSystem:
    """Eliminate exactly the constrained components of the spec's supports."""
    return apply_dirichlet(K, f, spec.fixed_dofs(mesh))


def _void_grid_pattern(geometry, nx, ny, radius, lo, hi):
    """Material field hi with a regular nx-by-ny grid of circular voids lo."""
    if isinstance(geometry, GridGeometry):
        x0 = min(r[0] for r in geometry.rects)
        x1 = max(r[2] for r in geometry.rects)
        y0 = min(r[1] for r in geometry.rects)
        y1 = max(r[3] for r in geometry.rects)
    else:
        x0, x1 = geometry.x0, geometry.x1
        y0, y1 = 0.0, geometry.height
    cx = x0 + (x1 - x0) * (np.arange(nx) + 0.5) / nx
    cy = y0 + (y1 - y0) * (np.arange(ny) + 0.5) / ny

    def pattern(x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        inside = np.zeros(x.shape, bool)
        for a in cx:
            for b in cy:
                inside |= (x - a) ** 2 + (y - b) ** 2 <= radius ** 2
        return np.where(inside, lo, hi)

    return pattern


# ---------------------------------------------------------------------------
# benchmark constructors
# ---------------------------------------------------------------------------

def _arc_points(p0, p1, sagitta, segments=32):
    """Circular arc from p0 to p1 bulging by `sagitta` at the chord midpoint,
    sampled uniformly in x (the arcs used here are graphs over x)."""
    p0 = np.asarray(p0, float)
    p1 = np.asarray(p1, float)
    chord = p1 - p0
    L = math.hypot(*chord)
    if abs(chord[1]) > 1e-12:
        raise ConfigError("arc chord must be horizontal for the band domains")
    R = (L * L / 4.0 + sagitta * sagitta) / (2.0 * abs(sagitta))
    mid = 0.5 * (p0 + p1)
    yc = mid[1] + sagitta - math.copysign(R, sagitta)
    xc = mid[0]
    xs = np.linspace(p0[0], p1[0], segments + 1)
    ys = yc + math.copysign(1.0, sagitta) * np.sqrt(np.maximum(R * R - (xs - xc) ** 2, 0.0))
    pts = np.column_stack([xs, ys])
    pts[0] = p0
    pts[-1] = p1
    return pts


def _curved_band_geometry():
    left = _arc_points((0.0, 0.0), (2.0, 0.0), +0.5)
    right = _arc_points((2.0, 0.0), (4.0, 0.0), -0.5)
    curve = np.vstack([left, right[1:]])
    return ShearBandGeometry(0.0, 4.0, 1.0, tuple(map(tuple, curve)))


def benchmark(bid: str) -> ProblemSpec:
    """Construct benchmark (a)-(f)."""
    b = bid.strip().lower().strip("()")
    rect2x1 = GridGeometry(rects=((-1.0, -0.5, 1.0, 0.5),), snap=0.5)
    if b == "a":
        # cantilever: left side clamped, downward unit point load mid right
        return ProblemSpec(
            name="a", geometry=rect2x1,
            dirichlet_segments=((((-1.0, -0.5), (-1.0, 0.5)), BOTH),),
            point_loads=(((1.0, 0.0), (0.0, -1.0)),),
            volume_target=1.0,
            hyper=Hyperparameters(20, 3, 3.5e-2, 0.8, 0.8, 1e-5, 1e-2),
            init=("uniform", 0.5),
            default_target_h=0.05,
        )
    if b == "b":
        # MBB beam: bottom corners roll in x, midspan bottom load; the free
        # x-translation is gauged by an x-pin at the loaded vertex
        return ProblemSpec(
            name="b", geometry=rect2x1,
            dirichlet_points=(((-1.0, -0.5), Y_ONLY), ((1.0, -0.5), Y_ONLY),
                              ((0.0, -0.5), X_ONLY)),
            point_loads=(((0.0, -0.5), (0.0, -1.0)),),
            volume_target=0.8,
            hyper=Hyperparameters(30, 10, 4.5e-2, 0.4, 0.2, 1e-5, 1e-2),
            init=("uniform", 0.4),
            default_target_h=0.044,
        )
    if b == "c":
        # bridge: both bottom corners fully fixed, midspan bottom load
        return ProblemSpec(
            name="c", geometry=rect2x1,
            dirichlet_points=(((-1.0, -0.5), BOTH), ((1.0, -0.5), BOTH)),
            point_loads=(((0.0, -0.5), (0.0, -1.0)),),
            volume_target=0.4,
            hyper=Hyperparameters(50, 5, 4.0e-2, 0.8, 0.2, 5e-5, 1e-2),
            init=("uniform", 0.2),
            default_target_h=0.05,
        )
    if b == "d":
        # plate with clamped square hole, load mid right side
        return ProblemSpec(
            name="d",
            geometry=GridGeometry(rects=((-2.5, -1.5, 2.5, 1.5),),
                                  hole=(-2.0, -0.5, -1.0, 0.5), snap=0.5),
            dirichlet_segments=(
                (((-2.0, -0.5), (-1.0, -0.5)), BOTH),
                (((-1.0, -0.5), (-1.0, 0.5)), BOTH),
                (((-1.0, 0.5), (-2.0, 0.5)), BOTH),
                (((-2.0, 0.5), (-2.0, -0.5)), BOTH),
            ),
            point_loads=(((2.5, 0.0), (0.0, -1.0)),),
            volume_target=2.2,
            hyper=Hyperparameters(50, 5, 6.5e-3, 1.5, 0.65, 5e-4, 1e-3,
                                  rho_low=1e-3, xi=0.95),
            init=("uniform", 0.3),
            default_target_h=0.101,
        )
    if b == "e":
        # T-domain: bar 2x1 atop a 1x2 stem; stem base corners pinned,
        # downward loads at the bar's lower corners
        return ProblemSpec(
            name="e",
            geometry=GridGeometry(rects=((-0.5, 0.0, 0.5, 2.0), (-1.0, 2.0, 1.0, 3.0)),
                                  snap=0.5),
            dirichlet_points=(((-0.5, 0.0), BOTH), ((0.5, 0.0), BOTH)),
            point_loads=(((-1.0, 2.0), (0.0, -1.0)), ((1.0, 2.0), (0.0, -1.0))),
            volume_target=0.8,
            hyper=Hyperparameters(50, 5, 3.0e-2, 0.8, 0.03, 5e-5, 1e-2, xi=0.95),
            init=("uniform", 0.4),
            default_target_h=0.055,
        )
    if b == "f":
        # curved band: left vertical edge clamped, load at the bottom of the
        # right vertical edge; the target volume is 40% of the domain area
        geom = _curved_band_geometry()
        return ProblemSpec(
            name="f", geometry=geom,
            dirichlet_segments=((((0.0, 0.0), (0.0, 1.0)), BOTH),),
            point_loads=(((4.0, 0.0), (0.0, -1.0)),),
            volume_target=0.4 * geom.area(),
            hyper=Hyperparameters(50, 5, 2.5e-2, 0.8, 0.1, 5e-5, 2e-3),
            init=("uniform", 0.6),
            default_target_h=0.046,
        )
    raise ConfigError(f"unknown benchmark id {bid!r}")
