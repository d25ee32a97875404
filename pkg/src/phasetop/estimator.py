"""Residual-type a posteriori error indicators.

Two indicators per element: eta1 measures the residual of the first-order
optimality condition of the regularized objective, eta2 the residual of the
state equation.  Both combine an element residual weighted by h_T^2 with
edge jumps weighted by h_T; interior edges count in both adjacent elements.

For P1 fields all residual integrands are polynomials: the element terms
are integrated with a rule exact to degree 2*max(3, p-1) and the edge terms
with a Gauss rule exact to degree 2p, so the norms carry no quadrature
error.
"""

from dataclasses import dataclass

import numpy as np

from .elasticity import LoadSpec, MaterialModel, element_stresses, energy_density
from .errors import MeshError
from .fields import DensityField, DisplacementField
from .mesh import DIRICHLET, NEUMANN, Mesh, _point_on_segment
from .phasefield import PhaseFieldParams, double_well_prime
from .quadrature import edge_rule, triangle_rule


@dataclass(frozen=True)
class EstimatorReport:
    """Per-element squared indicators and their totals."""

    eta1_sq: np.ndarray
    eta2_sq: np.ndarray

    @property
    def total1(self):
        return float(self.eta1_sq.sum())

    @property
    def total2(self):
        return float(self.eta2_sq.sum())

    @property
    def total(self):
        return self.total1 + self.total2


def edge_traction_values(mesh: Mesh, loads: LoadSpec | None) -> np.ndarray:
    """Prescribed traction per edge (zero where none applies)."""
    g = np.zeros((mesh.edges.shape[0], 2))
    if loads is None or not loads.tractions:
        return g
    a = mesh.vertices[mesh.edges[:, 0]]
    b = mesh.vertices[mesh.edges[:, 1]]
    mids = 0.5 * (a + b)
    for (p0, p1), gval in loads.tractions:
        hit = (_point_on_segment(a, p0, p1) & _point_on_segment(b, p0, p1)
               & _point_on_segment(mids, p0, p1))
        g[hit] = gval
    return g


def opt_residual_values(mesh: Mesh, rho: DensityField, u: DisplacementField,
                        mat: MaterialModel, params: PhaseFieldParams,
                        t: int, bary) -> np.ndarray:
    """R_1 = (bt/g) W'(rho) - p rho^(p-1) C0 eps(u):eps(u) at barycentric points of T."""
    bary = np.atleast_2d(np.asarray(bary, float))
    rq = bary @ rho.values[mesh.triangles[t]]
    E = energy_density(mesh, u, mat)[t]
    return (params.beta_tilde / params.gamma) * double_well_prime(rq, params.rho_low) \
        - mat.p * rq ** (mat.p - 1) * E


def state_residual_values(mesh: Mesh, rho: DensityField, u: DisplacementField,
                          mat: MaterialModel, t: int, bary,
                          body_force=(0.0, 0.0)) -> np.ndarray:
    """R_2 = f + p rho^(p-1) (C0 eps(u)) grad(rho) at barycentric points of T."""
    bary = np.atleast_2d(np.asarray(bary, float))
    rq = bary @ rho.values[mesh.triangles[t]]
    sig = element_stresses(mesh, u, mat)[t]
    grho = mesh.grads[t].T @ rho.values[mesh.triangles[t]]
    vec = sig @ grho
    out = mat.p * rq[:, None] ** (mat.p - 1) * vec[None, :]
    return out + np.asarray(body_force, float)[None, :]


def gradient_jump(mesh: Mesh, rho: DensityField, params: PhaseFieldParams,
                  edge: int, orientation: float = 1.0) -> float:
    """J_1 on an edge: bt*g*[grad rho . n] (interior) or bt*g*grad rho . n
    (any boundary edge).  Constant along the edge for P1 densities."""
    grads = np.einsum("tkd,tk->td", mesh.grads, rho.values[mesh.triangles])
    n = orientation * mesh.edge_normals[edge]
    t0, t1 = mesh.edge_tris[edge]
    val = grads[t0] @ n
    if t1 >= 0:
        val -= grads[t1] @ n
    return params.beta_tilde * params.gamma * float(val)


def traction_jump(mesh: Mesh, rho: DensityField, u: DisplacementField,
                  mat: MaterialModel, edge: int, t_points,
                  g=(0.0, 0.0), orientation: float = 1.0) -> np.ndarray:
    """J_2 along an edge at parameters t in [0, 1]: the stress-flux jump on
    interior edges, rho^p C0 eps(u).n - g on traction boundary edges."""
    t_points = np.atleast_1d(np.asarray(t_points, float))
    va, vb = mesh.edges[edge]
    rho_t = (1 - t_points) * rho.values[va] + t_points * rho.values[vb]
    sig = element_stresses(mesh, u, mat)
    n = orientation * mesh.edge_normals[edge]
    t0, t1 = mesh.edge_tris[edge]
    if t1 >= 0:
        flux = (sig[t0] - sig[t1]) @ n
        return rho_t[:, None] ** mat.p * flux[None, :]
    flux = sig[t0] @ n
    return rho_t[:, None] ** mat.p * flux[None, :] - np.asarray(g, float)[None, :]


def estimate(mesh: Mesh, rho: DensityField, u: DisplacementField,
             mat: MaterialModel, params: PhaseFieldParams,
             loads: LoadSpec | None = None) -> EstimatorReport:
    """Assemble both squared indicators for every element."""
    if rho.mesh is not mesh or u.mesh is not mesh:
        raise MeshError("fields live on a different mesh")
    p = mat.p
    bt, gamma = params.beta_tilde, params.gamma
    nt = mesh.n_triangles
    h = mesh.h
    areas = mesh.areas

    # element residuals
    bary, w = triangle_rule(2 * max(3, p - 1))
    rq = rho.values[mesh.triangles] @ bary.T                     # (nt, nq)
    E = energy_density(mesh, u, mat)
    r1 = (bt / gamma) * double_well_prime(rq, params.rho_low) - p * rq ** (p - 1) * E[:, None]
    r1_sq = areas * ((r1 ** 2) @ w)

    sig = element_stresses(mesh, u, mat)                          # (nt, 2, 2)
    grho = np.einsum("tkd,tk->td", mesh.grads, rho.values[mesh.triangles])
    svec = np.einsum("tij,tj->ti", sig, grho)                     # (nt, 2)
    fvec = np.zeros(2) if loads is None else np.asarray(loads.body_force, float)
    if callable(fvec):
        raise MeshError("estimator supports piecewise-constant body forces only")
    coef = p * rq ** (p - 1)                                      # (nt, nq)
    # |f + coef*svec|^2 expanded: quadratic in the density polynomial
    s2 = np.einsum("ti,ti->t", svec, svec)
    fs = svec @ fvec
    f2 = float(fvec @ fvec)
    r2_sq = areas * ((coef ** 2) @ w) * s2 \
        + 2.0 * areas * (coef @ w) * fs + areas * f2

    eta1 = h ** 2 * r1_sq
    eta2 = h ** 2 * r2_sq

    # edge terms
    edges = mesh.edges
    etris = mesh.edge_tris
    etag = mesh.edge_tag
    lens = mesh.edge_lengths
    normals = mesh.edge_normals
    interior = etris[:, 1] >= 0

    grads_rho = grho                                              # (nt, 2)
    gplus = grads_rho[etris[:, 0]]
    gminus = np.where(interior[:, None], grads_rho[etris[:, 1].clip(min=0)], 0.0)
    j1_val = bt * gamma * np.einsum("ei,ei->e", gplus - gminus, normals)
    j1_sq = lens * j1_val ** 2                                    # constant jump

    tq, tw = edge_rule(2 * p)
    rho_a = rho.values[edges[:, 0]]
    rho_b = rho.values[edges[:, 1]]
    rho_edge = np.outer(1 - tq, rho_a) + np.outer(tq, rho_b)      # (nq, ne)
    int_rho_p = lens * (tw @ rho_edge ** p)
    int_rho_2p = lens * (tw @ rho_edge ** (2 * p))

    sp_flux = np.einsum("eij,ej->ei", sig[etris[:, 0]], normals)
    sm_flux = np.einsum("eij,ej->ei", sig[etris[:, 1].clip(min=0)], normals)
    gvals = edge_traction_values(mesh, loads)
    j2_sq = np.zeros(edges.shape[0])
    flux_jump = sp_flux - sm_flux
    j2_sq[interior] = (np.einsum("ei,ei->e", flux_jump, flux_jump) * int_rho_2p)[interior]
    neum = etag == NEUMANN
    j2_sq[neum] = (np.einsum("ei,ei->e", sp_flux, sp_flux) * int_rho_2p
                   - 2.0 * np.einsum("ei,ei->e", sp_flux, gvals) * int_rho_p
                   + np.einsum("ei,ei->e", gvals, gvals) * lens)[neum]
    # Dirichlet and untracked-free edges contribute nothing to eta2

    for k in range(3):
        eid = mesh.tri_edges[:, k]
        eta1 += h * j1_sq[eid]
        eta2 += h * j2_sq[eid]

    eta1 = np.maximum(eta1, 0.0)
    eta2 = np.maximum(eta2, 0.0)
    return EstimatorReport(eta1, eta2)
